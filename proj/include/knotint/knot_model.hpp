#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "knotint/errors.hpp"
#include "knotint/geom.hpp"

namespace knotint {

// Closed parametrized curve in R^3, period 2*pi, with analytic derivatives.
// Fourier: x(s) = sum_k a_k cos(ks) + b_k sin(ks), k from 0 (b_0 ignored).
// Polyline: periodic cubic spline through the control points at uniform
// parameters.
struct Curve {
  enum class Repr { fourier, polyline };
  Repr repr = Repr::fourier;

  // fourier: per coordinate, coefficient pairs [a_k, b_k] indexed by harmonic k
  std::vector<std::pair<double, double>> cx, cy, cz;

  // polyline: control points plus precomputed spline second derivatives
  std::vector<Point3> points;
  std::vector<Point3> spline_m;

  double delta_emb = 0.0;  // validated self-clearance; 0 = not yet validated
};

struct CurveSample {
  Point3 position;
  Vec3 tangent;
};

CurveSample eval_curve(const Curve& c, double s);

// Self-clearance: minimum chordal distance among point pairs whose chordal
// distance is below half their arc distance (so parameter-neighbor pairs do
// not count), capped by half the curve diameter.  Throws EmbeddednessFailure
// below min_clearance.
double validate_embeddedness(Curve& c, double min_clearance = 1e-6);

Curve load_curve(const std::string& path);
void save_curve(const Curve& c, const std::string& path);
Curve curve_from_json_text(const std::string& text);
std::string curve_to_json_text(const Curve& c);

// unknot | trefoil | figure8; UnknownName otherwise.
Curve builtin_knot(const std::string& name);
// Accepts a builtin name or a file path.
Curve resolve_curve(const std::string& name_or_path);

Curve reverse_orientation(const Curve& c);
Curve translate_curve(const Curve& c, const Vec3& offset);
Curve rotate_curve(const Curve& c, const Vec3& axis, double angle);
Curve mirror_curve_z(const Curve& c);  // reflect through the xy-plane

// Adds a random harmonic displacement (orders <= 3) scaled to the exact
// sup-norm amplitude; requires amplitude < delta_emb/2 and revalidates.
Curve perturb_isotopy(const Curve& c, double amplitude, uint64_t seed);

// Least-squares harmonic fit through n_samples uniform samples of f.
Curve fit_fourier(const std::vector<Point3>& samples, int order);
// Orientation-preserving circle diffeomorphism s -> s + a*sin(s+b), |a| < 1,
// applied by dense resampling and refit at the given harmonic order.
Curve reparametrize_curve(const Curve& c, double a, double b, int order = 32);

// ---------------------------------------------------------------------------
// Projection combinatorics (independent oracles)

struct Crossing {
  double s_over = 0.0, s_under = 0.0;  // curve parameters of the two strands
  int sign = 0;                        // +1/-1 from projected tangent frame
  int curve_over = 0, curve_under = 0; // curve ids for two-curve projections
};

struct GaussCodeEntry {
  int label = 0;
  bool over = false;
  int sign = 0;
};

struct GaussCode {
  std::vector<GaussCodeEntry> entries;  // cyclic sequence along the curve
};

// Crossings of the planar projection along 'direction' (retries with jitter on
// degeneracy, budget 16, then throws DegenerateProjection).
std::vector<Crossing> projection_crossings(const Curve& c, const Vec3& direction);
GaussCode project_gauss_code(const Curve& c, const Vec3& direction);

// Degree-2 invariant from the code: sum of sign products over crossing pairs
// (c,d) whose linear positions interleave as u_c < o_d < o_c < u_d.
int pv_v2(const GaussCode& gc);

// Half-sum of signs of inter-curve crossings.
int crossing_linking(const Curve& c1, const Curve& c2, const Vec3& direction);

struct DirectionAverage {
  double mean = 0.0;
  double std_error = 0.0;
  int n_directions = 0;
};

// Mean signed self-crossing count over uniformly random projection directions.
DirectionAverage writhe_oracle(const Curve& c, int n_directions, uint64_t seed);

}  // namespace knotint
