#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "knotint/diagram_algebra.hpp"
#include "knotint/gauss_forms.hpp"
#include "knotint/knot_model.hpp"
#include "knotint/rng.hpp"

namespace knotint {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  uint64_t n_samples = 0;
  uint64_t seed = 0;
  double rejection_rate = 0.0;
};

// Importance sampler over n ordered knot parameters and m free points.  Free
// points come from a half-box, half-heavy-tail mixture whose tail part is
// anchored on fixed curve points and on the knot points of the current draw,
// so the integrand-over-density ratio stays bounded near the curve.
struct KnotSampler {
  const Curve* curve = nullptr;
  int n_knot = 0;
  int n_free = 0;
  double rejection_cutoff = 1e-9;

  Point3 box_lo, box_hi;
  double box_volume = 0.0;
  std::vector<Point3> anchors;  // fixed curve points for the tail component
  double lambda_anchor = 0.0;
  double lambda_local = 0.0;
  double diameter = 0.0;
};

KnotSampler make_sampler(const Curve& c, int n_knot, int n_free,
                         double rejection_cutoff = 1e-9);

struct DrawResult {
  Configuration cfg;
  int rejects = 0;  // clash rejections before acceptance
  bool ok = false;  // false when the retry budget (100) ran out
};

DrawResult sample_configuration(const KnotSampler& sampler, Rng& rng);

// Exact mixture density of one free point given the drawn knot parameters.
double free_point_density(const KnotSampler& sampler, const std::vector<Point3>& knot_positions,
                          const Point3& y);

// Per-sample kernel: fills values[0..n_components-1], returns the number of
// rejected proposals consumed for this sample.
using SampleKernel = std::function<int(uint64_t sample_index, Rng& rng, double* values)>;

struct MultiEstimate {
  std::vector<double> value;
  std::vector<double> std_error;
  uint64_t n_samples = 0;
  uint64_t seed = 0;
  double rejection_rate = 0.0;
};

// Deterministic blocked mean estimator: per-sample counter RNG streams,
// fixed-size blocks accumulated in index order, block partials combined in
// block order.  Bit-identical results for any worker count; OpenMP parallel
// over blocks when available and workers > 1.
MultiEstimate run_blocked_mc(uint64_t n_samples, uint64_t seed, int workers, int n_components,
                             const SampleKernel& kernel);

// Product of edge forms of g wedged to top degree on the evaluated
// configuration (arcs are parameters, not factors).  DegreeMismatch unless
// 2 * #internal_edges == n_ext + 3 * n_int.
double graph_integrand(const EvaluatedConfiguration& ec, const KnotGraph& g);

// Monte-Carlo estimate of the configuration-space integral of one knot graph.
Estimate mc_estimate(const Curve& c, const KnotGraph& g, uint64_t n_samples, uint64_t seed,
                     int workers, double rejection_cutoff = 1e-9);

// Deterministic quadrature for chord diagrams (n_int == 0): ordered tuples on
// an N-point circle grid times label rotations, with the matching sign taken
// from the wedge of indicator forms.  value at the given mesh, std_error from
// comparison with the halved mesh.  NotChordDiagram when internal vertices are
// present; SizeLimit above four external vertices.
Estimate chord_quadrature(const Curve& c, const KnotGraph& g, int mesh);

struct ResidualComponent {
  std::string name;  // which base coordinate direction the component pairs with
  double value = 0.0;
  double std_error = 0.0;
};

// The six base-direction components of the fiber integral of
// omega_{ij} ^ omega_{ik} over the collapsing point x_i, for fixed x_j, x_k.
// All components vanish for the exact integral.
std::vector<ResidualComponent> kontsevich_residual(const Point3& xj, const Point3& xk,
                                                   uint64_t n_samples, uint64_t seed, int workers,
                                                   double rejection_cutoff = 1e-9);

// Vacuum integral of a closed trivalent graph over the normalized
// configuration slice (sum of points zero, sum of squared norms one), with one
// auxiliary base point and one point at infinity.
Estimate b_gamma_estimate(const LabeledGraph& g, uint64_t n_samples, uint64_t seed, int workers,
                          double rejection_cutoff = 1e-4);

struct ParityCheckResult {
  int n_checked = 0;
  int n_failed = 0;
  double max_deviation = 0.0;
};

// Verifies the antipodal symmetry of the slice integrand sample-by-sample:
// the raw integrand picks up (-1)^(#two-form factors) while the orientation
// sign flips, so the oriented integrand of a theta-like graph is odd.
ParityCheckResult b_gamma_parity_check(const LabeledGraph& g, int n_configs, uint64_t seed);

struct ConvergenceRow {
  uint64_t n_samples = 0;
  double value = 0.0;
  double std_error = 0.0;
  double rejection_rate = 0.0;
  double wall_time_ms = 0.0;
};

// Honest prefix-run convergence table at n/64, n/16, n/4, n samples.
std::vector<ConvergenceRow> convergence_table(const std::function<Estimate(uint64_t)>& runner,
                                              uint64_t n_samples);

}  // namespace knotint
