#pragma once

#include <array>
#include <vector>

#include "knotint/diagram_algebra.hpp"
#include "knotint/errors.hpp"
#include "knotint/geom.hpp"
#include "knotint/knot_model.hpp"

namespace knotint {

// Direction map of the two-point configuration space.
Vec3 unit_map(const Point3& x, const Point3& y);

// Normalized pullback of the unit-sphere area form by the direction map,
// evaluated on two tangent vectors of R^3 x R^3 (components: 3 for the motion
// of x, then 3 for the motion of y).  Equals det[u, d1, d2]/(4 pi r^2) with
// d_i = (y-part minus x-part of v_i); bilinear and antisymmetric.
double gauss_form_eval(const Point3& x, const Point3& y, const std::array<double, 6>& v1,
                       const std::array<double, 6>& v2);

constexpr int kMaxFormDim = 12;

// Dense antisymmetric coefficient matrix of a 2-form on a configuration
// domain, with its coordinate support recorded for wedge pruning.
struct TwoFormMatrix {
  int dim = 0;
  std::array<double, kMaxFormDim * kMaxFormDim> a{};
  std::array<int, kMaxFormDim> support{};
  int support_size = 0;

  void reset(int d) {
    dim = d;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a[i * kMaxFormDim + j] = 0.0;
    support_size = 0;
  }
  double at(int i, int j) const { return a[i * kMaxFormDim + j]; }
  void accumulate(int i, int j, double v) {
    a[i * kMaxFormDim + j] += v;
    a[j * kMaxFormDim + i] -= v;
  }
  void note_support(int i) {
    for (int k = 0; k < support_size; ++k)
      if (support[k] == i) return;
    support[support_size++] = i;
  }
  // bilinear evaluation on two coordinate-coefficient vectors
  double eval(const double* v, const double* w) const;
};

// Point configuration on a knot-based domain: n ordered points on the circle
// plus free points in R^3, with the reciprocal sampling density as weight.
struct Configuration {
  std::vector<double> s;  // knot parameters, cyclic order
  std::vector<Point3> y;  // free points
  double weight = 1.0;
};

// Positions/tangents evaluated once per configuration; coordinate layout:
// one slot per knot point (tangent direction gamma'(s_i)), then three slots
// per free point.
struct EvaluatedConfiguration {
  int n_knot = 0, n_free = 0;
  std::vector<Point3> pos;  // per vertex (knot points first)
  std::vector<Vec3> tan;    // per knot point
  int dim() const { return n_knot + 3 * n_free; }
};

EvaluatedConfiguration evaluate_configuration(const Configuration& cfg, const Curve& knot);

// Pulled-back edge form between vertices 'from' and 'to' (1-based labels,
// knot points first), as a coefficient matrix over the domain coordinates.
void edge_form_points(const EvaluatedConfiguration& ec, int from, int to, TwoFormMatrix& out);
TwoFormMatrix edge_form_on_configuration(const Configuration& cfg, const Curve& knot,
                                         const Edge& edge);

// Cyclic three-point sum: form(i->j) + form(j->k) + form(k->i).
TwoFormMatrix cyclic_sum_form(const Configuration& cfg, const Curve& knot, int i, int j, int k);

// Value of the top wedge of k 2-forms on the ordered standard basis of the
// 2k-dimensional domain.  Repeated identical inputs may be passed as repeated
// pointers; DimensionMismatch when dimensions disagree or D != 2k.
double wedge_top_evaluate(const std::vector<const TwoFormMatrix*>& forms);
double wedge_top_evaluate(const std::vector<TwoFormMatrix>& forms);

}  // namespace knotint
