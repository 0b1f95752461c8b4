#include "knotint/gauss_forms.hpp"

#include <cmath>

namespace knotint {

Vec3 unit_map(const Point3& x, const Point3& y) {
  Vec3 d = y - x;
  double r = norm(d);
  if (r == 0.0) throw CoincidentPoints("unit_map at coincident points");
  return {d.x / r, d.y / r, d.z / r};
}

double gauss_form_eval(const Point3& x, const Point3& y, const std::array<double, 6>& v1,
                       const std::array<double, 6>& v2) {
  Vec3 d = y - x;
  double r2 = norm2(d);
  if (r2 == 0.0) throw CoincidentPoints("gauss_form_eval at coincident points");
  double r = std::sqrt(r2);
  Vec3 u{d.x / r, d.y / r, d.z / r};
  Vec3 d1{v1[3] - v1[0], v1[4] - v1[1], v1[5] - v1[2]};
  Vec3 d2{v2[3] - v2[0], v2[4] - v2[1], v2[5] - v2[2]};
  // det[u, P d1 / r, P d2 / r] = det[u, d1, d2] / r^2 with P = I - u u^T
  return det3(u, d1, d2) / (4.0 * kPi * r2);
}

double TwoFormMatrix::eval(const double* v, const double* w) const {
  double total = 0.0;
  for (int ii = 0; ii < support_size; ++ii) {
    int i = support[ii];
    if (v[i] == 0.0 && w[i] == 0.0) continue;
    for (int jj = 0; jj < support_size; ++jj) {
      int j = support[jj];
      total += at(i, j) * v[i] * w[j];
    }
  }
  return total;
}

EvaluatedConfiguration evaluate_configuration(const Configuration& cfg, const Curve& knot) {
  EvaluatedConfiguration ec;
  ec.n_knot = static_cast<int>(cfg.s.size());
  ec.n_free = static_cast<int>(cfg.y.size());
  ec.pos.reserve(ec.n_knot + ec.n_free);
  ec.tan.reserve(ec.n_knot);
  for (double s : cfg.s) {
    CurveSample cs = eval_curve(knot, s);
    ec.pos.push_back(cs.position);
    ec.tan.push_back(cs.tangent);
  }
  for (const Point3& p : cfg.y) ec.pos.push_back(p);
  return ec;
}

namespace {

// coordinate slots of a vertex: [first, first+count)
inline void vertex_slots(const EvaluatedConfiguration& ec, int v, int& first, int& count) {
  if (v <= ec.n_knot) {
    first = v - 1;
    count = 1;
  } else {
    first = ec.n_knot + 3 * (v - ec.n_knot - 1);
    count = 3;
  }
}

inline Vec3 slot_direction(const EvaluatedConfiguration& ec, int v, int k) {
  if (v <= ec.n_knot) return ec.tan[v - 1];
  return k == 0 ? Vec3{1, 0, 0} : (k == 1 ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
}

}  // namespace

void edge_form_points(const EvaluatedConfiguration& ec, int from, int to, TwoFormMatrix& out) {
  const Point3& xf = ec.pos[from - 1];
  const Point3& xt = ec.pos[to - 1];
  Vec3 d = xt - xf;
  double r2 = norm2(d);
  if (r2 == 0.0) throw CoincidentPoints("edge form at coincident points");
  double r = std::sqrt(r2);
  Vec3 u{d.x / r, d.y / r, d.z / r};
  double scale = 1.0 / (4.0 * kPi * r2);

  int ff, fc, tf, tc;
  vertex_slots(ec, from, ff, fc);
  vertex_slots(ec, to, tf, tc);

  // entry(p, q) = det[u, D(p), D(q)] * scale with D = +direction on the 'to'
  // vertex and -direction on the 'from' vertex
  struct Slot {
    int coord;
    Vec3 dir;
  };
  Slot slots[6];
  int ns = 0;
  for (int k = 0; k < fc; ++k) slots[ns++] = {ff + k, -slot_direction(ec, from, k)};
  for (int k = 0; k < tc; ++k) slots[ns++] = {tf + k, slot_direction(ec, to, k)};
  for (int i = 0; i < ns; ++i) out.note_support(slots[i].coord);
  for (int i = 0; i < ns; ++i)
    for (int j = i + 1; j < ns; ++j) {
      double v = det3(u, slots[i].dir, slots[j].dir) * scale;
      if (v != 0.0) out.accumulate(slots[i].coord, slots[j].coord, v);
    }
}

TwoFormMatrix edge_form_on_configuration(const Configuration& cfg, const Curve& knot,
                                         const Edge& edge) {
  EvaluatedConfiguration ec = evaluate_configuration(cfg, knot);
  TwoFormMatrix m;
  m.reset(ec.dim());
  edge_form_points(ec, edge.a, edge.b, m);
  return m;
}

TwoFormMatrix cyclic_sum_form(const Configuration& cfg, const Curve& knot, int i, int j, int k) {
  EvaluatedConfiguration ec = evaluate_configuration(cfg, knot);
  TwoFormMatrix m;
  m.reset(ec.dim());
  edge_form_points(ec, i, j, m);
  edge_form_points(ec, j, k, m);
  edge_form_points(ec, k, i, m);
  return m;
}

namespace {

struct WedgeGroup {
  const TwoFormMatrix* form;
  int remaining;
};

double wedge_rec(std::vector<WedgeGroup>& groups, uint32_t used, int dim) {
  int s = -1;
  for (int i = 0; i < dim; ++i)
    if (!(used & (1u << i))) {
      s = i;
      break;
    }
  if (s < 0) return 1.0;
  uint32_t used_s = used | (1u << s);
  double total = 0.0;
  for (WedgeGroup& g : groups) {
    if (g.remaining == 0) continue;
    double mult = static_cast<double>(g.remaining);
    g.remaining--;
    int skipped = 0;  // remaining coords strictly between s and q
    for (int q = s + 1; q < dim; ++q) {
      if (used_s & (1u << q)) continue;
      double v = g.form->at(s, q);
      if (v != 0.0) {
        double sign = (skipped % 2 == 0) ? 1.0 : -1.0;
        total += mult * sign * v * wedge_rec(groups, used_s | (1u << q), dim);
      }
      ++skipped;
    }
    g.remaining++;
  }
  return total;
}

}  // namespace

double wedge_top_evaluate(const std::vector<const TwoFormMatrix*>& forms) {
  if (forms.empty()) return 1.0;
  int dim = forms[0]->dim;
  if (dim != 2 * static_cast<int>(forms.size()))
    throw DimensionMismatch("wedge needs dimension 2k, got " + std::to_string(dim) + " for k=" +
                            std::to_string(forms.size()));
  std::vector<WedgeGroup> groups;
  for (const TwoFormMatrix* f : forms) {
    if (f->dim != dim) throw DimensionMismatch("wedge factors disagree on dimension");
    bool merged = false;
    for (WedgeGroup& g : groups)
      if (g.form == f) {
        g.remaining++;
        merged = true;
        break;
      }
    if (!merged) groups.push_back({f, 1});
  }
  return wedge_rec(groups, 0, dim);
}

double wedge_top_evaluate(const std::vector<TwoFormMatrix>& forms) {
  std::vector<const TwoFormMatrix*> ptrs;
  ptrs.reserve(forms.size());
  for (const TwoFormMatrix& f : forms) ptrs.push_back(&f);
  return wedge_top_evaluate(ptrs);
}

}  // namespace knotint
