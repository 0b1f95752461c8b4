// End-to-end acceptance runs: one pass/fail line per criterion, exit 1 on any
// failure.  Sample counts are fixed so every line is deterministic.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "knotint/invariants.hpp"
#include "knotint/rng.hpp"

using namespace knotint;
using Clock = std::chrono::steady_clock;

namespace {

struct Runner {
  int failed = 0;

  template <class F>
  void run(const char* name, double budget_s, F body) {
    auto t0 = Clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    std::printf("[%s] %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", name, secs,
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

std::string fmt_est(double v, double se) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.6g +- %.3g", v, se);
  return buf;
}

std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Vec3 rodrigues(const Vec3& p, const Vec3& axis, double ang) {
  Vec3 k = normalized(axis);
  return std::cos(ang) * p + std::sin(ang) * cross(k, p) +
         (1 - std::cos(ang)) * dot(k, p) * k;
}

Curve hopf_partner() {
  Curve c;
  c.repr = Curve::Repr::fourier;
  c.cx = {{1, 0}, {1, 0}};
  c.cy = {{0, 0}};
  c.cz = {{0, 0}, {0, 1}};
  return c;
}

// ---------------------------------------------------------------------------

bool crit_delta_squares_to_zero(std::string& detail) {
  size_t n_closed = 0, n_knot = 0;
  for (int n : {2, 4, 6}) {
    GraphList closed = enumerate_trivalent(n, Variant::closed);
    n_closed += closed.closed.size();
    for (const LabeledGraph& g : closed.closed)
      if (!delta(delta_term(g, Rational(1))).empty()) return false;
    GraphList knots = enumerate_trivalent(n, Variant::knot);
    n_knot += knots.knot.size();
    for (const KnotGraph& g : knots.knot)
      if (!delta(delta_term(g, Rational(1))).empty()) return false;
  }
  detail = std::to_string(n_closed) + " closed and " + std::to_string(n_knot) +
           " knot diagrams";
  return true;
}

bool crit_kernel_bases(std::string& detail) {
  std::vector<GraphSum> closed2 = cocycle_basis(2, Variant::closed, BasisFilter::connected);
  if (closed2.size() != 1 || closed2[0].terms.size() != 1) {
    detail = "two-vertex closed kernel dimension " + std::to_string(closed2.size());
    return false;
  }
  const GraphSum::Term& theta = closed2[0].terms.begin()->second;
  if (theta.closed.n_vertices != 2 || theta.closed.edges.size() != 3 ||
      theta.coeff != Rational(1)) {
    detail = "unexpected two-vertex generator";
    return false;
  }

  std::vector<GraphSum> knot4 = cocycle_basis(4, Variant::knot, BasisFilter::prime);
  if (knot4.size() != 1) {
    detail = "four-vertex prime knot kernel dimension " + std::to_string(knot4.size());
    return false;
  }
  KnotGraph x{4, 0, {{1, 3}, {2, 4}}};
  KnotGraph y{3, 1, {{1, 4}, {2, 4}, {3, 4}}};
  auto xt = knot4[0].terms.find(canonical_key(rotation_normal_form(x).rep));
  auto yt = knot4[0].terms.find(canonical_key(rotation_normal_form(y).rep));
  if (xt == knot4[0].terms.end() || yt == knot4[0].terms.end() ||
      xt->second.coeff != Rational(1) || yt->second.coeff != Rational(-4, 3)) {
    detail = "four-vertex generator coefficients differ from 1 and -4/3";
    return false;
  }
  detail = "crossed chords plus -4/3 tripod";
  return true;
}

bool crit_direction_form(std::string& detail) {
  Rng rng(424242);
  auto rand_pt = [&rng]() {
    return Point3{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
  };

  for (int i = 0; i < 200; ++i) {  // exact antisymmetry
    Point3 x = rand_pt(), y = rand_pt();
    if (norm(y - x) < 1e-3) continue;
    std::array<double, 6> v, w;
    for (double& t : v) t = 2 * rng.uniform() - 1;
    for (double& t : w) t = 2 * rng.uniform() - 1;
    if (gauss_form_eval(x, y, v, w) != -gauss_form_eval(x, y, w, v)) {
      detail = "antisymmetry violated";
      return false;
    }
  }

  double worst_closed = 0.0;  // d(omega) = 0 by extrapolated central differences
  for (int trial = 0; trial < 20; ++trial) {
    Point3 x = rand_pt(), y = rand_pt();
    if (norm(y - x) < 0.5) {
      --trial;
      continue;
    }
    std::array<std::array<double, 6>, 3> dirs;
    for (auto& d : dirs)
      for (double& t : d) t = 2 * rng.uniform() - 1;
    auto shifted = [&](int k, double t, int i, int j) {
      Point3 xx = x + t * Vec3{dirs[k][0], dirs[k][1], dirs[k][2]};
      Point3 yy = y + t * Vec3{dirs[k][3], dirs[k][4], dirs[k][5]};
      return gauss_form_eval(xx, yy, dirs[i], dirs[j]);
    };
    auto deriv = [&](int k, int i, int j) {
      double h = 5e-3;
      auto d = [&](double hh) {
        return (shifted(k, hh, i, j) - shifted(k, -hh, i, j)) / (2 * hh);
      };
      return (4.0 * d(h / 2) - d(h)) / 3.0;
    };
    double resid = deriv(0, 1, 2) - deriv(1, 0, 2) + deriv(2, 0, 1);
    worst_closed = std::max(worst_closed, std::abs(resid));
  }
  if (worst_closed >= 1e-6) {
    detail = "closedness residual " + fmt_num(worst_closed);
    return false;
  }

  double worst_flux = 0.0;  // unit integral over spheres enclosing the source
  for (double radius : {0.7, 1.9, 3.3}) {
    Point3 x{0.1, -0.2, 0.3};
    Point3 c = x + Vec3{0.1 * radius, -0.05 * radius, 0.12 * radius};
    int nth = 512, nphi = 256;
    double total = 0.0;
    for (int it = 0; it <= nth; ++it) {
      double th = kPi * it / nth;
      double st = std::sin(th), ct = std::cos(th);
      double wt = (it == 0 || it == nth) ? 1.0 / 3.0 : (it % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
      double row = 0.0;
      for (int ip = 0; ip < nphi; ++ip) {
        double phi = kTwoPi * ip / nphi;
        Point3 y = c + radius * Vec3{st * std::cos(phi), st * std::sin(phi), ct};
        std::array<double, 6> vth{0, 0, 0, radius * ct * std::cos(phi),
                                  radius * ct * std::sin(phi), -radius * st};
        std::array<double, 6> vph{0, 0, 0, -radius * st * std::sin(phi),
                                  radius * st * std::cos(phi), 0};
        row += gauss_form_eval(x, y, vth, vph);
      }
      total += wt * row;
    }
    total *= (kPi / nth) * (kTwoPi / nphi);
    worst_flux = std::max(worst_flux, std::abs(total - 1.0));
  }
  if (worst_flux >= 1e-6) {
    detail = "flux deviation " + fmt_num(worst_flux);
    return false;
  }

  double worst_rot = 0.0;  // invariance under a fixed rotation
  for (int trial = 0; trial < 50; ++trial) {
    Point3 x = rand_pt(), y = rand_pt();
    if (norm(y - x) < 0.3) {
      --trial;
      continue;
    }
    std::array<double, 6> v, w;
    for (double& t : v) t = 2 * rng.uniform() - 1;
    for (double& t : w) t = 2 * rng.uniform() - 1;
    double before = gauss_form_eval(x, y, v, w);
    Vec3 axis{0.3, -0.8, 0.51};
    double ang = 1.234;
    auto rot = [&](const Vec3& p) { return rodrigues(p, axis, ang); };
    Vec3 xv = rot({x.x, x.y, x.z}), yv = rot({y.x, y.y, y.z});
    Vec3 v1 = rot({v[0], v[1], v[2]}), v2 = rot({v[3], v[4], v[5]});
    Vec3 w1 = rot({w[0], w[1], w[2]}), w2 = rot({w[3], w[4], w[5]});
    double after = gauss_form_eval({xv.x, xv.y, xv.z}, {yv.x, yv.y, yv.z},
                                   {v1.x, v1.y, v1.z, v2.x, v2.y, v2.z},
                                   {w1.x, w1.y, w1.z, w2.x, w2.y, w2.z});
    worst_rot = std::max(worst_rot, std::abs(after - before));
  }
  if (worst_rot >= 1e-12) {
    detail = "rotation deviation " + fmt_num(worst_rot);
    return false;
  }

  detail = "closedness " + fmt_num(worst_closed) + ", flux " + fmt_num(worst_flux) +
           ", rotation " + fmt_num(worst_rot);
  return true;
}

bool crit_linking(std::string& detail) {
  Curve a = builtin_knot("unknot");
  Curve b = hopf_partner();
  double lk = linking_number(a, b);
  int oracle = crossing_linking(a, b, {0.2391, 0.6571, 0.7151});
  if (std::abs(std::abs(lk) - 1.0) > 1e-6 || std::abs(lk - oracle) > 1e-6) {
    detail = "hopf pair gave " + fmt_num(lk) + " vs oracle " + std::to_string(oracle);
    return false;
  }
  Curve far = translate_curve(b, {40, 0, 7});
  double lk_far = linking_number(a, far);
  if (std::abs(lk_far) > 1e-9) {
    detail = "distant circles gave " + fmt_num(lk_far);
    return false;
  }
  detail = "hopf " + fmt_num(lk) + " = oracle " + std::to_string(oracle) + ", distant " +
           fmt_num(lk_far);
  return true;
}

bool crit_self_linking(std::string& detail) {
  Estimate circle = self_linking(builtin_knot("unknot"));
  if (std::abs(circle.value) > 1e-8) {
    detail = "planar circle gave " + fmt_est(circle.value, circle.std_error);
    return false;
  }
  Curve tre = builtin_knot("trefoil");
  Estimate sl = self_linking(tre);
  DirectionAverage w = writhe_oracle(tre, 10000, 271828);
  double dev = std::abs(sl.value - w.mean);
  if (dev > 3.0 * w.std_error) {
    detail = "integral " + fmt_est(sl.value, sl.std_error) + " vs crossing average " +
             fmt_est(w.mean, w.std_error);
    return false;
  }
  detail = "integral " + fmt_est(sl.value, sl.std_error) + ", crossing average over 10000 " +
           "directions " + fmt_est(w.mean, w.std_error);
  return true;
}

bool crit_collapse_residual(std::string& detail) {
  struct Pair {
    const char* tag;
    Point3 xj, xk;
    uint64_t seed;
  };
  Vec3 r = rodrigues({1, 0, 0}, {1, 2, 3}, 0.9);
  std::vector<Pair> pairs = {{"base", {0, 0, 0}, {1, 0, 0}, 5150},
                             {"rotated", {0, 0, 0}, {r.x, r.y, r.z}, 5151}};
  double worst_sigma = 0.0, worst_se = 0.0;
  for (const Pair& p : pairs) {
    std::vector<ResidualComponent> comps =
        kontsevich_residual(p.xj, p.xk, 20000000, p.seed, 1);
    for (const ResidualComponent& c : comps) {
      if (c.std_error > 5e-4) {
        detail = std::string(p.tag) + " " + c.name + " error " + fmt_num(c.std_error);
        return false;
      }
      if (std::abs(c.value) > 3.0 * c.std_error + 1e-15) {
        detail = std::string(p.tag) + " " + c.name + " = " + fmt_est(c.value, c.std_error);
        return false;
      }
      if (c.std_error > 1e-18)  // skip the exactly-vanishing axis components
        worst_sigma = std::max(worst_sigma, std::abs(c.value) / c.std_error);
      worst_se = std::max(worst_se, c.std_error);
    }
  }
  detail = "12 components, worst " + fmt_num(worst_sigma) + " sigma, worst error " +
           fmt_num(worst_se);
  return true;
}

bool crit_calibrated_invariant(std::string& detail) {
  Curve unk = builtin_knot("unknot");
  Curve tre = builtin_knot("trefoil");
  Curve fig = builtin_knot("figure8");
  Vec3 dir{0.2391, 0.6571, 0.7151};
  int v2_unk = pv_v2(project_gauss_code(unk, dir));
  int v2_tre = pv_v2(project_gauss_code(tre, dir));
  int v2_fig = pv_v2(project_gauss_code(fig, dir));
  if (v2_unk != 0 || v2_tre != 1 || v2_fig != -1) {
    detail = "projection oracle gave " + std::to_string(v2_unk) + "," +
             std::to_string(v2_tre) + "," + std::to_string(v2_fig);
    return false;
  }

  uint64_t n = 10000000;
  CocycleSpec spec = make_cocycle(2);
  calibrate_cocycle(spec, tre, 1.0, n, 2718, 1);
  InvariantResult rt = i_gamma(tre, spec, n, 2718, 1);
  InvariantResult ru = i_gamma(unk, spec, n, 2719, 1);
  InvariantResult rf = i_gamma(fig, spec, n, 2720, 1);
  detail = "trefoil " + fmt_est(rt.value, rt.std_error) + ", circle " +
           fmt_est(ru.value, ru.std_error) + ", figure-eight " +
           fmt_est(rf.value, rf.std_error);
  if (std::abs(rt.value - 1.0) > 1e-9) return false;
  if (std::abs(ru.value) > 0.05) return false;
  if (std::abs(rf.value + 1.0) > 0.1) return false;
  if (std::llround(rt.value) != v2_tre || std::llround(ru.value) != v2_unk ||
      std::llround(rf.value) != v2_fig)
    return false;
  return true;
}

bool crit_isotopy_stability(std::string& detail) {
  Curve tre = builtin_knot("trefoil");
  CocycleSpec spec = make_cocycle(2);
  uint64_t n = 200000;
  InvariantResult base = a_gamma(tre, spec, n, 61, 1);

  std::vector<std::pair<std::string, Curve>> variants;
  for (uint64_t s = 1; s <= 5; ++s)
    variants.emplace_back("wiggle seed " + std::to_string(s), perturb_isotopy(tre, 0.03, s));
  for (auto [a, b] : {std::pair<double, double>{0.3, 0.7}, {0.5, 1.9}, {0.7, 4.0}})
    variants.emplace_back("reparam " + std::to_string(a) + "," + std::to_string(b),
                          reparametrize_curve(tre, a, b));

  double worst = 0.0;
  for (const auto& [tag, curve] : variants) {
    InvariantResult r = a_gamma(curve, spec, n, 61, 1);
    double band = 3.0 * std::sqrt(r.std_error * r.std_error +
                                  base.std_error * base.std_error);
    double dev = std::abs(r.value - base.value);
    if (dev > band) {
      detail = tag + " drifted to " + fmt_est(r.value, r.std_error) + " from " +
               fmt_est(base.value, base.std_error);
      return false;
    }
    worst = std::max(worst, dev / band * 3.0);
  }
  detail = "8 variants within " + fmt_num(worst) + " sigma of " +
           fmt_est(base.value, base.std_error);
  return true;
}

bool crit_vacuum_integral(std::string& detail) {
  LabeledGraph theta{2, {{1, 2}, {1, 2}, {1, 2}}};
  ParityCheckResult parity = b_gamma_parity_check(theta, 1000, 5252);
  if (parity.n_checked != 1000 || parity.n_failed != 0) {
    detail = "parity failures " + std::to_string(parity.n_failed) + ", max deviation " +
             fmt_num(parity.max_deviation);
    return false;
  }
  Estimate est = b_gamma_estimate(theta, 1000000, 5252, 1);
  if (est.std_error > 1e-3 || std::abs(est.value) > 3.0 * est.std_error + 1e-12) {
    detail = "estimate " + fmt_est(est.value, est.std_error);
    return false;
  }
  detail = "estimate " + fmt_est(est.value, est.std_error) + ", 1000 parity configurations";
  return true;
}

bool crit_quadrature_vs_sampling(std::string& detail) {
  struct Case {
    const char* knot;
    KnotGraph graph;
    int mesh;
    uint64_t seed;
  };
  KnotGraph chord{2, 0, {{1, 2}}};
  KnotGraph x{4, 0, {{1, 3}, {2, 4}}};
  std::vector<Case> cases = {
      {"unknot", chord, 1024, 73},  {"unknot", x, 2048, 74},
      {"trefoil", chord, 1024, 75}, {"trefoil", x, 2048, 76},
      {"figure8", chord, 1024, 77}, {"figure8", x, 2048, 78},
  };
  double worst = 0.0;
  for (const Case& cs : cases) {
    Curve c = builtin_knot(cs.knot);
    Estimate q = chord_quadrature(c, cs.graph, cs.mesh);
    Estimate m = mc_estimate(c, cs.graph, 1000000, cs.seed, 1);
    double band = 3.0 * std::sqrt(q.std_error * q.std_error + m.std_error * m.std_error);
    double dev = std::abs(q.value - m.value);
    if (dev > band + 1e-12) {
      detail = std::string(cs.knot) + " with " + std::to_string(cs.graph.n_ext) +
               " legs: grid " + fmt_est(q.value, q.std_error) + " vs sampled " +
               fmt_est(m.value, m.std_error);
      return false;
    }
    if (band > 0) worst = std::max(worst, dev / band * 3.0);
  }
  detail = "6 comparisons within " + fmt_num(worst) + " sigma";
  return true;
}

}  // namespace

int main() {
  Runner r;
  r.run("coboundary squares to zero on every enumerated diagram", 60,
        crit_delta_squares_to_zero);
  r.run("kernel bases have the expected dimension and coefficients", 0, crit_kernel_bases);
  r.run("direction form is antisymmetric, closed, normalized, rotation invariant", 0,
        crit_direction_form);
  r.run("linking integral matches the signed crossing oracle", 10, crit_linking);
  r.run("self-linking integral matches direction-averaged crossing counts", 60,
        crit_self_linking);
  r.run("collapsing-pair fiber components vanish within tight errors", 300,
        crit_collapse_residual);
  r.run("calibrated degree-2 invariant reproduces the combinatorial values", 900,
        crit_calibrated_invariant);
  r.run("invariant is stable under isotopy and reparametrization", 0, crit_isotopy_stability);
  r.run("vacuum integral of the triple-edge graph vanishes", 600, crit_vacuum_integral);
  r.run("grid quadrature and importance sampling agree on chord diagrams", 0,
        crit_quadrature_vs_sampling);
  std::printf("%d/10 criteria passed\n", 10 - r.failed);
  return r.failed == 0 ? 0 : 1;
}
