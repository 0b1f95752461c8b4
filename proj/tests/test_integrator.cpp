#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "knotint/config_integrator.hpp"
#include "knotint/gauss_forms.hpp"
#include "knotint/rng.hpp"

using namespace knotint;

namespace {

const KnotGraph kX{4, 0, {{1, 3}, {2, 4}}};
const KnotGraph kY{3, 1, {{1, 4}, {2, 4}, {3, 4}}};
const KnotGraph kChord{2, 0, {{1, 2}}};
const LabeledGraph kTheta{2, {{1, 2}, {1, 2}, {1, 2}}};

// the symmetric two-point kernel of the writhe integrand
double kernel_K(const Point3& pi, const Point3& pj, const Vec3& ti, const Vec3& tj) {
  Vec3 d = pi - pj;
  double r = norm(d);
  return det3(ti, tj, d) / (4.0 * kPi * r * r * r);
}

// combinatorial matching sign of a chord diagram, via the wedge of indicator
// forms on the loop-point coordinates
double matching_sign(const KnotGraph& g) {
  std::vector<TwoFormMatrix> ind(g.internal_edges.size());
  for (size_t k = 0; k < g.internal_edges.size(); ++k) {
    ind[k].reset(g.n_ext);
    ind[k].accumulate(g.internal_edges[k].a - 1, g.internal_edges[k].b - 1, 1.0);
    ind[k].note_support(g.internal_edges[k].a - 1);
    ind[k].note_support(g.internal_edges[k].b - 1);
  }
  return wedge_top_evaluate(ind);
}

// naive reference quadrature pass: ordered grid tuples times label rotations
double brute_pass(const Curve& c, const KnotGraph& g, int N) {
  int n = g.n_ext;
  std::vector<Point3> pos(N);
  std::vector<Vec3> tan(N);
  for (int i = 0; i < N; ++i) {
    CurveSample cs = eval_curve(c, kTwoPi * i / N);
    pos[i] = cs.position;
    tan[i] = cs.tangent;
  }
  auto K = [&](int i, int j) { return kernel_K(pos[i], pos[j], tan[i], tan[j]); };
  double h = kTwoPi / N;
  double total = 0.0;
  if (n == 2) {
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) total += 2.0 * K(i, j);
  } else {
    for (int t0 = 0; t0 < N; ++t0)
      for (int t1 = t0 + 1; t1 < N; ++t1)
        for (int t2 = t1 + 1; t2 < N; ++t2)
          for (int t3 = t2 + 1; t3 < N; ++t3) {
            int ts[4] = {t0, t1, t2, t3};
            for (int r = 0; r < n; ++r) {
              double prod = 1.0;
              for (const Edge& e : g.internal_edges) {
                int sa = (e.a - 1 + r) % n, sb = (e.b - 1 + r) % n;
                prod *= K(ts[sa], ts[sb]);
              }
              total += prod;
            }
          }
  }
  return matching_sign(g) * total * std::pow(h, n);
}

}  // namespace

TEST_CASE("knot-parameter draws carry the ordered-cyclic measure") {
  Curve unk = builtin_knot("unknot");
  KnotSampler s = make_sampler(unk, 3, 0);
  int n_draws = 40000, in_half = 0, total_pts = 0;
  for (int i = 0; i < n_draws; ++i) {
    Rng rng = sample_stream(1001, i);
    DrawResult d = sample_configuration(s, rng);
    REQUIRE(d.ok);
    CHECK(d.cfg.s.size() == 3);
    CHECK(d.cfg.y.empty());
    // reciprocal density of n cyclically ordered points is (2 pi)^n / (n-1)!
    CHECK(d.cfg.weight == doctest::Approx(std::pow(kTwoPi, 3) / 2.0).epsilon(1e-13));
    int descents = 0;
    for (int k = 0; k < 3; ++k) {
      CHECK(d.cfg.s[k] >= 0.0);
      CHECK(d.cfg.s[k] < kTwoPi);
      if (d.cfg.s[(k + 1) % 3] < d.cfg.s[k]) ++descents;
      ++total_pts;
      if (d.cfg.s[k] < kPi) ++in_half;
    }
    CHECK(descents <= 1);  // cyclic rotation of a sorted tuple
  }
  // marginally each point is uniform on the circle
  double frac = static_cast<double>(in_half) / total_pts;
  CHECK(std::abs(frac - 0.5) < 0.01);
}

TEST_CASE("free-point draws integrate test functions over space") {
  Curve unk = builtin_knot("unknot");
  KnotSampler s = make_sampler(unk, 0, 1);
  double sum_b = 0, sq_b = 0, sum_g = 0, sq_g = 0;
  int n = 60000;
  for (int i = 0; i < n; ++i) {
    Rng rng = sample_stream(31337, i);
    DrawResult d = sample_configuration(s, rng);
    REQUIRE(d.ok);
    double r2 = norm2(d.cfg.y[0]);
    double fb = d.cfg.weight * (r2 <= 2.25 ? 1.0 : 0.0);
    double fg = d.cfg.weight * std::exp(-r2);
    sum_b += fb;
    sq_b += fb * fb;
    sum_g += fg;
    sq_g += fg * fg;
  }
  double mb = sum_b / n, se_b = std::sqrt((sq_b - sum_b * sum_b / n) / (n - 1.0) / n);
  double mg = sum_g / n, se_g = std::sqrt((sq_g - sum_g * sum_g / n) / (n - 1.0) / n);
  CHECK(std::abs(mb - 4.5 * kPi) <= 5.0 * se_b);             // ball volume
  CHECK(std::abs(mg - std::pow(kPi, 1.5)) <= 5.0 * se_g);    // gaussian, tails included
  CHECK(se_b < 0.3);
  CHECK(se_g < 0.1);
}

TEST_CASE("sampler rejects near-coincident configurations") {
  Curve unk = builtin_knot("unknot");
  // cutoff above the curve diameter: every two knot points clash
  KnotSampler s = make_sampler(unk, 2, 0, 5.0);
  Rng rng = sample_stream(7, 0);
  DrawResult d = sample_configuration(s, rng);
  CHECK_FALSE(d.ok);
  CHECK(d.rejects >= 100);

  CHECK_THROWS_AS(make_sampler(unk, 13, 0), SizeLimit);
  CHECK_THROWS_AS(make_sampler(unk, 0, 5), SizeLimit);
}

TEST_CASE("blocked estimator is deterministic and worker-independent") {
  SampleKernel kernel = [](uint64_t, Rng& rng, double* vals) -> int {
    vals[0] = rng.uniform();
    vals[1] = rng.normal();
    return 1;  // one synthetic rejection per sample
  };
  MultiEstimate a = run_blocked_mc(8193, 77, 1, 2, kernel);
  MultiEstimate b = run_blocked_mc(8193, 77, 3, 2, kernel);
  CHECK(a.value[0] == b.value[0]);
  CHECK(a.value[1] == b.value[1]);
  CHECK(a.std_error[0] == b.std_error[0]);
  CHECK(a.std_error[1] == b.std_error[1]);
  CHECK(a.n_samples == 8193);
  CHECK(a.seed == 77);
  CHECK(a.rejection_rate == 0.5);  // rejects/(samples+rejects)
  CHECK(std::abs(a.value[0] - 0.5) <= 5.0 * a.std_error[0]);
  CHECK(std::abs(a.value[1]) <= 5.0 * a.std_error[1]);

  CHECK_THROWS_AS(run_blocked_mc(0, 1, 1, 1, kernel), DimensionMismatch);
  CHECK_THROWS_AS(run_blocked_mc(10, 1, 1, 0, kernel), DimensionMismatch);
}

TEST_CASE("graph integrand factorizes into two-point kernels") {
  Curve tre = builtin_knot("trefoil");
  KnotSampler s4 = make_sampler(tre, 4, 0);
  KnotSampler s2 = make_sampler(tre, 2, 0);
  for (int i = 0; i < 50; ++i) {
    Rng rng = sample_stream(2024, i);
    DrawResult d = sample_configuration(s4, rng);
    REQUIRE(d.ok);
    EvaluatedConfiguration ec = evaluate_configuration(d.cfg, tre);
    CHECK(ec.n_knot == 4);
    CHECK(ec.n_free == 0);
    CHECK(ec.dim() == 4);
    double k13 = kernel_K(ec.pos[0], ec.pos[2], ec.tan[0], ec.tan[2]);
    double k24 = kernel_K(ec.pos[1], ec.pos[3], ec.tan[1], ec.tan[3]);
    double val = graph_integrand(ec, kX);
    CHECK(val == doctest::Approx(-k13 * k24).epsilon(1e-12));

    Rng rng2 = sample_stream(4048, i);
    DrawResult d2 = sample_configuration(s2, rng2);
    REQUIRE(d2.ok);
    EvaluatedConfiguration ec2 = evaluate_configuration(d2.cfg, tre);
    double k12 = kernel_K(ec2.pos[0], ec2.pos[1], ec2.tan[0], ec2.tan[1]);
    CHECK(graph_integrand(ec2, kChord) == doctest::Approx(k12).epsilon(1e-12));

    // wrong graph for this configuration
    CHECK_THROWS_AS(graph_integrand(ec, kChord), DimensionMismatch);
    CHECK_THROWS_AS(graph_integrand(ec, KnotGraph{4, 0, {{1, 3}}}), DegreeMismatch);
  }
}

TEST_CASE("planar curves annihilate every volume-kernel integrand") {
  Curve unk = builtin_knot("unknot");
  Estimate m = mc_estimate(unk, kX, 50000, 5, 3);
  CHECK(m.value == 0.0);
  CHECK(m.std_error == 0.0);
  Estimate q = chord_quadrature(unk, kX, 256);
  CHECK(q.value == 0.0);
  CHECK(q.std_error == 0.0);
  CHECK(chord_quadrature(unk, kChord, 256).value == 0.0);
}

TEST_CASE("monte-carlo estimates are reproducible across worker counts") {
  Curve tre = builtin_knot("trefoil");
  Estimate a = mc_estimate(tre, kX, 30000, 11, 1);
  Estimate b = mc_estimate(tre, kX, 30000, 11, 3);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(a.rejection_rate == b.rejection_rate);
  CHECK(a.n_samples == 30000);
  CHECK(a.seed == 11);

  Estimate ya = mc_estimate(tre, kY, 20000, 9, 1);
  Estimate yb = mc_estimate(tre, kY, 20000, 9, 3);
  CHECK(ya.value == yb.value);
  CHECK(ya.std_error == yb.std_error);
  CHECK(std::isfinite(ya.value));
  CHECK(ya.std_error > 0.0);
}

TEST_CASE("standard errors shrink like the square root of the sample count") {
  Curve tre = builtin_knot("trefoil");
  Estimate small = mc_estimate(tre, kX, 20000, 5, 3);
  Estimate large = mc_estimate(tre, kX, 80000, 5, 3);
  CHECK(small.std_error > 0.0);
  CHECK(large.std_error > 0.0);
  double ratio = small.std_error / large.std_error;
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.7);
}

TEST_CASE("clash cutoff variations stay within statistics") {
  Curve tre = builtin_knot("trefoil");
  Estimate c3 = mc_estimate(tre, kX, 60000, 21, 3, 1e-3);
  Estimate c9 = mc_estimate(tre, kX, 60000, 22, 3, 1e-9);
  CHECK(c3.rejection_rate < 0.01);
  CHECK(c9.rejection_rate < 1e-4);
  double combined = std::sqrt(c3.std_error * c3.std_error + c9.std_error * c9.std_error);
  CHECK(std::abs(c3.value - c9.value) <= 3.0 * combined);
}

TEST_CASE("chord quadrature matches a naive tuple sum with one refinement step") {
  Curve tre = builtin_knot("trefoil");
  CHECK(matching_sign(kX) == -1.0);
  CHECK(matching_sign(kChord) == 1.0);
  CHECK(matching_sign(KnotGraph{4, 0, {{1, 2}, {3, 4}}}) == 1.0);

  // four loop points
  double b8 = brute_pass(tre, kX, 8), b16 = brute_pass(tre, kX, 16);
  Estimate q16 = chord_quadrature(tre, kX, 16);
  CHECK(q16.value == doctest::Approx(2.0 * b16 - b8).epsilon(1e-12));
  CHECK(q16.std_error == doctest::Approx(std::abs(b16 - b8)).epsilon(1e-12));
  CHECK(q16.n_samples == 1820 * 4);  // C(16,4) tuples, 4 rotations

  // two loop points
  double c16 = brute_pass(tre, kChord, 16), c32 = brute_pass(tre, kChord, 32);
  Estimate q32 = chord_quadrature(tre, kChord, 32);
  CHECK(q32.value == doctest::Approx(2.0 * c32 - c16).epsilon(1e-12));
  CHECK(q32.std_error == doctest::Approx(std::abs(c32 - c16)).epsilon(1e-12));

  CHECK_THROWS_AS(chord_quadrature(tre, kY, 64), NotChordDiagram);
  CHECK_THROWS_AS(chord_quadrature(tre, KnotGraph{4, 0, {{1, 2}, {1, 3}}}, 64),
                  NotChordDiagram);
  CHECK_THROWS_AS(chord_quadrature(tre, KnotGraph{6, 0, {{1, 4}, {2, 5}, {3, 6}}}, 64),
                  SizeLimit);
  CHECK_THROWS_AS(chord_quadrature(tre, KnotGraph{2, 0, {{1, 5}}}, 64), InvalidEdge);
}

TEST_CASE("quadrature and monte-carlo agree on chord diagrams") {
  Curve tre = builtin_knot("trefoil");
  Estimate qx = chord_quadrature(tre, kX, 512);
  Estimate mx = mc_estimate(tre, kX, 200000, 5, 3);
  double cx = std::sqrt(qx.std_error * qx.std_error + mx.std_error * mx.std_error);
  CHECK(std::abs(qx.value - mx.value) <= 3.0 * cx);

  Estimate qc = chord_quadrature(tre, kChord, 512);
  Estimate mcub = mc_estimate(tre, kChord, 100000, 5, 3);
  double cc = std::sqrt(qc.std_error * qc.std_error + mcub.std_error * mcub.std_error);
  CHECK(std::abs(qc.value - mcub.value) <= 4.0 * cc);

  // halving the mesh moves the refined value by at most the error bounds
  Estimate q256 = chord_quadrature(tre, kX, 256);
  CHECK(std::abs(q256.value - qx.value) <= 2.0 * (q256.std_error + qx.std_error));
}

TEST_CASE("collapsing-point fiber components vanish within statistics") {
  auto res = kontsevich_residual({0, 0, 0}, {1, 0, 0}, 200000, 99, 3);
  REQUIRE(res.size() == 6);
  CHECK(res[0].name == "dxj_x");
  CHECK(res[3].name == "dxk_x");
  for (const ResidualComponent& r : res) {
    CHECK(std::abs(r.value) <= 5.0 * r.std_error + 1e-15);
    CHECK(r.std_error < 1e-2);
  }
  // components along the separation axis cancel to rounding
  CHECK(std::abs(res[0].value) < 1e-15);
  CHECK(std::abs(res[3].value) < 1e-15);
  // translating both ends in the same base direction leaves the fiber
  // integrand unchanged, so paired components are exact negatives
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(res[c].value + res[c + 3].value) <=
          1e-12 * (std::abs(res[c].value) + 1e-12));

  // worker invariance
  auto res1 = kontsevich_residual({0, 0, 0}, {1, 0, 0}, 50000, 99, 1);
  auto res3 = kontsevich_residual({0, 0, 0}, {1, 0, 0}, 50000, 99, 3);
  for (int v = 0; v < 6; ++v) {
    CHECK(res1[v].value == res3[v].value);
    CHECK(res1[v].std_error == res3[v].std_error);
  }

  CHECK_THROWS_AS(kontsevich_residual({1, 2, 3}, {1, 2, 3}, 100, 1, 1), CoincidentPoints);
}

TEST_CASE("vacuum slice integral of the two-vertex graph vanishes") {
  Estimate a = b_gamma_estimate(kTheta, 100000, 7, 3);
  CHECK(std::abs(a.value) <= 5.0 * a.std_error + 1e-12);
  CHECK(a.std_error < 1e-6);
  CHECK(a.rejection_rate < 1e-3);

  Estimate b1 = b_gamma_estimate(kTheta, 40000, 7, 1);
  Estimate b3 = b_gamma_estimate(kTheta, 40000, 7, 3);
  CHECK(b1.value == b3.value);
  CHECK(b1.std_error == b3.std_error);

  CHECK_THROWS_AS(b_gamma_estimate(LabeledGraph{2, {{1, 2}}}, 100, 1, 1), NotTrivalent);
  // four-vertex graphs exceed the top-wedge dimension limit
  LabeledGraph k4{4, {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};
  CHECK_THROWS_AS(b_gamma_estimate(k4, 100, 1, 1), SizeLimit);
}

TEST_CASE("slice integrand is exactly antipode-symmetric") {
  ParityCheckResult p = b_gamma_parity_check(kTheta, 200, 11);
  CHECK(p.n_checked == 200);
  CHECK(p.n_failed == 0);
  CHECK(p.max_deviation == 0.0);
}

TEST_CASE("convergence tables run honest prefixes") {
  std::vector<uint64_t> seen;
  auto runner = [&seen](uint64_t n) -> Estimate {
    seen.push_back(n);
    Estimate e;
    e.value = static_cast<double>(n);
    e.std_error = 1.0 / std::sqrt(static_cast<double>(n));
    e.n_samples = n;
    return e;
  };
  std::vector<ConvergenceRow> rows = convergence_table(runner, 64000);
  REQUIRE(rows.size() == 4);
  CHECK(seen == std::vector<uint64_t>{1000, 4000, 16000, 64000});
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].n_samples == seen[i]);
    CHECK(rows[i].value == static_cast<double>(seen[i]));
    CHECK(rows[i].wall_time_ms >= 0.0);
  }
  // tiny sample counts collapse to a single row
  seen.clear();
  std::vector<ConvergenceRow> one = convergence_table(runner, 1);
  CHECK(one.size() == 1);
  CHECK(one[0].n_samples == 1);
}

TEST_CASE("degree and edge validation on integrator inputs") {
  Curve tre = builtin_knot("trefoil");
  CHECK_THROWS_AS(mc_estimate(tre, KnotGraph{4, 0, {{1, 3}}}, 100, 1, 1), DegreeMismatch);
  CHECK_THROWS_AS(mc_estimate(tre, KnotGraph{2, 0, {{1, 5}}}, 100, 1, 1), InvalidEdge);
}
