#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knotint/config.hpp"
#include "knotint/config_integrator.hpp"
#include "knotint/diagram_algebra.hpp"
#include "knotint/errors.hpp"
#include "knotint/invariants.hpp"
#include "knotint/knot_model.hpp"
#include "knotint/report.hpp"

namespace {

using knotint::Config;
using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void add_common_options(CLI::App* sub, Config& cfg) {
  sub->add_option("--seed", cfg.seed, "deterministic base seed");
  sub->add_option("--workers", cfg.workers, "Monte Carlo worker threads");
  sub->add_option("--samples", cfg.samples, "Monte Carlo samples per term");
  sub->add_option("--rejection-cutoff", cfg.rejection_cutoff,
                  "minimum pairwise point separation");
  sub->add_option("--out-dir", cfg.out_dir, "output directory");
  sub->add_option("--tol-scale", cfg.tol_scale, "scale factor for check tolerances");
}

// deliberately excludes out_dir so the result document does not depend on
// where it is written
ordered_json config_echo(const Config& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["samples"] = cfg.samples;
  j["rejection_cutoff"] = cfg.rejection_cutoff;
  return j;
}

ordered_json spec_json(const knotint::CocycleSpec& spec) {
  return ordered_json::parse(knotint::cocycle_to_json_text(spec));
}

ordered_json terms_json(const knotint::InvariantResult& r) {
  ordered_json terms = ordered_json::array();
  for (const knotint::TermEstimate& t : r.terms) {
    ordered_json tj;
    tj["key"] = t.key;
    tj["coeff"] = knotint::format_rational(t.coeff);
    tj["method"] = t.method;
    tj["value"] = t.estimate.value;
    tj["std_error"] = t.estimate.std_error;
    tj["n_samples"] = t.estimate.n_samples;
    terms.push_back(tj);
  }
  return terms;
}

knotint::CocycleSpec resolve_cocycle(const std::string& path, int order) {
  if (!path.empty()) return knotint::load_cocycle(path);
  return knotint::make_cocycle(order);
}

struct CheckReporter {
  int failed = 0;
  void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << (detail.empty() ? "" : ": " + detail)
              << "\n";
    if (!ok) ++failed;
  }
};

// ---------------------------------------------------------------------------
// check implementations

void check_delta(CheckReporter& rep) {
  using namespace knotint;
  for (int n : {2, 4, 6}) {
    GraphList closed = enumerate_trivalent(n, Variant::closed);
    bool ok = true;
    for (const LabeledGraph& g : closed.closed)
      if (!delta(delta_term(g, Rational(1))).empty()) ok = false;
    rep.report("coboundary squares to zero on all " + std::to_string(closed.closed.size()) +
                   " closed diagrams with " + std::to_string(n) + " vertices",
               ok, "");
  }
  for (int n : {2, 4, 6}) {
    GraphList knots = enumerate_trivalent(n, Variant::knot);
    bool ok = true;
    for (const KnotGraph& g : knots.knot)
      if (!delta(delta_term(g, Rational(1))).empty()) ok = false;
    rep.report("coboundary squares to zero on all " + std::to_string(knots.knot.size()) +
                   " knot diagrams with " + std::to_string(n) + " vertices",
               ok, "");
  }
  std::vector<GraphSum> closed2 = cocycle_basis(2, Variant::closed, BasisFilter::connected);
  rep.report("two-vertex closed kernel is one-dimensional", closed2.size() == 1,
             "got " + std::to_string(closed2.size()));
  std::vector<GraphSum> knot4 = cocycle_basis(4, Variant::knot, BasisFilter::prime);
  bool dim_ok = knot4.size() == 1;
  bool coeff_ok = false;
  if (dim_ok) {
    KnotGraph x{4, 0, {{1, 3}, {2, 4}}};
    KnotGraph y{3, 1, {{1, 4}, {2, 4}, {3, 4}}};
    auto xt = knot4[0].terms.find(canonical_key(rotation_normal_form(x).rep));
    auto yt = knot4[0].terms.find(canonical_key(rotation_normal_form(y).rep));
    coeff_ok = xt != knot4[0].terms.end() && yt != knot4[0].terms.end() &&
               xt->second.coeff == Rational(1) && yt->second.coeff == Rational(-4) / 3;
  }
  rep.report("four-vertex prime knot kernel is the crossed-chords/tripod combination",
             dim_ok && coeff_ok, "");
}

void check_forms(CheckReporter& rep, double tol_scale) {
  using namespace knotint;
  knotint::Rng rng(424242);
  auto rand_pt = [&rng]() {
    return Point3{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
  };
  // exact antisymmetry
  bool anti = true;
  for (int i = 0; i < 200; ++i) {
    Point3 x = rand_pt(), y = rand_pt();
    if (norm(y - x) < 1e-3) continue;
    std::array<double, 6> v, w;
    for (double& t : v) t = 2 * rng.uniform() - 1;
    for (double& t : w) t = 2 * rng.uniform() - 1;
    if (gauss_form_eval(x, y, v, w) != -gauss_form_eval(x, y, w, v)) anti = false;
  }
  rep.report("direction form is exactly antisymmetric", anti, "");

  // closedness by Richardson-extrapolated central differences
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Point3 x = rand_pt(), y = rand_pt();
    if (norm(y - x) < 0.5) {
      --trial;
      continue;
    }
    std::array<std::array<double, 6>, 3> dirs;
    for (auto& d : dirs)
      for (double& t : d) t = 2 * rng.uniform() - 1;
    auto omega = [&](const Point3& xx, const Point3& yy, const std::array<double, 6>& a,
                     const std::array<double, 6>& b) { return gauss_form_eval(xx, yy, a, b); };
    auto shifted = [&](int k, double t, int i, int j) {
      Point3 xx = x + t * Vec3{dirs[k][0], dirs[k][1], dirs[k][2]};
      Point3 yy = y + t * Vec3{dirs[k][3], dirs[k][4], dirs[k][5]};
      return omega(xx, yy, dirs[i], dirs[j]);
    };
    auto deriv = [&](int k, int i, int j) {
      double h = 5e-3;
      auto d = [&](double hh) { return (shifted(k, hh, i, j) - shifted(k, -hh, i, j)) / (2 * hh); };
      return (4.0 * d(h / 2) - d(h)) / 3.0;
    };
    double resid = deriv(0, 1, 2) - deriv(1, 0, 2) + deriv(2, 0, 1);
    worst = std::max(worst, std::abs(resid));
  }
  rep.report("direction form is closed (finite-difference residual " + fmt(worst) + ")",
             worst < 1e-6 * tol_scale, "");

  // unit integral over enclosing spheres
  double worst_norm = 0.0;
  for (double radius : {0.7, 1.9}) {
    Point3 x{0.1, -0.2, 0.3};
    Point3 c = x + Vec3{0.1 * radius, -0.05 * radius, 0.12 * radius};
    int nth = 512, nphi = 256;
    double total = 0.0;
    for (int it = 0; it <= nth; ++it) {
      double th = kPi * it / nth;
      double st = std::sin(th), ct = std::cos(th);
      // Simpson in theta: the row integrand is linear near the poles, so plain
      // trapezoid stalls at second order
      double wt = (it == 0 || it == nth) ? 1.0 / 3.0 : (it % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
      double row = 0.0;
      for (int ip = 0; ip < nphi; ++ip) {
        double phi = kTwoPi * ip / nphi;
        Point3 y = c + radius * Vec3{st * std::cos(phi), st * std::sin(phi), ct};
        std::array<double, 6> vth{0, 0, 0, radius * ct * std::cos(phi),
                                  radius * ct * std::sin(phi), -radius * st};
        std::array<double, 6> vph{0, 0, 0, -radius * st * std::sin(phi),
                                  radius * st * std::cos(phi), 0};
        // (d/dtheta, d/dphi) is the outward orientation of this parametrization
        row += gauss_form_eval(x, y, vth, vph);
      }
      total += wt * row;
    }
    total *= (kPi / nth) * (kTwoPi / nphi);
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }
  rep.report("unit flux through enclosing spheres (worst deviation " + fmt(worst_norm) + ")",
             worst_norm < 1e-6 * tol_scale, "");

  // rotation invariance
  double worst_rot = 0.0;
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
    auto rot = [&](const Vec3& p) {
      Vec3 k = normalized(axis);
      return std::cos(ang) * p + std::sin(ang) * cross(k, p) +
             (1 - std::cos(ang)) * dot(k, p) * k;
    };
    Vec3 xv = rot({x.x, x.y, x.z}), yv = rot({y.x, y.y, y.z});
    Vec3 v1 = rot({v[0], v[1], v[2]}), v2 = rot({v[3], v[4], v[5]});
    Vec3 w1 = rot({w[0], w[1], w[2]}), w2 = rot({w[3], w[4], w[5]});
    double after = gauss_form_eval({xv.x, xv.y, xv.z}, {yv.x, yv.y, yv.z},
                                   {v1.x, v1.y, v1.z, v2.x, v2.y, v2.z},
                                   {w1.x, w1.y, w1.z, w2.x, w2.y, w2.z});
    worst_rot = std::max(worst_rot, std::abs(after - before));
  }
  rep.report("rotation invariance (worst deviation " + fmt(worst_rot) + ")",
             worst_rot < 1e-12 * tol_scale, "");
}

void check_sampler(CheckReporter& rep, const Config& cfg) {
  using namespace knotint;
  Curve trefoil = builtin_knot("trefoil");
  uint64_t n = std::max<uint64_t>(cfg.samples, 100000);

  {  // circle-ordering measure and knot-parameter distribution
    KnotSampler s = make_sampler(trefoil, 3, 0, cfg.rejection_cutoff);
    SampleKernel kernel = [&s](uint64_t, Rng& rng, double* vals) -> int {
      DrawResult d = sample_configuration(s, rng);
      vals[0] = d.ok ? d.cfg.weight : 0.0;
      bool inside = d.ok;
      if (d.ok)
        for (double sv : d.cfg.s)
          if (sv > kPi) inside = false;
      vals[1] = inside ? d.cfg.weight : 0.0;
      return d.rejects;
    };
    MultiEstimate m = run_blocked_mc(n, cfg.seed, cfg.workers, 2, kernel);
    double expect_total = std::pow(kTwoPi, 3) / 2.0;
    bool total_ok = std::abs(m.value[0] - expect_total) < 1e-9;
    double expect_half = expect_total / 8.0;
    bool half_ok = std::abs(m.value[1] - expect_half) < 4.0 * m.std_error[1] + 1e-12;
    rep.report("ordered-circle weight reproduces the domain measure", total_ok,
               fmt(m.value[0]) + " vs " + fmt(expect_total));
    rep.report("half-circle restriction matches the expected fraction", half_ok,
               fmt(m.value[1]) + " vs " + fmt(expect_half) + " +- " + fmt(m.std_error[1]));
  }

  {  // free-point mixture density integrates indicators correctly
    KnotSampler s = make_sampler(trefoil, 2, 1, cfg.rejection_cutoff);
    Point3 anchor = eval_curve(trefoil, 0.0).position;
    double ball_r = 0.35;
    SampleKernel kernel = [&](uint64_t, Rng& rng, double* vals) -> int {
      DrawResult d = sample_configuration(s, rng);
      if (!d.ok) return d.rejects;
      const Point3& y = d.cfg.y[0];
      double base = d.cfg.weight / (std::pow(kTwoPi, 2) / 1.0);  // strip knot factor
      vals[0] = (y.x >= 0 && y.x <= 1 && y.y >= 0 && y.y <= 1 && y.z >= 0 && y.z <= 1)
                    ? base
                    : 0.0;
      vals[1] = (norm(y - anchor) <= ball_r) ? base : 0.0;
      return d.rejects;
    };
    MultiEstimate m = run_blocked_mc(n, cfg.seed + 1, cfg.workers, 2, kernel);
    bool cube_ok = std::abs(m.value[0] - 1.0) < 4.0 * m.std_error[0] + 1e-12;
    double ball_vol = 4.0 / 3.0 * kPi * ball_r * ball_r * ball_r;
    bool ball_ok = std::abs(m.value[1] - ball_vol) < 4.0 * m.std_error[1] + 1e-12;
    rep.report("free-point mixture integrates a unit cube",
               cube_ok, fmt(m.value[0]) + " +- " + fmt(m.std_error[0]) + " vs 1");
    rep.report("free-point mixture integrates a curve-anchored ball", ball_ok,
               fmt(m.value[1]) + " +- " + fmt(m.std_error[1]) + " vs " + fmt(ball_vol));
  }
}

void check_lemma(CheckReporter& rep, const Config& cfg) {
  using namespace knotint;
  Point3 xj{0, 0, 0}, xk{1, 0, 0};
  std::vector<ResidualComponent> comps =
      kontsevich_residual(xj, xk, cfg.samples, cfg.seed, cfg.workers, cfg.rejection_cutoff);
  for (const ResidualComponent& c : comps) {
    bool ok = std::abs(c.value) <= 4.0 * c.std_error + 1e-12;
    rep.report("collapsing-vertex component " + c.name + " vanishes", ok,
               fmt(c.value) + " +- " + fmt(c.std_error));
  }
}

void check_b_gamma(CheckReporter& rep, const Config& cfg) {
  using namespace knotint;
  LabeledGraph theta{2, {{1, 2}, {1, 2}, {1, 2}}};
  ParityCheckResult parity = b_gamma_parity_check(theta, 200, cfg.seed);
  rep.report("slice integrand parity (" + std::to_string(parity.n_checked) + " configurations)",
             parity.n_failed == 0 && parity.n_checked > 0,
             "max deviation " + fmt(parity.max_deviation));
  Estimate est =
      b_gamma_estimate(theta, cfg.samples, cfg.seed, cfg.workers, cfg.rejection_cutoff);
  bool ok = std::abs(est.value) <= 4.0 * est.std_error + 1e-12;
  rep.report("vacuum integral of the triple edge vanishes", ok,
             fmt(est.value) + " +- " + fmt(est.std_error));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph cocycles and configuration-space integrals for knots in R^3"};
  app.require_subcommand(1);

  Config cfg;
  // config file first, then environment, then flags
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc)
      path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      path = arg.substr(9);
    if (!path.empty()) {
      try {
        cfg = knotint::load_config_file(path, cfg);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  }
  knotint::apply_env_overrides(cfg);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (already applied before flags)");

  // ---- cocycles
  auto* sc_cocycles = app.add_subcommand("cocycles", "kernel bases of the coboundary");
  std::string cc_variant = "knot";
  int cc_total = 4;
  std::string cc_filter = "prime";
  std::string cc_out;
  sc_cocycles->add_option("--variant", cc_variant, "knot | closed")
      ->check(CLI::IsMember({"knot", "closed"}));
  sc_cocycles->add_option("--total", cc_total, "total vertex count");
  sc_cocycles->add_option("--filter", cc_filter, "prime | connected | none")
      ->check(CLI::IsMember({"prime", "connected", "none"}));
  sc_cocycles->add_option("--out", cc_out, "write the basis JSON here (default stdout)");
  add_common_options(sc_cocycles, cfg);

  // ---- integrate
  auto* sc_integrate = app.add_subcommand("integrate", "knot invariant from a cocycle");
  std::string in_knot, in_cocycle;
  int in_order = 2;
  bool in_raw = false;
  sc_integrate->add_option("--knot", in_knot, "builtin name or curve JSON path")->required();
  sc_integrate->add_option("--cocycle", in_cocycle, "cocycle JSON path (default: builtin)");
  sc_integrate->add_option("--order", in_order, "builtin cocycle order when no file is given");
  sc_integrate->add_flag("--raw", in_raw, "skip self-linking correction and calibration");
  add_common_options(sc_integrate, cfg);

  // ---- lk
  auto* sc_lk = app.add_subcommand("lk", "linking number of two disjoint curves");
  std::string lk_a, lk_b;
  int lk_mesh = 256;
  sc_lk->add_option("--curve1", lk_a, "builtin name or curve JSON path")->required();
  sc_lk->add_option("--curve2", lk_b, "builtin name or curve JSON path")->required();
  sc_lk->add_option("--mesh", lk_mesh, "grid points per curve");
  add_common_options(sc_lk, cfg);

  // ---- sln
  auto* sc_sln = app.add_subcommand("sln", "self-linking integral of one curve");
  std::string sln_knot;
  int sln_mesh = 1024;
  sc_sln->add_option("--knot", sln_knot, "builtin name or curve JSON path")->required();
  sc_sln->add_option("--mesh", sln_mesh, "grid points on the curve");
  add_common_options(sc_sln, cfg);

  // ---- oracle-v2
  auto* sc_v2 = app.add_subcommand("oracle-v2", "degree-2 invariant from a projection code");
  std::string v2_knot, v2_dir = "0.2391,0.6571,0.7151";
  bool v2_code = false;
  sc_v2->add_option("--knot", v2_knot, "builtin name or curve JSON path")->required();
  sc_v2->add_option("--direction", v2_dir, "projection direction x,y,z");
  sc_v2->add_flag("--print-code", v2_code, "also print the crossing sequence");
  add_common_options(sc_v2, cfg);

  // ---- check
  auto* sc_check = app.add_subcommand("check", "module self checks");
  std::string what;
  sc_check
      ->add_option("what", what, "delta | forms | sampler | lemma-k | b-gamma")
      ->required()
      ->check(CLI::IsMember({"delta", "forms", "sampler", "lemma-k", "b-gamma"}));
  add_common_options(sc_check, cfg);

  // ---- calibrate
  auto* sc_cal = app.add_subcommand("calibrate", "fix the cocycle normalization on a reference");
  std::string cal_cocycle, cal_knot = "trefoil", cal_out;
  int cal_order = 2;
  double cal_target = 1.0;
  sc_cal->add_option("--cocycle", cal_cocycle, "cocycle JSON path (default: builtin)");
  sc_cal->add_option("--order", cal_order, "builtin cocycle order when no file is given");
  sc_cal->add_option("--knot", cal_knot, "reference curve");
  sc_cal->add_option("--target", cal_target, "reference value");
  sc_cal->add_option("--out", cal_out, "write the calibrated cocycle here");
  add_common_options(sc_cal, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::filesystem::create_directories(cfg.out_dir);

    if (*sc_cocycles) {
      knotint::Variant variant =
          cc_variant == "knot" ? knotint::Variant::knot : knotint::Variant::closed;
      knotint::BasisFilter filter = cc_filter == "prime"
                                        ? knotint::BasisFilter::prime
                                        : (cc_filter == "connected" ? knotint::BasisFilter::connected
                                                                    : knotint::BasisFilter::none);
      std::vector<knotint::GraphSum> basis = knotint::cocycle_basis(cc_total, variant, filter);
      ordered_json doc;
      doc["quantity"] = "cocycle_basis";
      doc["variant"] = cc_variant;
      doc["total_vertices"] = cc_total;
      doc["filter"] = cc_filter;
      doc["dimension"] = basis.size();
      ordered_json vecs = ordered_json::array();
      for (const knotint::GraphSum& v : basis) {
        knotint::CocycleSpec tmp;
        tmp.sum = v;
        tmp.order = cc_total / 2;
        if (tmp.order % 2 == 0) tmp.mu = knotint::Rational(0);
        vecs.push_back(spec_json(tmp));
      }
      doc["basis"] = vecs;
      std::string text = knotint::render_with_hash(doc);
      if (cc_out.empty())
        std::cout << text;
      else
        knotint::write_text_file(cc_out, text);
      return 0;
    }

    if (*sc_integrate) {
      knotint::Curve curve = knotint::resolve_curve(in_knot);
      knotint::CocycleSpec spec = resolve_cocycle(in_cocycle, in_order);
      auto run = [&](uint64_t ns) {
        knotint::InvariantResult r =
            in_raw ? knotint::a_gamma(curve, spec, ns, cfg.seed, cfg.workers,
                                      cfg.rejection_cutoff)
                   : knotint::i_gamma(curve, spec, ns, cfg.seed, cfg.workers,
                                      cfg.rejection_cutoff);
        return r;
      };
      // honest prefix runs for the convergence table, then the full run
      std::vector<knotint::ConvergenceRow> rows;
      for (uint64_t div : {uint64_t{64}, uint64_t{16}, uint64_t{4}}) {
        uint64_t ns = std::max<uint64_t>(1, cfg.samples / div);
        if (!rows.empty() && rows.back().n_samples == ns) continue;
        auto t0 = std::chrono::steady_clock::now();
        knotint::InvariantResult r = run(ns);
        auto t1 = std::chrono::steady_clock::now();
        rows.push_back({ns, r.value, r.std_error, r.rejection_rate,
                        std::chrono::duration<double, std::milli>(t1 - t0).count()});
      }
      auto t0 = std::chrono::steady_clock::now();
      knotint::InvariantResult full = run(cfg.samples);
      auto t1 = std::chrono::steady_clock::now();
      rows.push_back({cfg.samples, full.value, full.std_error, full.rejection_rate,
                      std::chrono::duration<double, std::milli>(t1 - t0).count()});

      ordered_json doc;
      doc["quantity"] = in_raw ? "a_gamma" : "i_gamma";
      doc["knot"] = in_knot;
      doc["order"] = spec.order;
      doc["value"] = full.value;
      doc["std_error"] = full.std_error;
      doc["n_samples"] = cfg.samples;
      doc["seed"] = cfg.seed;
      doc["rejection_rate"] = full.rejection_rate;
      doc["calibration"] =
          spec.calibration ? ordered_json(*spec.calibration) : ordered_json(nullptr);
      doc["terms"] = terms_json(full);
      doc["cocycle"] = spec_json(spec);
      doc["config"] = config_echo(cfg);
      std::string text = knotint::render_with_hash(doc);
      std::string base = cfg.out_dir + "/" + (in_raw ? "a_gamma" : "i_gamma") + "_result";
      knotint::write_text_file(base + ".json", text);
      knotint::write_text_file(base + "_convergence.csv", knotint::csv_from_rows(rows));
      std::cout << (in_raw ? "a_gamma" : "i_gamma") << "(" << in_knot << ") = " << fmt(full.value)
                << " +- " << fmt(full.std_error) << "\n"
                << "wrote " << base << ".json\n";
      return 0;
    }

    if (*sc_lk) {
      knotint::Curve a = knotint::resolve_curve(lk_a);
      knotint::Curve b = knotint::resolve_curve(lk_b);
      double v = knotint::linking_number(a, b, lk_mesh);
      std::cout << "linking_number = " << fmt(v) << "\n";
      return 0;
    }

    if (*sc_sln) {
      knotint::Curve c = knotint::resolve_curve(sln_knot);
      knotint::Estimate e = knotint::self_linking(c, sln_mesh);
      std::cout << "self_linking = " << fmt(e.value) << " +- " << fmt(e.std_error) << "\n";
      return 0;
    }

    if (*sc_v2) {
      knotint::Curve c = knotint::resolve_curve(v2_knot);
      double x, y, z;
      if (std::sscanf(v2_dir.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3)
        throw knotint::ParseError("direction must be x,y,z");
      knotint::GaussCode code = knotint::project_gauss_code(c, {x, y, z});
      if (v2_code) {
        for (const knotint::GaussCodeEntry& e : code.entries)
          std::cout << (e.over ? "O" : "U") << e.label << (e.sign > 0 ? "+" : "-") << " ";
        std::cout << "\n";
      }
      std::cout << "v2 = " << knotint::pv_v2(code) << "\n";
      return 0;
    }

    if (*sc_check) {
      CheckReporter rep;
      if (what == "delta") check_delta(rep);
      if (what == "forms") check_forms(rep, cfg.tol_scale);
      if (what == "sampler") check_sampler(rep, cfg);
      if (what == "lemma-k") check_lemma(rep, cfg);
      if (what == "b-gamma") check_b_gamma(rep, cfg);
      return rep.failed == 0 ? 0 : 1;
    }

    if (*sc_cal) {
      knotint::Curve curve = knotint::resolve_curve(cal_knot);
      knotint::CocycleSpec spec = resolve_cocycle(cal_cocycle, cal_order);
      double factor = knotint::calibrate_cocycle(spec, curve, cal_target, cfg.samples, cfg.seed,
                                                 cfg.workers);
      std::string out_path =
          cal_out.empty() ? cfg.out_dir + "/cocycle_calibrated.json" : cal_out;
      knotint::save_cocycle(spec, out_path);
      std::cout << "calibration = " << fmt(factor) << "\nwrote " << out_path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
