// Compares the serial reference path (workers=1) against the OpenMP path on the
// three Monte Carlo kernels and insists on bitwise-identical results.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "knotint/config_integrator.hpp"
#include "knotint/diagram_algebra.hpp"
#include "knotint/invariants.hpp"
#include "knotint/knot_model.hpp"

using namespace knotint;

namespace {

struct Timed {
  double value = 0.0;
  double std_error = 0.0;
  double ms = 0.0;
};

template <typename F>
Timed timed(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  Estimate e = f();
  auto t1 = std::chrono::steady_clock::now();
  return {e.value, e.std_error, std::chrono::duration<double, std::milli>(t1 - t0).count()};
}

bool bitwise_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

int report(const char* name, const Timed& serial, const Timed& parallel) {
  bool same = bitwise_equal(serial.value, parallel.value) &&
              bitwise_equal(serial.std_error, parallel.std_error);
  std::printf("%-28s serial %9.2f ms   omp(3) %9.2f ms   speedup %.2fx   bitwise %s\n", name,
              serial.ms, parallel.ms, serial.ms / parallel.ms, same ? "identical" : "DIFFERS");
  if (!same) {
    std::printf("  serial   %.17g +- %.17g\n", serial.value, serial.std_error);
    std::printf("  parallel %.17g +- %.17g\n", parallel.value, parallel.std_error);
  }
  return same ? 0 : 1;
}

}  // namespace

int main() {
  int bad = 0;
  const uint64_t n = 400000;
  const uint64_t seed = 20240817;

  Curve trefoil = builtin_knot("trefoil");
  KnotGraph y{3, 1, {{1, 4}, {2, 4}, {3, 4}}};
  Timed ys = timed([&] { return mc_estimate(trefoil, y, n, seed, 1); });
  Timed yp = timed([&] { return mc_estimate(trefoil, y, n, seed, 3); });
  bad += report("tripod term on trefoil", ys, yp);

  LabeledGraph theta{2, {{1, 2}, {1, 2}, {1, 2}}};
  Timed bs = timed([&] { return b_gamma_estimate(theta, n, seed, 1); });
  Timed bp = timed([&] { return b_gamma_estimate(theta, n, seed, 3); });
  bad += report("triple-edge vacuum integral", bs, bp);

  auto lemma = [&](int workers) {
    std::vector<ResidualComponent> comps =
        kontsevich_residual({0, 0, 0}, {1, 0, 0}, n, seed, workers);
    // fold the six components into one number for the comparison
    Estimate e;
    e.value = 0.0;
    e.std_error = 0.0;
    for (const ResidualComponent& c : comps) {
      e.value += c.value;
      e.std_error += c.std_error;
    }
    return e;
  };
  Timed ks = timed([&] { return lemma(1); });
  Timed kp = timed([&] { return lemma(3); });
  bad += report("collapsing-vertex residual", ks, kp);

  if (bad == 0) std::printf("all kernels bitwise identical across worker counts\n");
  return bad == 0 ? 0 : 1;
}
