#pragma once

#include <optional>
#include <string>
#include <vector>

#include "knotint/config_integrator.hpp"
#include "knotint/diagram_algebra.hpp"
#include "knotint/knot_model.hpp"

namespace knotint {

// A closed combination of knot diagrams with bookkeeping for the self-linking
// correction and an overall calibration factor.
struct CocycleSpec {
  GraphSum sum;
  int order = 0;
  std::optional<Rational> mu;         // coefficient of the self-linking term
  std::optional<double> calibration;  // overall normalization factor
  std::string source;
};

// First kernel-basis vector on prime diagrams with 2*order vertices.  Even
// orders carry mu = 0; odd orders leave mu unset.
CocycleSpec make_cocycle(int order);

CocycleSpec load_cocycle(const std::string& path);
void save_cocycle(const CocycleSpec& spec, const std::string& path);
CocycleSpec cocycle_from_json_text(const std::string& text, const std::string& source = "");
std::string cocycle_to_json_text(const CocycleSpec& spec);

// Double Gauss integral of two disjoint curves (trapezoid product rule, which
// converges spectrally for disjoint analytic loops).  CurvesIntersect when the
// sampled curves come closer than 1e-6.
double linking_number(const Curve& c1, const Curve& c2, int mesh = 256);

// Writhe-type self integral: single-chord quadrature over the full torus.
Estimate self_linking(const Curve& c, int mesh = 1024);

struct TermEstimate {
  std::string key;
  Rational coeff;
  std::string method;  // "quadrature" | "monte-carlo" | "self-linking"
  Estimate estimate;
};

struct InvariantResult {
  double value = 0.0;
  double std_error = 0.0;
  uint64_t n_samples = 0;
  uint64_t seed = 0;
  double rejection_rate = 0.0;  // worst over Monte-Carlo terms
  std::vector<TermEstimate> terms;
};

// Raw sum of per-term configuration integrals (chord terms by quadrature, the
// rest by Monte Carlo with per-term derived seeds).  NotCocycle unless every
// term is a prime trivalent knot diagram and the sum is closed under the
// coboundary.
InvariantResult a_gamma(const Curve& c, const CocycleSpec& spec, uint64_t n_samples,
                        uint64_t seed, int workers, double rejection_cutoff = 1e-9);

// Raw sum plus mu times the self-linking integral, scaled by the calibration
// factor when present.  UnknownAnomaly for odd order with mu unset.
InvariantResult i_gamma(const Curve& c, const CocycleSpec& spec, uint64_t n_samples,
                        uint64_t seed, int workers, double rejection_cutoff = 1e-9);

// Fixes spec.calibration so the invariant of the reference curve equals
// ref_value.  InsufficientSignal unless the raw estimate clears five standard
// errors.
double calibrate_cocycle(CocycleSpec& spec, const Curve& reference, double ref_value,
                         uint64_t n_samples, uint64_t seed, int workers);

}  // namespace knotint
