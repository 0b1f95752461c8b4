#pragma once

#include <cstdint>
#include <string>

namespace knotint {

struct Config {
  uint64_t seed = 12345;
  int workers = 1;
  uint64_t samples = 1000000;
  double rejection_cutoff = 1e-9;
  std::string out_dir = ".";
  double tol_scale = 1.0;
};

// JSON file with any subset of the Config keys (seed, workers, samples,
// rejection_cutoff, out_dir, tol_scale); unknown keys are rejected.
Config load_config_file(const std::string& path, const Config& base = Config{});

// KNOTINT_OUT overrides out_dir when set (flags still win over it).
void apply_env_overrides(Config& c);

}  // namespace knotint
