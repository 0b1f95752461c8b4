#include "knotint/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "knotint/errors.hpp"

namespace knotint {

Config load_config_file(const std::string& path, const Config& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config file must hold a JSON object");
  Config c = base;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed")
      c.seed = value.get<uint64_t>();
    else if (key == "workers")
      c.workers = value.get<int>();
    else if (key == "samples")
      c.samples = value.get<uint64_t>();
    else if (key == "rejection_cutoff")
      c.rejection_cutoff = value.get<double>();
    else if (key == "out_dir")
      c.out_dir = value.get<std::string>();
    else if (key == "tol_scale")
      c.tol_scale = value.get<double>();
    else
      throw ParseError("unknown config key '" + key + "'");
  }
  return c;
}

void apply_env_overrides(Config& c) {
  if (const char* out = std::getenv("KNOTINT_OUT")) {
    if (*out) c.out_dir = out;
  }
}

}  // namespace knotint
