#include "knotint/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace knotint {

namespace {

void render_value(const nlohmann::ordered_json& j, std::string& out, int indent) {
  std::string pad(indent, ' ');
  std::string pad2(indent + 2, ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        out += pad2;
        out += nlohmann::ordered_json(it.key()).dump();
        out += ": ";
        render_value(it.value(), out, indent + 2);
        if (k + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t k = 0; k < j.size(); ++k) {
        out += pad2;
        render_value(j[k], out, indent + 2);
        if (k + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out += buf;
      // keep the token recognizably floating point
      if (std::strchr(buf, '.') == nullptr && std::strchr(buf, 'e') == nullptr &&
          std::strchr(buf, 'E') == nullptr)
        out += ".0";
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string render_json(const nlohmann::ordered_json& doc) {
  std::string out;
  render_value(doc, out, 0);
  out += "\n";
  return out;
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string render_with_hash(nlohmann::ordered_json doc) {
  doc.erase("content_hash");
  std::string body = render_json(doc);
  doc["content_hash"] = hash_hex(fnv1a64(body));
  return render_json(doc);
}

std::string csv_from_rows(const std::vector<ConvergenceRow>& rows) {
  std::string out = "n_samples,value,std_error,rejection_rate,wall_time_ms\n";
  char buf[256];
  for (const ConvergenceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%.12g,%.12g,%.12g,%.3f\n",
                  static_cast<unsigned long long>(r.n_samples), r.value, r.std_error,
                  r.rejection_rate, r.wall_time_ms);
    out += buf;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace knotint
