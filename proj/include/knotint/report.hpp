#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "knotint/config_integrator.hpp"

namespace knotint {

// Deterministic JSON rendering: insertion order preserved, floating-point
// numbers printed with 12 significant digits, two-space indentation, trailing
// newline.  Identical inputs give identical bytes.
std::string render_json(const nlohmann::ordered_json& doc);

uint64_t fnv1a64(const std::string& data);
std::string hash_hex(uint64_t h);

// Renders the document, stamps "content_hash" of the rendered bytes, renders
// again with the hash included.
std::string render_with_hash(nlohmann::ordered_json doc);

std::string csv_from_rows(const std::vector<ConvergenceRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace knotint
