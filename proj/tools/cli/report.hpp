#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dgame/feedback.hpp"
#include "dgame/forward.hpp"

namespace dgame::cli {

using Json = nlohmann::json;

Json to_json(const Mat& m);
Json to_json(const Vec& v);
Json to_json(const Spectrum& s);  // [[re, im], ...]
Json to_json(const EquilibriumSolution& sol);

/// Deterministic serialization: sorted keys, floats as %.17g.
std::string dump(const Json& j);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& text);

/// Reads a CSV written by write_trajectory_csv.
Trajectory read_trajectory_csv(const std::filesystem::path& path, Index n, Index m);

}  // namespace dgame::cli
