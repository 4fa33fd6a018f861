#pragma once

// Problem files: JSON with E, A, B and optional costs, cost_sets, F, theta
// and constraints. Matrices are row-major nested arrays; a bare number is a
// 1x1 matrix.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgame/inverse.hpp"

namespace dgame::cli {

using Json = nlohmann::json;

struct Problem {
  DescriptorGame game;
  std::optional<CostParameters> costs;
  std::map<std::string, CostParameters> cost_sets;
  std::optional<Mat> f;  // stacked m x n
  std::optional<std::vector<Vec>> theta;
  StructuralConstraints constraints;
};

/// Throws Error(kInvalidArgument) with a message naming the offending key.
Problem parse_problem(const Json& j);
Problem load_problem(const std::filesystem::path& path);

Mat parse_matrix(const Json& j, const std::string& what);
/// Flat arrays become column vectors (for B_i).
Mat parse_column_matrix(const Json& j, const std::string& what);
Vec parse_vector(const Json& j, const std::string& what);
CostParameters parse_costs(const Json& j, const DescriptorGame& g);
std::vector<Vec> parse_thetas(const Json& j, const ThetaLayout& layout);

/// Chooses the named cost set, or the `costs` block when name is empty.
const CostParameters* select_costs(const Problem& p, const std::string& name);

}  // namespace dgame::cli
