#include "cli/problem.hpp"

#include <cmath>
#include <fstream>

#include "dgame/error.hpp"

namespace dgame::cli {
namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) bad(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(what + ": non-finite entry");
  return v;
}

}  // namespace

Mat parse_matrix(const Json& j, const std::string& what) {
  if (j.is_number()) return Mat::Constant(1, 1, number(j, what));
  if (!j.is_array() || j.empty()) bad(what + ": expected a non-empty array");
  if (j.front().is_number()) {
    Mat out(1, static_cast<Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c) out(0, c) = number(j[c], what);
    return out;
  }
  const Index rows = static_cast<Index>(j.size());
  if (!j.front().is_array()) bad(what + ": expected nested arrays");
  const Index cols = static_cast<Index>(j.front().size());
  Mat out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      bad(what + ": ragged rows");
    }
    for (Index c = 0; c < cols; ++c) out(r, c) = number(row[c], what);
  }
  return out;
}

Mat parse_column_matrix(const Json& j, const std::string& what) {
  if (j.is_array() && !j.empty() && j.front().is_number()) {
    return parse_matrix(j, what).transpose();
  }
  return parse_matrix(j, what);
}

Vec parse_vector(const Json& j, const std::string& what) {
  if (j.is_number()) return Vec::Constant(1, number(j, what));
  if (!j.is_array()) bad(what + ": expected an array of numbers");
  Vec out(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) out(k) = number(j[k], what);
  return out;
}

CostParameters parse_costs(const Json& j, const DescriptorGame& g) {
  if (!j.is_object() || !j.contains("Q") || !j.contains("R")) {
    bad("costs: expected an object with Q and R");
  }
  CostParameters c;
  for (std::size_t i = 0; i < j["Q"].size(); ++i) {
    c.q.push_back(parse_matrix(j["Q"][i], "costs.Q[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < j["R"].size(); ++i) {
    std::vector<Mat> row;
    for (std::size_t k = 0; k < j["R"][i].size(); ++k) {
      row.push_back(parse_matrix(j["R"][i][k], "costs.R[" + std::to_string(i) + "][" +
                                                   std::to_string(k) + "]"));
    }
    c.r.push_back(std::move(row));
  }
  c.validate(g);
  return c;
}

std::vector<Vec> parse_thetas(const Json& j, const ThetaLayout& layout) {
  if (!j.is_array()) bad("theta: expected a list with one vector per player");
  if (j.size() != layout.m.size()) bad("theta: expected one vector per player");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Vec t = parse_vector(j[i], "theta[" + std::to_string(i) + "]");
    if (t.size() != layout.size()) {
      bad("theta[" + std::to_string(i) + "]: length " + std::to_string(t.size()) +
          ", expected " + std::to_string(layout.size()));
    }
    out.push_back(std::move(t));
  }
  return out;
}

Problem parse_problem(const Json& j) {
  if (!j.is_object()) bad("problem: expected a JSON object");
  for (const char* key : {"E", "A", "B"}) {
    if (!j.contains(key)) bad(std::string("problem: missing key ") + key);
  }
  Problem p;
  p.game.e = parse_matrix(j["E"], "E");
  p.game.a = parse_matrix(j["A"], "A");
  if (!j["B"].is_array() || j["B"].empty()) bad("B: expected a list of player matrices");
  for (std::size_t i = 0; i < j["B"].size(); ++i) {
    p.game.b.push_back(parse_column_matrix(j["B"][i], "B[" + std::to_string(i) + "]"));
  }
  p.game.validate();

  if (j.contains("costs")) p.costs = parse_costs(j["costs"], p.game);
  if (j.contains("cost_sets")) {
    if (!j["cost_sets"].is_object()) bad("cost_sets: expected an object");
    for (const auto& [name, val] : j["cost_sets"].items()) {
      p.cost_sets.emplace(name, parse_costs(val, p.game));
    }
  }
  if (j.contains("F")) {
    const Json& f = j["F"];
    if (!f.is_array() || f.size() != p.game.b.size()) {
      bad("F: expected one feedback matrix per player");
    }
    std::vector<Mat> blocks;
    for (std::size_t i = 0; i < f.size(); ++i) {
      Mat fi = parse_matrix(f[i], "F[" + std::to_string(i) + "]");
      if (fi.rows() != p.game.m(i) || fi.cols() != p.game.n()) {
        bad("F[" + std::to_string(i) + "]: expected m_i x n");
      }
      blocks.push_back(std::move(fi));
    }
    Mat stacked(p.game.m_total(), p.game.n());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      stacked.middleRows(p.game.offset(i), p.game.m(i)) = blocks[i];
    }
    p.f = stacked;
  }
  if (j.contains("theta")) p.theta = parse_thetas(j["theta"], ThetaLayout::of(p.game));
  if (j.contains("constraints")) {
    const Json& c = j["constraints"];
    if (!c.is_object()) bad("constraints: expected an object");
    if (c.contains("diagonal_q")) {
      if (!c["diagonal_q"].is_boolean()) bad("constraints.diagonal_q: expected a boolean");
      p.constraints.diagonal_q = c["diagonal_q"].get<bool>();
    }
    if (c.contains("support")) {
      std::vector<Index> s;
      for (const Json& k : c["support"]) {
        if (!k.is_number_integer()) bad("constraints.support: expected integers");
        s.push_back(k.get<Index>());
      }
      p.constraints.support = s;
    }
  }
  return p;
}

Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
  return parse_problem(j);
}

const CostParameters* select_costs(const Problem& p, const std::string& name) {
  if (name.empty()) return p.costs ? &*p.costs : nullptr;
  auto it = p.cost_sets.find(name);
  return it == p.cost_sets.end() ? nullptr : &it->second;
}

}  // namespace dgame::cli
