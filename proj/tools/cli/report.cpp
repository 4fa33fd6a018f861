#include "cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dgame/error.hpp"

namespace dgame::cli {
namespace {

void emit(std::string& out, const Json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        emit(out, val, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_structured();
      });
      out += flat ? "[" : "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k > 0) out += flat ? ", " : ",\n";
        if (!flat) out += pad;
        emit(out, j[k], depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Json to_json(const Spectrum& s) {
  Json out = Json::array();
  for (const auto& z : s) out.push_back(Json::array({z.real(), z.imag()}));
  return out;
}

Json to_json(const EquilibriumSolution& sol) {
  Json p = Json::array();
  for (const Mat& pi : sol.p) p.push_back(to_json(pi));
  return Json{{"f_bar", to_json(sol.f_bar)},
              {"p", p},
              {"spectrum", to_json(sol.spectrum)},
              {"residuals",
               {{"lyapunov", sol.lyapunov_residuals},
                {"stationarity", sol.stationarity_residual}}},
              {"iterations", sol.iterations}};
}

std::string dump(const Json& j) {
  std::string out;
  emit(out, j, 0);
  out += "\n";
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::kInvalidArgument, "cannot write " + tmp.string());
    os << text;
    if (!os) throw Error(ErrorKind::kInvalidArgument, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, Index n, Index m) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<Index>(row.size()) != 1 + n + m) {
      throw Error(ErrorKind::kInvalidArgument,
                  path.string() + ": expected columns t,x1..xn,u1..um");
    }
    rows.push_back(std::move(row));
  }
  Trajectory t;
  const Index k = static_cast<Index>(rows.size());
  t.t.resize(k);
  t.x.resize(k, n);
  t.u.resize(k, m);
  for (Index i = 0; i < k; ++i) {
    t.t(i) = rows[i][0];
    for (Index c = 0; c < n; ++c) t.x(i, c) = rows[i][1 + c];
    for (Index c = 0; c < m; ++c) t.u(i, c) = rows[i][1 + n + c];
  }
  return t;
}

}  // namespace dgame::cli
