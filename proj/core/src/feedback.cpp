#include "dgame/feedback.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "dgame/error.hpp"

namespace dgame {

std::vector<Mat> split_players(const DescriptorGame& g, const Mat& stacked) {
  if (stacked.rows() != g.m_total()) {
    throw Error(ErrorKind::kInvalidArgument, "feedback: expected m rows");
  }
  std::vector<Mat> out;
  for (Index i = 0; i < g.n_players(); ++i) {
    out.push_back(stacked.middleRows(g.offset(i), g.m(i)));
  }
  return out;
}

Mat stack_players(const std::vector<Mat>& blocks) {
  Index rows = 0;
  const Index cols = blocks.empty() ? 0 : blocks.front().cols();
  for (const Mat& b : blocks) rows += b.rows();
  Mat out(rows, cols);
  Index off = 0;
  for (const Mat& b : blocks) {
    out.middleRows(off, b.rows()) = b;
    off += b.rows();
  }
  return out;
}

FsCheck in_fs(const DescriptorGame& g, const Mat& f) {
  g.validate();
  FsCheck out;
  if (f.rows() != g.m_total() || f.cols() != g.n()) {
    out.reason = "feedback has wrong dimensions";
    return out;
  }
  const Pencil open{g.e, g.a};
  const Pencil closed{g.e, g.a + g.b_stacked() * f};
  const bool open_ok = is_regular(open) && index_of(open) <= 1;
  if (!is_regular(closed)) {
    out.reason = open_ok ? "index raised (closed loop irregular)" : "irregular pencil";
    return out;
  }
  const int idx = index_of(closed);
  if (idx >= 2) {
    out.reason = "index raised";
    return out;
  }
  out.spectrum = finite_spectrum(closed);
  for (const auto& z : out.spectrum) {
    if (!(z.real() < 0.0)) {
      out.reason = "finite spectrum not stable";
      return out;
    }
  }
  out.ok = true;
  return out;
}

Mat omega(const ReducedGame& rg, const Mat& f) {
  if (f.rows() != rg.m_total() || f.cols() != rg.n()) {
    throw Error(ErrorKind::kInvalidArgument, "omega: F must be m x n");
  }
  const Index m = rg.m_total();
  const Mat inner = Mat::Identity(m, m) + f * rg.w.x2 * rg.b2_all;
  Eigen::FullPivLU<Mat> lu(inner);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) {
    throw Error(ErrorKind::kNotIndexPreserving,
                "not index-preserving: I + F X2 B2 is singular");
  }
  return lu.solve(f * rg.w.x1);
}

Mat preimage_s(const ReducedGame& rg, const Mat& f_bar) {
  return rg.w.x1 - rg.w.x2 * rg.b2_all * f_bar;
}

bool preimage_member(const ReducedGame& rg, const Mat& f_bar, const Mat& f,
                     double tol) {
  if (f.rows() != rg.m_total() || f.cols() != rg.n()) return false;
  if (f_bar.rows() != rg.m_total() || f_bar.cols() != rg.r()) return false;
  if (!in_fs(rg.game, f).ok) return false;
  const Mat s = preimage_s(rg, f_bar);
  return linalg::max_abs(f * s - f_bar) <= tol * (1.0 + linalg::max_abs(f_bar));
}

Mat preimage_sample(const ReducedGame& rg, const Mat& f_bar, std::uint64_t seed,
                    int max_tries) {
  const Index n = rg.n();
  const Index m = rg.m_total();
  if (f_bar.rows() != m || f_bar.cols() != rg.r()) {
    throw Error(ErrorKind::kInvalidArgument, "preimage_sample: F_bar must be m x r");
  }
  const Mat s = preimage_s(rg, f_bar);
  const Mat s_pinv = s.completeOrthogonalDecomposition().pseudoInverse();
  const Mat base = f_bar * s_pinv;
  const Mat proj = Mat::Identity(n, n) - s * s_pinv;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat w(m, n);
  for (Index k = 0; k < w.size(); ++k) w(k) = normal(rng);

  double shrink = 1.0;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    const Mat f = base + shrink * w * proj;
    if (preimage_member(rg, f_bar, f)) return f;
    // Alternate between a fresh direction and pulling toward min-norm.
    if (attempt % 2 == 0) {
      for (Index k = 0; k < w.size(); ++k) w(k) = normal(rng);
    } else {
      shrink *= 0.5;
    }
  }
  if (preimage_member(rg, f_bar, base)) return base;
  throw Error(ErrorKind::kDegenerateData,
              "preimage_sample: no admissible preimage member found");
}

Trajectory simulate(const ReducedGame& rg, const Mat& f_bar, const Vec& x1_0,
                    double horizon, double dt) {
  const Index r = rg.r();
  if (f_bar.rows() != rg.m_total() || f_bar.cols() != r || x1_0.size() != r) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: dimension mismatch");
  }
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: need dt > 0 and horizon >= 0");
  }
  const Mat a_cl = rg.j() + rg.b1_all * f_bar;
  if (!linalg::is_stable(a_cl)) {
    throw Error(ErrorKind::kUnstableLoop, "unstable loop");
  }
  const Index steps = static_cast<Index>(std::floor(horizon / dt + 0.5));
  const Mat phi = r > 0 ? Mat((a_cl * dt).exp()) : Mat(0, 0);
  const Mat s = preimage_s(rg, f_bar);

  Trajectory out;
  out.t.resize(steps + 1);
  out.x.resize(steps + 1, rg.n());
  out.u.resize(steps + 1, rg.m_total());
  Vec x1 = x1_0;
  for (Index k = 0; k <= steps; ++k) {
    out.t(k) = static_cast<double>(k) * dt;
    out.x.row(k) = (s * x1).transpose();
    out.u.row(k) = (f_bar * x1).transpose();
    x1 = phi * x1;
  }
  return out;
}

Trajectory simulate_from_state(const ReducedGame& rg, const Mat& f_bar,
                               const Vec& x0, double horizon, double dt) {
  if (x0.size() != rg.n()) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: x0 must have length n");
  }
  const Vec z = rg.w.x.partialPivLu().solve(x0);
  const Vec x1 = z.head(rg.r());
  const Vec expected = preimage_s(rg, f_bar) * x1;
  if (linalg::max_abs(expected - x0) > 1e-8 * (1.0 + linalg::max_abs(x0))) {
    throw Error(ErrorKind::kInconsistentState,
                "inconsistent initial state for this closed loop");
  }
  return simulate(rg, f_bar, x1, horizon, dt);
}

Trajectory simulate_descriptor(const DescriptorGame& g, const Mat& f, const Vec& x0,
                               double horizon, double dt) {
  g.validate();
  if (f.rows() != g.m_total() || f.cols() != g.n() || x0.size() != g.n()) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: dimension mismatch");
  }
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: need dt > 0 and horizon >= 0");
  }
  const WeierstrassData w = weierstrass(Pencil{g.e, g.a + g.b_stacked() * f});
  if (!linalg::is_stable(w.j)) throw Error(ErrorKind::kUnstableLoop, "unstable loop");
  // Homogeneous closed loop: the algebraic coordinates vanish.
  const Vec z = w.x.partialPivLu().solve(x0);
  const Index r = w.r;
  if (linalg::max_abs(z.tail(g.n() - r)) > 1e-8 * (1.0 + linalg::max_abs(z))) {
    throw Error(ErrorKind::kInconsistentState,
                "inconsistent initial state for this closed loop");
  }
  const Index steps = static_cast<Index>(std::floor(horizon / dt + 0.5));
  const Mat phi = r > 0 ? Mat((w.j * dt).exp()) : Mat(0, 0);
  Trajectory out;
  out.t.resize(steps + 1);
  out.x.resize(steps + 1, g.n());
  out.u.resize(steps + 1, g.m_total());
  Vec z1 = z.head(r);
  for (Index k = 0; k <= steps; ++k) {
    const Vec x = w.x1 * z1;
    out.t(k) = static_cast<double>(k) * dt;
    out.x.row(k) = x.transpose();
    out.u.row(k) = (f * x).transpose();
    z1 = phi * z1;
  }
  return out;
}

FeedbackFit fit_feedback(const Trajectory& traj, double rank_tol) {
  const Index k = traj.x.rows();
  const Index n = traj.x.cols();
  if (traj.u.rows() != k) {
    throw Error(ErrorKind::kInvalidArgument, "fit_feedback: x and u sample counts differ");
  }
  if (k < n) {
    throw Error(ErrorKind::kInvalidArgument, "fit_feedback: need at least n samples");
  }
  if (linalg::max_abs(traj.x) == 0.0) {
    throw Error(ErrorKind::kDegenerateData, "fit_feedback: all-zero state samples");
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;
  cod.setThreshold(rank_tol);
  cod.compute(traj.x);
  FeedbackFit out;
  out.f = cod.solve(traj.u).transpose();
  out.rank = cod.rank();
  out.rank_deficient = out.rank < n;
  out.residual = linalg::max_abs(traj.u - traj.x * out.f.transpose());
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (Index j = 0; j < traj.x.cols(); ++j) os << ",x" << j + 1;
  for (Index j = 0; j < traj.u.cols(); ++j) os << ",u" << j + 1;
  os << "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (Index k = 0; k < traj.t.size(); ++k) {
    put(traj.t(k));
    for (Index j = 0; j < traj.x.cols(); ++j) {
      os << ",";
      put(traj.x(k, j));
    }
    for (Index j = 0; j < traj.u.cols(); ++j) {
      os << ",";
      put(traj.u(k, j));
    }
    os << "\n";
  }
}

}  // namespace dgame
