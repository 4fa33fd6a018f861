#include "dgame/forward.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "dgame/error.hpp"

namespace dgame {
namespace {

using linalg::LyapunovSolver;
using linalg::max_abs;

Mat stacked_input(const Mat& f_bar) {
  const Index r = f_bar.cols();
  Mat out(r + f_bar.rows(), r);
  out.topRows(r).setIdentity();
  out.bottomRows(f_bar.rows()) = f_bar;
  return out;
}

struct Iterate {
  Mat f_bar;
  std::vector<Mat> p;
  Mat phi;
  double res = 0.0;
};

// Lyapunov solves plus stationarity map; nullopt when the closed loop has
// an eigenvalue pairing that makes the Lyapunov operator singular.
std::optional<Iterate> evaluate(const ReducedCosts& rc, const Mat& f_bar) {
  Iterate it;
  it.f_bar = f_bar;
  try {
    it.p = rc.values(f_bar);
  } catch (const Error&) {
    return std::nullopt;
  }
  it.phi = rc.stationarity(f_bar, it.p);
  it.res = max_abs(it.phi);
  if (!std::isfinite(it.res)) return std::nullopt;
  return it;
}

bool stable(const ReducedCosts& rc, const Mat& f_bar) {
  const ReducedGame& rg = rc.game();
  return linalg::is_stable(rg.j() + rg.b1_all * f_bar);
}

// Damped Lyapunov (policy) iteration. Returns the last iterate and whether
// the stationarity residual met `target`.
std::pair<std::optional<Iterate>, bool> policy_iteration(
    const ReducedCosts& rc, const Mat& f0, double target, int max_iter,
    int* iterations) {
  constexpr double kAlphaFloor = 1.0 / 16.0;
  const Eigen::PartialPivLU<Mat> glu(rc.gbar());
  auto cur = evaluate(rc, f0);
  if (!cur) return {std::nullopt, false};
  double alpha = 1.0;
  for (int k = 0; k < max_iter; ++k) {
    if (cur->res <= target) return {cur, true};
    // F_new solves G F + (Phi - G F) = 0.
    const Mat rest = cur->phi - rc.gbar() * cur->f_bar;
    const Mat f_new = -glu.solve(rest);
    std::optional<Iterate> next;
    while (true) {
      const Mat cand = cur->f_bar + alpha * (f_new - cur->f_bar);
      if (stable(rc, cand)) next = evaluate(rc, cand);
      if (next) break;
      if (alpha <= kAlphaFloor) return {cur, false};
      alpha = std::max(alpha * 0.5, kAlphaFloor);
    }
    if (next->res > cur->res) alpha = std::max(alpha * 0.5, kAlphaFloor);
    cur = std::move(next);
    ++*iterations;
  }
  return {cur, cur->res <= target};
}

// Jacobian of vec(Phi) with respect to vec(F_bar).
Mat stationarity_jacobian(const ReducedCosts& rc, const Iterate& it) {
  const ReducedGame& rg = rc.game();
  const Index r = rg.r();
  const Index m = rg.m_total();
  const Index np = rg.n_players();
  const Mat a_cl = rg.j() + rg.b1_all * it.f_bar;
  const LyapunovSolver lyap(a_cl);
  const Mat in = stacked_input(it.f_bar);
  std::vector<Mat> rows(np);
  std::vector<Mat> m_in(np);
  for (Index i = 0; i < np; ++i) {
    rows[i] = rc.input_rows(i);
    m_in[i] = rc.m(i) * in;
  }
  Mat jac(m * r, m * r);
  Mat delta = Mat::Zero(m, r);
  for (Index col = 0; col < m * r; ++col) {
    delta.setZero();
    delta(col % m, col / m) = 1.0;
    const Mat bd = rg.b1_all * delta;
    Mat dphi(m, r);
    for (Index i = 0; i < np; ++i) {
      // d/dF of [I;F]^T M_i [I;F] is [0;D]^T M_i [I;F] + transpose.
      const Mat half = delta.transpose() * m_in[i].bottomRows(m);
      const Mat q = bd.transpose() * it.p[i] + it.p[i] * bd + half + half.transpose();
      const Mat dp = lyap.solve(q);
      dphi.middleRows(rg.offset(i), rg.m(i)) =
          rows[i].rightCols(m) * delta + rg.b1[i].transpose() * dp;
    }
    jac.col(col) = linalg::vec(dphi);
  }
  return jac;
}

std::pair<std::optional<Iterate>, bool> newton(const ReducedCosts& rc, const Mat& f0,
                                               double target, int max_iter,
                                               int* iterations) {
  auto cur = evaluate(rc, f0);
  if (!cur) return {std::nullopt, false};
  const double polish = target * 1e-3;
  for (int k = 0; k < max_iter && cur->res > polish; ++k) {
    Mat jac;
    try {
      jac = stationarity_jacobian(rc, *cur);
    } catch (const Error&) {
      break;
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) break;
    const Vec step = -lu.solve(linalg::vec(cur->phi));
    const Mat dir = linalg::unvec(step, cur->f_bar.rows(), cur->f_bar.cols());
    const double norm0 = cur->phi.norm();
    std::optional<Iterate> next;
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      auto cand = evaluate(rc, cur->f_bar + t * dir);
      if (cand && cand->phi.norm() < (1.0 - 1e-4 * t) * norm0) {
        next = std::move(cand);
        break;
      }
    }
    if (!next) break;
    cur = std::move(next);
    ++*iterations;
  }
  return {cur, cur->res <= target};
}

Mat lqr_gain(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const Mat& n) {
  // Cross-weighted LQR: min x'Qx + 2x'Nu + u'Ru, via the standard shift.
  const Eigen::LDLT<Mat> rl(r);
  const Mat a_s = a - b * rl.solve(n.transpose());
  const Mat q_s = linalg::symmetrize(q - n * rl.solve(n.transpose()));
  const Mat p = linalg::solve_care(a_s, b, q_s, r);
  return -rl.solve(b.transpose() * p + n.transpose());
}

Mat random_pd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Mat w(n, n);
  for (Index k = 0; k < w.size(); ++k) w(k) = normal(rng);
  return w * w.transpose() + 0.1 * Mat::Identity(n, n);
}

// Start k: per-player LQR for k < N, then alternating joint LQR with random
// weights and random Gaussian stabilizing gains.
std::optional<Mat> start_point(const ReducedCosts& rc, int k, std::uint64_t seed) {
  const ReducedGame& rg = rc.game();
  const Index r = rg.r();
  const Index m = rg.m_total();
  const Index np = rg.n_players();
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(-1.0, 1.3);

  auto joint_lqr = [&]() -> std::optional<Mat> {
    const double s = std::pow(10.0, unif(rng));
    try {
      const Mat q = s * random_pd(r, rng);
      const Mat rr = random_pd(m, rng);
      return lqr_gain(rg.j(), rg.b1_all, q, rr, Mat::Zero(r, m));
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  if (k < np) {
    const Index i = k;
    const Mat& mi = rc.m(i);
    const Index off = r + rg.offset(i);
    const Mat q = mi.topLeftCorner(r, r);
    const Mat n = mi.block(0, off, r, rg.m(i));
    const Mat ri = mi.block(off, off, rg.m(i), rg.m(i));
    Mat f = Mat::Zero(m, r);
    try {
      f.middleRows(rg.offset(i), rg.m(i)) = lqr_gain(rg.j(), rg.b1[i], q, ri, n);
    } catch (const Error&) {
      try {
        f.middleRows(rg.offset(i), rg.m(i)) =
            lqr_gain(rg.j(), rg.b1[i], Mat::Identity(r, r), ri, Mat::Zero(r, rg.m(i)));
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    if (stable(rc, f)) return f;
    return std::nullopt;
  }
  if (k % 2 == 0) return joint_lqr();
  for (int draw = 0; draw < 200; ++draw) {
    const double s = std::pow(10.0, unif(rng));
    Mat f(m, r);
    for (Index e = 0; e < f.size(); ++e) f(e) = s * normal(rng);
    if (stable(rc, f)) return f;
  }
  return joint_lqr();
}

std::vector<long long> rounded_key(const Mat& f) {
  std::vector<long long> key;
  for (Index i = 0; i < f.rows(); ++i) {
    for (Index j = 0; j < f.cols(); ++j) key.push_back(std::llround(f(i, j) * 1e6));
  }
  return key;
}

}  // namespace

double CareResidual::max() const {
  double out = stationarity;
  for (double v : lyapunov) out = std::max(out, v);
  return out;
}

ReducedCosts::ReducedCosts(const ReducedGame& rg, const CostParameters& c) : rg_(&rg) {
  c.validate(rg.game);
  const Index r = rg.r();
  const Index m = rg.m_total();
  gbar_.resize(m, m);
  for (Index i = 0; i < rg.n_players(); ++i) {
    m_.push_back(cost_blocks(rg, c, i).assemble());
    gbar_.middleRows(rg.offset(i), rg.m(i)) =
        m_.back().block(r + rg.offset(i), r, rg.m(i), m);
  }
  scale_ = tolerance_scale(rg, c);
}

Mat ReducedCosts::input_rows(Index i) const {
  return m_[i].middleRows(rg_->r() + rg_->offset(i), rg_->m(i));
}

Mat ReducedCosts::closed_loop_weight(Index i, const Mat& f_bar) const {
  const Mat in = stacked_input(f_bar);
  return linalg::symmetrize(in.transpose() * m_[i] * in);
}

Mat ReducedCosts::stationarity(const Mat& f_bar, const std::vector<Mat>& p) const {
  const Mat in = stacked_input(f_bar);
  Mat phi(rg_->m_total(), rg_->r());
  for (Index i = 0; i < rg_->n_players(); ++i) {
    phi.middleRows(rg_->offset(i), rg_->m(i)) =
        input_rows(i) * in + rg_->b1[i].transpose() * p[i];
  }
  return phi;
}

std::vector<Mat> ReducedCosts::values(const Mat& f_bar) const {
  const LyapunovSolver lyap(rg_->j() + rg_->b1_all * f_bar);
  std::vector<Mat> p;
  for (Index i = 0; i < rg_->n_players(); ++i) {
    p.push_back(lyap.solve(closed_loop_weight(i, f_bar)));
  }
  return p;
}

double tolerance_scale(const ReducedGame& rg, const CostParameters& c) {
  return 1.0 + c.max_abs() + rg.max_abs();
}

CareResidual care_residual(const ReducedGame& rg, const CostParameters& c,
                           const Mat& f_bar, const std::vector<Mat>& p) {
  if (f_bar.rows() != rg.m_total() || f_bar.cols() != rg.r() ||
      static_cast<Index>(p.size()) != rg.n_players()) {
    throw Error(ErrorKind::kInvalidArgument, "care_residual: dimension mismatch");
  }
  const ReducedCosts rc(rg, c);
  const Mat a_cl = rg.j() + rg.b1_all * f_bar;
  CareResidual out;
  for (Index i = 0; i < rg.n_players(); ++i) {
    const Mat res = a_cl.transpose() * p[i] + p[i] * a_cl + rc.closed_loop_weight(i, f_bar);
    out.lyapunov.push_back(max_abs(res));
  }
  out.stationarity = max_abs(rc.stationarity(f_bar, p));
  return out;
}

ForwardResult solve_fbne(const ReducedGame& rg, const CostParameters& c_in,
                         const ForwardOptions& opts) {
  // Equilibria are unchanged by a positive rescaling of all weights, so
  // iterate on weights of order one. A power of two keeps this exact.
  const double cmax = c_in.max_abs();
  const double unit = cmax > 0.0 ? std::exp2(std::round(std::log2(cmax))) : 1.0;
  CostParameters c = c_in;
  for (Mat& q : c.q) q /= unit;
  for (auto& row : c.r) {
    for (Mat& rij : row) rij /= unit;
  }
  const ReducedCosts rc(rg, c);
  const Index np = rg.n_players();
  for (Index i = 0; i < np; ++i) {
    const Index off = rg.r() + rg.offset(i);
    const Mat rbar = rc.m(i).block(off, off, rg.m(i), rg.m(i));
    if (!(linalg::min_eig_sym(rbar) > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "R_bar_" + std::to_string(i + 1) + std::to_string(i + 1) +
                      " is not positive definite");
    }
  }
  if (Eigen::FullPivLU<Mat>(rc.gbar()).rank() < rg.m_total()) {
    throw Error(ErrorKind::kNoConvergence, "G_bar is singular");
  }

  // Also hold the residual to the caller's scale, in normalized units.
  const double target =
      opts.tol * std::min(rc.scale(), tolerance_scale(rg, c_in) / unit);
  ForwardResult out;
  std::vector<EquilibriumSolution> found;

  auto accept = [&](const Iterate& it, int iterations) {
    if (!stable(rc, it.f_bar)) return false;
    const CareResidual res = care_residual(rg, c, it.f_bar, it.p);
    if (res.max() > target) return false;
    const double fmax = max_abs(it.f_bar);
    for (const EquilibriumSolution& s : found) {
      if (max_abs(s.f_bar - it.f_bar) <= opts.dedup_tol * (1.0 + fmax)) return true;
    }
    EquilibriumSolution sol;
    sol.f_bar = it.f_bar;
    sol.p = it.p;
    sol.a_cl = rg.j() + rg.b1_all * it.f_bar;
    sol.spectrum = linalg::eigvals(sol.a_cl);
    sol.lyapunov_residuals = res.lyapunov;
    sol.stationarity_residual = res.stationarity;
    sol.iterations = iterations;
    found.push_back(std::move(sol));
    return true;
  };

  for (int k = 0; k < opts.n_starts; ++k) {
    ++out.diagnostics.starts_tried;
    const auto f0 = start_point(rc, k, opts.seed);
    if (!f0) {
      ++out.diagnostics.starts_aborted;
      continue;
    }
    bool any = false;
    int pi_iters = 0;
    auto [pi_end, pi_ok] =
        policy_iteration(rc, *f0, target, opts.max_policy_iterations, &pi_iters);
    if (pi_end) {
      // Polish whatever policy iteration reached; Newton keeps converged
      // iterates on the same solution.
      int nt_iters = 0;
      auto [pol, pol_ok] =
          newton(rc, pi_end->f_bar, target, opts.max_newton_iterations, &nt_iters);
      if (pol_ok) any |= accept(*pol, pi_iters + nt_iters);
      else if (pi_ok) any |= accept(*pi_end, pi_iters);
    }
    int nt_iters = 0;
    auto [nt_end, nt_ok] = newton(rc, *f0, target, opts.max_newton_iterations, &nt_iters);
    if (nt_ok) any |= accept(*nt_end, nt_iters);
    if (any) ++out.diagnostics.starts_converged;
  }

  std::sort(found.begin(), found.end(),
            [](const EquilibriumSolution& a, const EquilibriumSolution& b) {
              return rounded_key(a.f_bar) < rounded_key(b.f_bar);
            });
  for (EquilibriumSolution& sol : found) {
    for (Mat& p : sol.p) p *= unit;
    for (double& r : sol.lyapunov_residuals) r *= unit;
    sol.stationarity_residual *= unit;
  }
  out.solutions = std::move(found);
  return out;
}

double equilibrium_cost(const EquilibriumSolution& sol, Index i, const Vec& x1_0) {
  return x1_0.dot(sol.p.at(i) * x1_0);
}

NashCheck verify_nash_local(const ReducedGame& rg, const CostParameters& c,
                            const EquilibriumSolution& sol, int n_trials,
                            double radius, std::uint64_t seed, double tol) {
  const ReducedCosts rc(rg, c);
  const Index np = rg.n_players();
  const Index r = rg.r();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  NashCheck out;
  for (int t = 0; t < n_trials; ++t) {
    const Index i = t % np;
    Mat delta(rg.m(i), r);
    for (Index e = 0; e < delta.size(); ++e) delta(e) = normal(rng);
    const double len = radius * (1.0 - unif(rng));
    if (delta.norm() > 0.0) delta *= len / delta.norm();
    Mat f = sol.f_bar;
    f.middleRows(rg.offset(i), rg.m(i)) += delta;
    if (!stable(rc, f)) continue;
    ++out.deviations_tested;
    const Mat p_dev = linalg::solve_lyapunov(rg.j() + rg.b1_all * f,
                                             rc.closed_loop_weight(i, f));
    const Mat gap = linalg::symmetrize(p_dev - sol.p[i]);
    Eigen::SelfAdjointEigenSolver<Mat> es(gap);
    const double lo = es.eigenvalues()(0);
    if (lo < -tol * (1.0 + max_abs(sol.p[i]))) {
      out.ok = false;
      out.player = i;
      out.deviation = delta;
      out.x1_0 = es.eigenvectors().col(0);
      out.cost_gap = lo;
      return out;
    }
  }
  return out;
}

}  // namespace dgame
