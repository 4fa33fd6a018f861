#pragma once

// Stabilizing solutions of the coupled Riccati equations of the reduced
// game, i.e. feedback Nash equilibria, by multistart policy iteration and
// Newton refinement.
//
// For a reduced feedback F_bar with stable A_cl = J + B1 F_bar:
//   A_cl^T P_i + P_i A_cl + [I; F_bar]^T M_i [I; F_bar] = 0       (each i)
//   G_bar F_bar + V_bar^T + B_d^T P = 0                          (stationarity)
// where row block i of the stationarity map is
//   M_i[u_i rows] [I; F_bar] + B1_i^T P_i.

#include <cstdint>
#include <string>
#include <vector>

#include "dgame/game.hpp"

namespace dgame {

struct ForwardOptions {
  int n_starts = 64;
  std::uint64_t seed = 0;
  double tol = 1e-9;  // relative to tolerance_scale()
  int max_policy_iterations = 400;
  int max_newton_iterations = 60;
  double dedup_tol = 1e-5;
};

struct EquilibriumSolution {
  Mat f_bar;           // m x r
  std::vector<Mat> p;  // r x r per player
  Mat a_cl;
  Spectrum spectrum;
  std::vector<double> lyapunov_residuals;
  double stationarity_residual = 0.0;
  int iterations = 0;
};

struct ForwardDiagnostics {
  int starts_tried = 0;
  int starts_converged = 0;
  int starts_aborted = 0;
};

struct ForwardResult {
  std::vector<EquilibriumSolution> solutions;
  ForwardDiagnostics diagnostics;
};

struct CareResidual {
  std::vector<double> lyapunov;  // max-norm per player
  double stationarity = 0.0;     // max-norm
  double max() const;
};

/// Precomputed M_i, G_bar and row slices for repeated residual evaluation.
class ReducedCosts {
 public:
  ReducedCosts(const ReducedGame& rg, const CostParameters& c);

  const ReducedGame& game() const { return *rg_; }
  const Mat& m(Index i) const { return m_[i]; }
  const Mat& gbar() const { return gbar_; }
  /// Rows of M_i belonging to u_i, all r + m columns.
  Mat input_rows(Index i) const;
  /// [I; F_bar]^T M_i [I; F_bar].
  Mat closed_loop_weight(Index i, const Mat& f_bar) const;
  /// Stationarity map value, m x r.
  Mat stationarity(const Mat& f_bar, const std::vector<Mat>& p) const;
  /// Solves the Lyapunov equations for every player under F_bar.
  std::vector<Mat> values(const Mat& f_bar) const;

  double scale() const { return scale_; }

 private:
  const ReducedGame* rg_;
  std::vector<Mat> m_;
  Mat gbar_;
  double scale_ = 1.0;
};

/// 1 + ||c||_max + ||rg||_max.
double tolerance_scale(const ReducedGame& rg, const CostParameters& c);

CareResidual care_residual(const ReducedGame& rg, const CostParameters& c,
                           const Mat& f_bar, const std::vector<Mat>& p);

/// Requires R_bar_ii > 0 for every player (Error(kInvalidArgument)
/// otherwise). Returns the deduplicated, canonically ordered set of
/// stabilizing solutions that pass both residual checks.
ForwardResult solve_fbne(const ReducedGame& rg, const CostParameters& c,
                         const ForwardOptions& opts = {});

double equilibrium_cost(const EquilibriumSolution& sol, Index i, const Vec& x1_0);

struct NashCheck {
  bool ok = true;
  int deviations_tested = 0;
  // Counterexample when !ok.
  Index player = -1;
  Mat deviation;
  Vec x1_0;
  double cost_gap = 0.0;  // deviator cost minus equilibrium cost at x1_0
};

/// Random unilateral deviations F_bar_i + Delta with ||Delta||_F <= radius.
/// For each stable deviated loop the deviator's value matrix must dominate
/// the equilibrium one: min eig(P_i' - P_i) >= -tol (1 + ||P_i||), which
/// covers every initial state at once.
NashCheck verify_nash_local(const ReducedGame& rg, const CostParameters& c,
                            const EquilibriumSolution& sol, int n_trials = 200,
                            double radius = 0.5, std::uint64_t seed = 0,
                            double tol = 1e-8);

}  // namespace dgame
