#pragma once

// Inverse problem: the set of cost parameters that make an observed reduced
// feedback a feedback Nash equilibrium.
//
// Player i's parameters are flattened as
//   theta_i = (vech(Q_i), vech(R_i1), ..., vech(R_iN)),
// and the equilibrium conditions become M_i theta_i = 0 together with the
// definiteness requirement R_bar_ii(theta_i) > 0.

#include <cstdint>
#include <optional>
#include <vector>

#include "dgame/forward.hpp"

namespace dgame {

struct ThetaLayout {
  Index n = 0;
  std::vector<Index> m;  // input dimension per player

  static ThetaLayout of(const DescriptorGame& g);

  Index size() const;  // L
  Index q_size() const { return linalg::vech_size(n); }
  Index r_offset(Index j) const;  // start of vech(R_ij) in theta

  Vec pack(const Mat& q, const std::vector<Mat>& r_row) const;
  void unpack(const Vec& theta, Mat* q, std::vector<Mat>* r_row) const;
  /// Indices of theta whose Q entries are diagonal, plus every R entry.
  std::vector<Index> diagonal_q_support() const;
};

CostParameters costs_from_thetas(const ThetaLayout& layout, const std::vector<Vec>& thetas);
std::vector<Vec> thetas_from_costs(const ThetaLayout& layout, const CostParameters& c);

/// Per-player constraint matrices M_i (r m_i x L). Throws
/// Error(kUnstableLoop) when J + B1 F_bar is not Hurwitz, unless
/// require_stable is false, in which case only invertibility of the
/// Lyapunov operator is needed (Error(kSingularLyapunov) otherwise).
std::vector<Mat> assemble(const ReducedGame& rg, const Mat& f_bar,
                          bool require_stable = true);

struct StructuralConstraints {
  bool diagonal_q = false;
  /// Allowed theta indices; applied on top of diagonal_q when both are set.
  std::optional<std::vector<Index>> support;

  std::vector<Index> resolve(const ThetaLayout& layout) const;
};

struct IdentifyOptions {
  double kernel_tol = linalg::kKernelTol;
  double eps_pd = 1e-8;  // margin threshold factor: eps_pd (1 + ||theta||)
  int restarts = 32;
  int ascent_iterations = 400;
  std::uint64_t seed = 0;
  bool require_stable = true;  // passed to assemble()
};

struct PlayerCertificate {
  Mat m;                       // full M_i
  std::vector<Index> support;  // theta indices kept
  Mat kernel;                  // L x k, rows outside the support are zero
  Vec theta;                   // unit norm
  double residual = 0.0;
  double pd_margin = 0.0;
  bool feasible = false;
};

struct InverseCertificate {
  ThetaLayout layout;
  std::vector<PlayerCertificate> players;

  bool feasible() const;
  std::vector<Vec> thetas() const;
};

InverseCertificate identify(const ReducedGame& rg, const Mat& f_bar,
                            const StructuralConstraints& constraints = {},
                            const IdentifyOptions& opts = {});

/// ||M_i theta||_2.
double residual(const PlayerCertificate& cert, const Vec& theta);

/// min eig of R_bar_ii(theta) = R_ii + B2_i^T X2^T Q_i X2 B2_i.
double gamma2_margin(const ReducedGame& rg, Index i, const Vec& theta,
                     const ThetaLayout& layout);

struct DimensionReport {
  Index player = 0;
  Index kernel_dim = 0;
  Index l = 0;       // number of free parameters (support size)
  Index r_mi = 0;
  Index n_mi = 0;
  bool bound_holds = false;  // kernel_dim >= l - r m_i
};

/// Throws Error(kNumericalRank) when the rank-nullity bound fails.
std::vector<DimensionReport> dimension_report(const InverseCertificate& cert,
                                              const ReducedGame& rg);

/// kappa * theta; Error(kInvalidArgument) unless kappa > 0.
Vec scale(const Vec& theta, double kappa);

/// Orthogonal projection of theta onto the certificate's kernel.
Vec project_to_kernel(const PlayerCertificate& cert, const Vec& theta);

struct Behavior {
  EquilibriumSolution solution;
  bool matches = false;
  double distance = 0.0;  // sup-norm of (x, u) difference against the observation
};

struct BehaviorReport {
  std::vector<Behavior> behaviors;
  int matching() const;
};

/// Solves the forward game for `c` and compares every equilibrium with the
/// observed reduced feedback by simulating both from the unit vectors of
/// R^r (horizon 10 s, dt 0.01 s).
BehaviorReport rationalized_behaviors(const ReducedGame& rg, const CostParameters& c,
                                      const Mat& observed_f_bar,
                                      const ForwardOptions& opts = {},
                                      double match_tol = 1e-5);
BehaviorReport rationalized_behaviors(const ReducedGame& rg, const InverseCertificate& cert,
                                      const Mat& observed_f_bar,
                                      const ForwardOptions& opts = {},
                                      double match_tol = 1e-5);

/// sup-norm distance between the (x, u) trajectories of two reduced
/// feedbacks from the unit initial states.
double behavior_distance(const ReducedGame& rg, const Mat& f_bar_a, const Mat& f_bar_b,
                         double horizon = 10.0, double dt = 0.01);

}  // namespace dgame
