// Randomized properties over seeded generated instances. Every generator
// draws from a fixed seed so failures reproduce exactly; the failing
// instance seed is printed with each assertion.

#include <gtest/gtest.h>

#include "dgame/error.hpp"
#include "dgame/feedback.hpp"
#include "dgame/inverse.hpp"
#include "oracles.hpp"

namespace dgame {
namespace {

using linalg::max_abs;
using testing::Rng;

// A random game together with the forward solution it was generated around.
struct Instance {
  std::uint64_t seed = 0;
  ReducedGame rg;
  CostParameters costs;
  EquilibriumSolution sol;
};

// Draws n in [2, 6], r in [1, n - 1], N in [1, 3], m_i in {1, 2}; rejects
// instances that violate the standing assumptions or have no equilibrium.
std::optional<Instance> draw_instance(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<Index> pick_n(2, 6);
  std::uniform_int_distribution<Index> pick_players(1, 3);
  std::uniform_int_distribution<Index> pick_m(1, 2);
  const Index n = pick_n(rng);
  const Index r = std::uniform_int_distribution<Index>(1, n - 1)(rng);
  std::vector<Index> m(pick_players(rng));
  for (Index& mi : m) mi = pick_m(rng);
  const auto rgm = testing::random_index1_game(n, r, m, rng);
  Instance inst;
  inst.seed = seed;
  try {
    inst.rg = reduce_game(rgm.game);
    inst.costs = testing::random_costs(rgm.game, rng);
    ForwardOptions opts;
    opts.n_starts = 16;
    opts.seed = seed;
    const ForwardResult res = solve_fbne(inst.rg, inst.costs, opts);
    if (res.solutions.empty()) return std::nullopt;
    inst.sol = res.solutions.front();
  } catch (const Error&) {
    return std::nullopt;
  }
  return inst;
}

const std::vector<Instance>& instances() {
  static const std::vector<Instance> all = [] {
    std::vector<Instance> out;
    for (std::uint64_t s = 1000; out.size() < 50 && s < 1400; ++s) {
      if (auto inst = draw_instance(s)) out.push_back(std::move(*inst));
    }
    return out;
  }();
  return all;
}

TEST(Generator, ProducesEnoughInstances) { EXPECT_EQ(instances().size(), 50u); }

TEST(Vectorization, TripleProduct) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<Index> d(1, 5);
    const Index a = d(rng), b = d(rng), c = d(rng), e = d(rng);
    const Mat x = testing::gaussian(a, b, rng);
    const Mat y = testing::gaussian(b, c, rng);
    const Mat z = testing::gaussian(c, e, rng);
    const Vec lhs = testing::triple_product_vec(x, y, z);
    const Vec rhs = linalg::kron(z.transpose(), x) * linalg::vec(y);
    EXPECT_LE(max_abs(lhs - rhs), 1e-12 * (1 + max_abs(lhs))) << "trial " << t;
  }
}

TEST(Vectorization, Duplication) {
  Rng rng(2);
  for (Index n = 1; n <= 6; ++n) {
    for (int t = 0; t < 10; ++t) {
      const Mat a = testing::random_sym(n, rng);
      EXPECT_LE(max_abs(linalg::duplication_matrix(n) * linalg::vech(a) - linalg::vec(a)), 0.0);
    }
  }
}

TEST(Lyapunov, ResidualAndOracle) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 8;
    const Mat a = testing::random_stable(n, rng);
    const Mat q = testing::random_sym(n, rng);
    const Mat p = linalg::solve_lyapunov(a, q);
    EXPECT_LE(max_abs(a.transpose() * p + p * a + q), 1e-10 * (1 + max_abs(q))) << "trial " << t;
    EXPECT_TRUE(linalg::is_symmetric(p));
    EXPECT_LE(max_abs(p - testing::lyapunov_eig(a, q)), 1e-8 * (1 + max_abs(p)));
  }
}

TEST(KernelBasis, Orthonormal) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Index rows = 1 + t % 5;
    const Index cols = rows + 1 + t % 4;
    const Mat m = testing::gaussian(rows, cols, rng);
    const Mat z = linalg::kernel_basis(m);
    EXPECT_EQ(z.cols(), cols - rows);
    EXPECT_LE(max_abs(z.transpose() * z - Mat::Identity(z.cols(), z.cols())), 1e-12);
    const double smax = Eigen::JacobiSVD<Mat>(m).singularValues()(0);
    EXPECT_LE(max_abs(m * z), 10 * linalg::kKernelTol * smax);
  }
}

TEST(Pencil, ReconstructionRoundTrip) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 7;
    const Index r = 1 + (t / 7) % (n - 1);
    const auto rgm = testing::random_index1_game(n, r, {1}, rng);
    const Pencil p{rgm.game.e, rgm.game.a};
    const WeierstrassData w = weierstrass(p);
    ASSERT_EQ(w.r, r) << "trial " << t;
    const CanonicalResidual res = canonical_residual(p, w);
    const double scale = 1 + max_abs(p.a) + max_abs(w.j);
    EXPECT_LE(res.e, 1e-8 * scale) << "trial " << t;
    EXPECT_LE(res.a, 1e-8 * scale) << "trial " << t;
  }
}

TEST(ForwardSolutions, ResidualsAndStability) {
  for (const Instance& inst : instances()) {
    const double scale = tolerance_scale(inst.rg, inst.costs);
    EXPECT_TRUE(linalg::is_stable(inst.sol.a_cl)) << "seed " << inst.seed;
    const CareResidual res = care_residual(inst.rg, inst.costs, inst.sol.f_bar, inst.sol.p);
    EXPECT_LE(res.max(), 1e-9 * scale) << "seed " << inst.seed;
    // Independent evaluation of the stationarity map.
    EXPECT_LE(max_abs(testing::stationarity_direct(inst.rg, inst.costs, inst.sol.f_bar)),
              1e-7 * scale)
        << "seed " << inst.seed;
  }
}

TEST(RoundTrip, TrueCostsInKernelAndCone) {
  for (const Instance& inst : instances()) {
    const ThetaLayout layout = ThetaLayout::of(inst.rg.game);
    const auto thetas = thetas_from_costs(layout, inst.costs);
    const auto ms = assemble(inst.rg, inst.sol.f_bar);
    const double scale = tolerance_scale(inst.rg, inst.costs);
    for (Index i = 0; i < inst.rg.n_players(); ++i) {
      EXPECT_LE((ms[i] * thetas[i]).norm(), 1e-7 * scale) << "seed " << inst.seed << " player " << i;
      EXPECT_GT(gamma2_margin(inst.rg, i, thetas[i], layout), 0.0);
    }
    const InverseCertificate cert = identify(inst.rg, inst.sol.f_bar);
    EXPECT_TRUE(cert.feasible()) << "seed " << inst.seed;
  }
}

TEST(RoundTrip, DimensionBound) {
  for (const Instance& inst : instances()) {
    const InverseCertificate cert = identify(inst.rg, inst.sol.f_bar);
    for (const DimensionReport& d : dimension_report(cert, inst.rg)) {
      EXPECT_TRUE(d.bound_holds) << "seed " << inst.seed;
      EXPECT_GE(d.kernel_dim, d.l - d.r_mi);
    }
  }
}

TEST(RoundTrip, ProductStructure) {
  // The feasible set is a product over players: the true weights of player
  // 0 combined with identified weights for everyone else still make the
  // observed feedback an equilibrium.
  int checked = 0;
  for (const Instance& inst : instances()) {
    if (inst.rg.n_players() < 2 || checked >= 15) continue;
    ++checked;
    const InverseCertificate cert = identify(inst.rg, inst.sol.f_bar);
    ASSERT_TRUE(cert.feasible());
    auto thetas = cert.thetas();
    thetas[0] = thetas_from_costs(cert.layout, inst.costs)[0];
    const CostParameters mixed = costs_from_thetas(cert.layout, thetas);
    const CareResidual res = care_residual(inst.rg, mixed, inst.sol.f_bar,
                                           ReducedCosts(inst.rg, mixed).values(inst.sol.f_bar));
    EXPECT_LE(res.stationarity, 1e-7 * tolerance_scale(inst.rg, mixed)) << "seed " << inst.seed;
  }
  EXPECT_GT(checked, 5);
}

TEST(Scaling, FeasibilityAndEquilibriaInvariant) {
  int checked = 0;
  for (const Instance& inst : instances()) {
    if (checked++ >= 15) break;
    const ThetaLayout layout = ThetaLayout::of(inst.rg.game);
    const auto thetas = thetas_from_costs(layout, inst.costs);
    const auto ms = assemble(inst.rg, inst.sol.f_bar);
    for (double kappa : {1e-6, 1.0, 1e6}) {
      std::vector<Vec> scaled;
      for (Index i = 0; i < inst.rg.n_players(); ++i) {
        scaled.push_back(scale(thetas[i], kappa));
        EXPECT_LE((ms[i] * scaled.back()).norm(), 1e-7 * kappa * tolerance_scale(inst.rg, inst.costs));
        EXPECT_GT(gamma2_margin(inst.rg, i, scaled.back(), layout), 0.0);
      }
      const CostParameters c = costs_from_thetas(layout, scaled);
      ForwardOptions opts;
      opts.n_starts = 16;
      const ForwardResult res = solve_fbne(inst.rg, c, opts);
      bool found = false;
      for (const auto& s : res.solutions) {
        found = found || max_abs(s.f_bar - inst.sol.f_bar) <= 1e-6 * (1 + max_abs(s.f_bar));
      }
      EXPECT_TRUE(found) << "seed " << inst.seed << " kappa " << kappa;
    }
  }
}

TEST(Gauge, NullityAndTrajectoriesInvariant) {
  int checked = 0;
  for (const Instance& inst : instances()) {
    if (checked++ >= 20) break;
    Rng rng(inst.seed + 7);
    const Index r = inst.rg.r();
    const Index q = inst.rg.n() - r;
    const Mat t = testing::random_invertible(r, rng);
    const WeierstrassData w2 = regauge(inst.rg.w, t, testing::random_invertible(q, rng));
    const ReducedGame rg2 = reduce_game(inst.rg.game, w2);
    // Reduced feedbacks transform as F_bar T.
    const Mat f2 = inst.sol.f_bar * t;
    const ThetaLayout layout = ThetaLayout::of(inst.rg.game);
    const auto thetas = thetas_from_costs(layout, inst.costs);
    const auto ms2 = assemble(rg2, f2);
    for (Index i = 0; i < inst.rg.n_players(); ++i) {
      EXPECT_LE((ms2[i] * thetas[i]).norm(), 1e-6 * (1 + ms2[i].norm()) * thetas[i].norm())
          << "seed " << inst.seed;
    }
    EXPECT_TRUE(linalg::spectra_match(linalg::eigvals(rg2.j() + rg2.b1_all * f2),
                                      inst.sol.spectrum, 1e-6));
    // Same consistent state, same full-state behavior.
    const Vec x0 = consistent_initial(inst.rg.w, inst.rg.b2_all, inst.sol.f_bar, Vec::Ones(r));
    const Trajectory a = simulate_from_state(inst.rg, inst.sol.f_bar, x0, 2.0, 0.05);
    const Trajectory b = simulate_from_state(rg2, f2, x0, 2.0, 0.05);
    EXPECT_LE(max_abs(a.x - b.x), 1e-6 * (1 + max_abs(a.x)));
    EXPECT_LE(max_abs(a.u - b.u), 1e-6 * (1 + max_abs(a.u)));
  }
}

TEST(Feedback, PreimageAndSpectrum) {
  for (const Instance& inst : instances()) {
    Mat f;
    try {
      f = preimage_sample(inst.rg, inst.sol.f_bar, inst.seed);
    } catch (const Error&) {
      ADD_FAILURE() << "no admissible preimage sample, seed " << inst.seed;
      continue;
    }
    EXPECT_LE(max_abs(omega(inst.rg, f) - inst.sol.f_bar), 1e-8 * (1 + max_abs(inst.sol.f_bar)))
        << "seed " << inst.seed;
    const FsCheck fs = in_fs(inst.rg.game, f);
    ASSERT_TRUE(fs.ok) << fs.reason;
    EXPECT_TRUE(linalg::spectra_match(fs.spectrum, inst.sol.spectrum, 1e-6)) << "seed " << inst.seed;
  }
}

TEST(Nash, LocalDeviations) {
  int checked = 0;
  for (const Instance& inst : instances()) {
    if (checked++ >= 20) break;
    const NashCheck chk = verify_nash_local(inst.rg, inst.costs, inst.sol, 200, 0.5, inst.seed);
    EXPECT_TRUE(chk.ok) << "seed " << inst.seed << " player " << chk.player << " gap " << chk.cost_gap;
  }
}

}  // namespace
}  // namespace dgame
