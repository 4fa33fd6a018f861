#pragma once

// Independent reference computations used to check the library. None of
// these call into the code paths they are meant to validate.

#include <cstdint>
#include <random>
#include <vector>

#include "dgame/inverse.hpp"

namespace dgame::testing {

using Rng = std::mt19937_64;

Mat gaussian(Index rows, Index cols, Rng& rng);
/// Random matrix with spectrum in [-hi, -lo] (real parts).
Mat random_stable(Index n, Rng& rng, double lo = 0.5, double hi = 3.0);
Mat random_spd(Index n, Rng& rng, double floor = 0.1);
Mat random_sym(Index n, Rng& rng);
Mat random_invertible(Index n, Rng& rng);

/// vec(X Y Z) by explicit summation.
Vec triple_product_vec(const Mat& x, const Mat& y, const Mat& z);

/// Roots of det(lambda E - A) from polynomial interpolation on a circle and
/// a companion matrix. Degree is taken as rank(E).
Spectrum det_polynomial_roots(const Mat& e, const Mat& a, Index degree);

/// Lyapunov solution through the complex eigendecomposition of a_cl.
Mat lyapunov_eig(const Mat& a_cl, const Mat& q);

/// Stabilizing ARE solution by the matrix-sign-function iteration.
Mat care_sign(const Mat& a, const Mat& b, const Mat& q, const Mat& r);

/// Stationarity map of a reduced game evaluated from scratch: explicit
/// congruence weights, eigendecomposition Lyapunov solves.
Mat stationarity_direct(const ReducedGame& rg, const CostParameters& c, const Mat& f_bar,
                        std::vector<Mat>* p_out = nullptr);

/// Constraint matrix of one player by probing the stationarity map with
/// unit parameter vectors: column k is vec(Phi_i(e_k)).
Mat constraint_matrix_probe(const ReducedGame& rg, const Mat& f_bar, Index i);

/// Brute-force enumeration of stabilizing equilibria: many random starts,
/// Newton with finite-difference Jacobian on stationarity_direct.
std::vector<Mat> enumerate_equilibria(const ReducedGame& rg, const CostParameters& c,
                                      int starts, std::uint64_t seed);

/// Trapezoidal integration of E x' = M x with step h; returns samples at
/// every `stride` steps.
Mat integrate_dae(const Mat& e, const Mat& m, const Vec& x0, double h, Index steps,
                  Index stride);

/// Random index-1 game: E = Y^{-T} diag(I_r, 0) X^{-1},
/// A = Y^{-T} diag(J, I) X^{-1}, with random B_i.
struct RandomGame {
  DescriptorGame game;
  Mat x, y, j;
  Index r = 0;
};
RandomGame random_index1_game(Index n, Index r, const std::vector<Index>& m, Rng& rng);

/// Costs with Q_i PSD and R_ij SPD (R_bar_ii > 0 guaranteed).
CostParameters random_costs(const DescriptorGame& g, Rng& rng);

}  // namespace dgame::testing
