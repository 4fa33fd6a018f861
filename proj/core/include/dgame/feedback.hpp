#pragma once

// Feedback profiles, the map from full-state to reduced feedback, its
// preimage, closed-loop simulation and least-squares feedback recovery.
//
// A full-state profile is stored stacked (m x n, row block i = F_i); a
// reduced profile likewise (m x r).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgame/game.hpp"

namespace dgame {

std::vector<Mat> split_players(const DescriptorGame& g, const Mat& stacked);
Mat stack_players(const std::vector<Mat>& blocks);

struct FsCheck {
  bool ok = false;
  std::string reason;  // empty when ok
  Spectrum spectrum;   // finite closed-loop spectrum when computable
};

/// F is admissible iff (E, A + BF) is regular, of index <= 1 and has a
/// stable finite spectrum.
FsCheck in_fs(const DescriptorGame& g, const Mat& f);

/// F_bar = (I_m + F X2 B2)^{-1} F X1. Throws Error(kNotIndexPreserving)
/// when the inverse does not exist.
Mat omega(const ReducedGame& rg, const Mat& f);

/// S = X1 - X2 B2 F_bar, so that x0 = S x1_0 and F S = F_bar.
Mat preimage_s(const ReducedGame& rg, const Mat& f_bar);

bool preimage_member(const ReducedGame& rg, const Mat& f_bar, const Mat& f,
                     double tol = 1e-8);

/// F = F_bar S^+ + W (I - S S^+) with W Gaussian from `seed`, shrunk towards
/// the minimum-norm solution until F is admissible. Throws
/// Error(kDegenerateData) if every retry fails.
Mat preimage_sample(const ReducedGame& rg, const Mat& f_bar, std::uint64_t seed,
                    int max_tries = 16);

/// Rows are samples.
struct Trajectory {
  Vec t;
  Mat x;  // samples x n
  Mat u;  // samples x m
};

/// Exact-exponential integration of x1' = (J + B1 F_bar) x1 on a uniform
/// grid, with u = F_bar x1 and x = X1 x1 + X2 x2, x2 = -B2 u.
/// Throws Error(kUnstableLoop) for a non-Hurwitz loop.
Trajectory simulate(const ReducedGame& rg, const Mat& f_bar, const Vec& x1_0,
                    double horizon, double dt);

/// Same, starting from a full state; x0 must be consistent with the loop.
/// Throws Error(kInconsistentState) otherwise.
Trajectory simulate_from_state(const ReducedGame& rg, const Mat& f_bar,
                               const Vec& x0, double horizon, double dt);

/// Full-state path: integrates E x' = (A + B F) x through the Weierstrass
/// form of the closed-loop pencil, u = F x. x0 must lie on the closed-loop
/// consistency manifold. Throws Error(kUnstableLoop), Error(kImpulsiveModes)
/// or Error(kInconsistentState).
Trajectory simulate_descriptor(const DescriptorGame& g, const Mat& f, const Vec& x0,
                               double horizon, double dt);

struct FeedbackFit {
  Mat f;  // m x n, minimum Frobenius norm
  Index rank = 0;
  bool rank_deficient = false;
  double residual = 0.0;  // max |u - F x| over samples
};

/// Throws Error(kDegenerateData) for all-zero state samples and
/// Error(kInvalidArgument) when there are fewer than n samples.
FeedbackFit fit_feedback(const Trajectory& traj, double rank_tol = 1e-10);

/// Header t,x1..xn,u1..um; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace dgame
