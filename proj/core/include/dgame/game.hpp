#pragma once

// Descriptor game data and its reduction to an r-dimensional standard game.
//
// Inputs are stacked player-ascending everywhere: u = col(u_1, ..., u_N),
// B = [B_1 ... B_N], and row block i of a stacked feedback belongs to
// player i.

#include <vector>

#include "dgame/pencil.hpp"

namespace dgame {

struct DescriptorGame {
  Mat e;
  Mat a;
  std::vector<Mat> b;  // n x m_i per player

  Index n() const { return a.rows(); }
  Index n_players() const { return static_cast<Index>(b.size()); }
  Index m(Index i) const { return b[i].cols(); }
  Index m_total() const;
  /// Row offset of player i inside a stacked m-vector.
  Index offset(Index i) const;
  Mat b_stacked() const;

  /// Throws Error(kInvalidArgument) on inconsistent dimensions.
  void validate() const;
};

/// Per-player weights. r[i][j] is R_ij (m_j x m_j).
struct CostParameters {
  std::vector<Mat> q;
  std::vector<std::vector<Mat>> r;

  void validate(const DescriptorGame& g) const;
  double max_abs() const;
};

struct ReducedGame {
  DescriptorGame game;
  WeierstrassData w;
  std::vector<Mat> b1;  // r x m_i
  std::vector<Mat> b2;  // (n - r) x m_i
  Mat b1_all;           // r x m
  Mat b2_all;           // (n - r) x m

  Index r() const { return w.r; }
  Index n() const { return game.n(); }
  Index n_players() const { return game.n_players(); }
  Index m(Index i) const { return game.m(i); }
  Index m_total() const { return game.m_total(); }
  Index offset(Index i) const { return game.offset(i); }
  const Mat& j() const { return w.j; }
  /// Max entry of J, B1 and B2; used for tolerance scaling.
  double max_abs() const;
};

/// Checks Assumptions (regular, index <= 1, each (J, B1_i) stabilizable)
/// and returns the reduced structure.
ReducedGame reduce_game(const DescriptorGame& g);
/// Same, with a caller-supplied decomposition of (E, A).
ReducedGame reduce_game(const DescriptorGame& g, const WeierstrassData& w);

/// Blocks of M_i = T^T blkdiag(Q_i, R_i) T with T = [X1, -X2 B2; 0, I_m].
struct CostBlocks {
  Mat q_bar;                          // r x r
  std::vector<Mat> v_bar;             // r x m_j
  std::vector<Mat> r_bar;             // m_j x m_j
  std::vector<std::vector<Mat>> s_bar;  // s_bar[j][k], m_j x m_k, j != k

  /// Full (r + m) x (r + m) matrix M_i.
  Mat assemble() const;
};

CostBlocks cost_blocks(const ReducedGame& rg, const CostParameters& c, Index i);

/// M_i directly as the congruence product.
Mat cost_matrix(const ReducedGame& rg, const CostParameters& c, Index i);

/// m x m matrix with diagonal blocks R_bar_ii and off-diagonal blocks S_bar_iij.
Mat gbar_matrix(const ReducedGame& rg, const CostParameters& c);

}  // namespace dgame
