#include "dgame/game.hpp"

#include <algorithm>
#include <string>

#include "dgame/error.hpp"

namespace dgame {

Index DescriptorGame::m_total() const {
  Index m = 0;
  for (const Mat& bi : b) m += bi.cols();
  return m;
}

Index DescriptorGame::offset(Index i) const {
  Index off = 0;
  for (Index k = 0; k < i; ++k) off += b[k].cols();
  return off;
}

Mat DescriptorGame::b_stacked() const {
  Mat out(n(), m_total());
  for (Index i = 0; i < n_players(); ++i) {
    out.middleCols(offset(i), m(i)) = b[i];
  }
  return out;
}

void DescriptorGame::validate() const {
  const Index nn = a.rows();
  if (a.cols() != nn || e.rows() != nn || e.cols() != nn) {
    throw Error(ErrorKind::kInvalidArgument, "game: E and A must be n x n");
  }
  if (b.empty()) throw Error(ErrorKind::kInvalidArgument, "game: no players");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].rows() != nn || b[i].cols() < 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  "game: B_" + std::to_string(i + 1) + " must be n x m_i, m_i >= 1");
    }
  }
}

void CostParameters::validate(const DescriptorGame& g) const {
  const Index np = g.n_players();
  if (static_cast<Index>(q.size()) != np || static_cast<Index>(r.size()) != np) {
    throw Error(ErrorKind::kInvalidArgument, "costs: need one Q and one R row per player");
  }
  for (Index i = 0; i < np; ++i) {
    if (q[i].rows() != g.n() || q[i].cols() != g.n()) {
      throw Error(ErrorKind::kInvalidArgument, "costs: Q_i must be n x n");
    }
    if (!linalg::is_symmetric(q[i])) {
      throw Error(ErrorKind::kNotSymmetric, "costs: Q_i not symmetric");
    }
    if (static_cast<Index>(r[i].size()) != np) {
      throw Error(ErrorKind::kInvalidArgument, "costs: R must be an N x N table");
    }
    for (Index j = 0; j < np; ++j) {
      if (r[i][j].rows() != g.m(j) || r[i][j].cols() != g.m(j)) {
        throw Error(ErrorKind::kInvalidArgument, "costs: R_ij must be m_j x m_j");
      }
      if (!linalg::is_symmetric(r[i][j])) {
        throw Error(ErrorKind::kNotSymmetric, "costs: R_ij not symmetric");
      }
    }
  }
}

double CostParameters::max_abs() const {
  double out = 0.0;
  for (const Mat& qi : q) out = std::max(out, linalg::max_abs(qi));
  for (const auto& row : r) {
    for (const Mat& rij : row) out = std::max(out, linalg::max_abs(rij));
  }
  return out;
}

double ReducedGame::max_abs() const {
  return std::max({linalg::max_abs(w.j), linalg::max_abs(b1_all),
                   linalg::max_abs(b2_all)});
}

ReducedGame reduce_game(const DescriptorGame& g) {
  g.validate();
  return reduce_game(g, weierstrass(Pencil{g.e, g.a}));
}

ReducedGame reduce_game(const DescriptorGame& g, const WeierstrassData& w) {
  g.validate();
  if (w.n() != g.n()) {
    throw Error(ErrorKind::kInvalidArgument, "reduce_game: decomposition size mismatch");
  }
  ReducedGame rg;
  rg.game = g;
  rg.w = w;
  const Index r = w.r;
  const Index q = g.n() - r;
  const Mat bt = w.y.transpose() * g.b_stacked();
  rg.b1_all = bt.topRows(r);
  rg.b2_all = bt.bottomRows(q);
  for (Index i = 0; i < g.n_players(); ++i) {
    rg.b1.push_back(rg.b1_all.middleCols(g.offset(i), g.m(i)));
    rg.b2.push_back(rg.b2_all.middleCols(g.offset(i), g.m(i)));
    if (!linalg::is_stabilizable(w.j, rg.b1.back())) {
      throw Error(ErrorKind::kNotStabilizable,
                  "(J, B1_" + std::to_string(i + 1) + ") is not stabilizable");
    }
  }
  return rg;
}

CostBlocks cost_blocks(const ReducedGame& rg, const CostParameters& c, Index i) {
  const Index np = rg.n_players();
  const Mat& qi = c.q[i];
  const Mat& x1 = rg.w.x1;
  const Mat& x2 = rg.w.x2;
  CostBlocks out;
  out.q_bar = x1.transpose() * qi * x1;
  // W_j = X2 B2_j, the algebraic-state response to u_j.
  std::vector<Mat> wj(np);
  for (Index j = 0; j < np; ++j) wj[j] = x2 * rg.b2[j];
  out.s_bar.assign(np, std::vector<Mat>(np));
  for (Index j = 0; j < np; ++j) {
    out.v_bar.push_back(-x1.transpose() * qi * wj[j]);
    out.r_bar.push_back(c.r[i][j] + wj[j].transpose() * qi * wj[j]);
    for (Index k = 0; k < np; ++k) {
      if (k != j) out.s_bar[j][k] = wj[j].transpose() * qi * wj[k];
    }
  }
  return out;
}

Mat CostBlocks::assemble() const {
  const Index r = q_bar.rows();
  const Index np = static_cast<Index>(r_bar.size());
  std::vector<Index> off(np + 1, r);
  for (Index j = 0; j < np; ++j) off[j + 1] = off[j] + r_bar[j].rows();
  const Index dim = off[np];
  Mat m = Mat::Zero(dim, dim);
  m.topLeftCorner(r, r) = q_bar;
  for (Index j = 0; j < np; ++j) {
    const Index mj = r_bar[j].rows();
    m.block(0, off[j], r, mj) = v_bar[j];
    m.block(off[j], 0, mj, r) = v_bar[j].transpose();
    m.block(off[j], off[j], mj, mj) = r_bar[j];
    for (Index k = 0; k < np; ++k) {
      if (k != j) m.block(off[j], off[k], mj, r_bar[k].rows()) = s_bar[j][k];
    }
  }
  return m;
}

Mat cost_matrix(const ReducedGame& rg, const CostParameters& c, Index i) {
  const Index n = rg.n();
  const Index r = rg.r();
  const Index m = rg.m_total();
  Mat t = Mat::Zero(n + m, r + m);
  t.topLeftCorner(n, r) = rg.w.x1;
  t.topRightCorner(n, m) = -rg.w.x2 * rg.b2_all;
  t.bottomRightCorner(m, m).setIdentity();
  Mat w = Mat::Zero(n + m, n + m);
  w.topLeftCorner(n, n) = c.q[i];
  for (Index j = 0; j < rg.n_players(); ++j) {
    w.block(n + rg.offset(j), n + rg.offset(j), rg.m(j), rg.m(j)) = c.r[i][j];
  }
  return t.transpose() * w * t;
}

Mat gbar_matrix(const ReducedGame& rg, const CostParameters& c) {
  const Index m = rg.m_total();
  Mat g(m, m);
  for (Index i = 0; i < rg.n_players(); ++i) {
    const CostBlocks blk = cost_blocks(rg, c, i);
    for (Index j = 0; j < rg.n_players(); ++j) {
      g.block(rg.offset(i), rg.offset(j), rg.m(i), rg.m(j)) =
          i == j ? blk.r_bar[i] : blk.s_bar[i][j];
    }
  }
  return g;
}

}  // namespace dgame
