#include "dgame/pencil.hpp"

#include <algorithm>
#include <cmath>

#include "dgame/error.hpp"

namespace dgame {
namespace {

void check_square(const Pencil& p) {
  const Index n = p.e.rows();
  if (p.e.cols() != n || p.a.rows() != n || p.a.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument,
                "pencil: E and A must be square and of equal size");
  }
}

double lambda_scale(const Pencil& p) {
  const double ne = p.e.norm();
  const double na = p.a.norm();
  if (ne == 0.0 || na == 0.0) return 1.0;
  return na / ne;
}

// |det(M)| relative to Hadamard's bound prod_i ||row_i||.
double relative_det(const Mat& m) {
  double bound = 1.0;
  for (Index i = 0; i < m.rows(); ++i) {
    const double rn = m.row(i).norm();
    if (rn == 0.0) return 0.0;
    bound *= rn;
  }
  return std::abs(m.partialPivLu().determinant()) / bound;
}

// Sample point at which lambda E - A is best conditioned, or nullopt.
std::optional<double> regular_point(const Pencil& p) {
  const Index n = p.e.rows();
  const double s = lambda_scale(p);
  double best = 0.0;
  std::optional<double> arg;
  for (Index k = 1; k <= n + 1; ++k) {
    const double lam = static_cast<double>(k) * s;
    const double d = relative_det(lam * p.e - p.a);
    if (d > best) {
      best = d;
      arg = lam;
    }
  }
  if (best > 1e-10) return arg;
  return std::nullopt;
}

// Index-1 test on the trailing block. Measured against A as a whole: the
// block's own conditioning says nothing when it is 1x1.
bool a22_invertible(const Mat& a22, const Mat& a) {
  const Vec sv = Eigen::JacobiSVD<Mat>(a22).singularValues();
  const double ref = std::max(Eigen::JacobiSVD<Mat>(a).singularValues()(0), 1e-300);
  return sv(sv.size() - 1) > 1e-12 * ref && sv(sv.size() - 1) > 1e-12 * sv(0);
}

struct Split {
  Mat u, v;
  Vec sigma;
  Index r = 0;
};

Split split_e(const Mat& e) {
  const Index n = e.rows();
  Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Split s;
  s.u = svd.matrixU();
  s.v = svd.matrixV();
  s.sigma = svd.singularValues();
  const double smax = n > 0 ? s.sigma(0) : 0.0;
  while (s.r < n && smax > 0.0 && s.sigma(s.r) > kRankTolE * smax) ++s.r;
  // Sign convention: the largest entry of each column of V is positive.
  for (Index k = 0; k < n; ++k) {
    Index arg;
    s.v.col(k).cwiseAbs().maxCoeff(&arg);
    if (s.v(arg, k) < 0.0) {
      s.v.col(k) *= -1.0;
      s.u.col(k) *= -1.0;
    }
  }
  return s;
}

Index rank_abs(const Mat& m, double cut) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  Index rank = 0;
  const Vec& s = svd.singularValues();
  while (rank < s.size() && s(rank) > cut) ++rank;
  return rank;
}

}  // namespace

bool is_regular(const Pencil& p) {
  check_square(p);
  const Index n = p.e.rows();
  if (n == 0) return true;
  if (regular_point(p)) return true;
  // With one matrix zero the determinant is a monomial in lambda.
  if (linalg::max_abs(p.e) == 0.0 || linalg::max_abs(p.a) == 0.0) return false;
  // All samples nearly singular: decide from the generalized Schur form. A
  // singular pencil shows a diagonal pair (s_kk, t_kk) with both entries zero.
  Eigen::RealQZ<Mat> qz(p.a, p.e);
  const Mat& s = qz.matrixS();
  const Mat& t = qz.matrixT();
  const double sa = std::max(1.0, linalg::max_abs(p.a));
  const double se = std::max(1.0, linalg::max_abs(p.e));
  for (Index k = 0; k < n; ++k) {
    if (std::abs(s(k, k)) <= 1e-10 * sa && std::abs(t(k, k)) <= 1e-10 * se) {
      return false;
    }
  }
  return true;
}

int index_of(const Pencil& p) {
  check_square(p);
  const Index n = p.e.rows();
  if (!is_regular(p)) {
    throw Error(ErrorKind::kIrregularPencil, "irregular pencil");
  }
  const Split s = split_e(p.e);
  if (s.r == n) return 0;
  const Mat at = s.u.transpose() * p.a * s.v;
  const Mat a22 = at.bottomRightCorner(n - s.r, n - s.r);
  if (a22_invertible(a22, p.a)) return 1;
  // Index from the Drazin rank sequence of (lambda0 E - A)^{-1} E.
  const auto lam = regular_point(p);
  const double l0 = lam ? *lam : lambda_scale(p);
  const Mat eh = (l0 * p.e - p.a).partialPivLu().solve(p.e);
  const double base = std::max(1.0, linalg::max_abs(eh));
  Mat pw = Mat::Identity(n, n);
  Index prev = n;
  for (int k = 0; k <= n; ++k) {
    Mat next = pw * eh;
    const double cut = 1e-8 * std::pow(base, k + 1);
    const Index rk = rank_abs(next, cut);
    if (rk == prev) return k;
    prev = rk;
    pw = std::move(next);
  }
  return static_cast<int>(n);
}

WeierstrassData weierstrass(const Pencil& p) {
  check_square(p);
  const Index n = p.e.rows();
  if (!is_regular(p)) {
    throw Error(ErrorKind::kIrregularPencil, "irregular pencil");
  }
  const Split s = split_e(p.e);
  const Index r = s.r;
  const Index q = n - r;
  const Mat at = s.u.transpose() * p.a * s.v;
  const Mat a11 = at.topLeftCorner(r, r);
  const Mat a12 = at.topRightCorner(r, q);
  const Mat a21 = at.bottomLeftCorner(q, r);
  const Mat a22 = at.bottomRightCorner(q, q);

  Mat a22_inv = Mat(q, q);
  if (q > 0) {
    if (!a22_invertible(a22, p.a)) {
      throw Error(ErrorKind::kImpulsiveModes,
                  "impulsive modes present (index >= 2)");
    }
    a22_inv = a22.fullPivLu().inverse();
  }

  // Left elimination L = [I, -A12 A22^-1; 0, I], right R = [I, 0; -A22^-1 A21, I],
  // scaling D = diag(Sigma_r^-1, A22^-1).
  Mat left = Mat::Identity(n, n);
  left.topRightCorner(r, q) = -a12 * a22_inv;
  Mat right = Mat::Identity(n, n);
  right.bottomLeftCorner(q, r) = -a22_inv * a21;
  Mat scale = Mat::Zero(n, n);
  for (Index k = 0; k < r; ++k) scale(k, k) = 1.0 / s.sigma(k);
  scale.bottomRightCorner(q, q) = a22_inv;

  WeierstrassData w;
  w.r = r;
  w.index = q == 0 ? 0 : 1;
  w.x = s.v * right;
  const Mat yt = scale * left * s.u.transpose();
  w.y = yt.transpose();
  w.j = scale.topLeftCorner(r, r) * (a11 - a12 * a22_inv * a21);
  w.x1 = w.x.leftCols(r);
  w.x2 = w.x.rightCols(q);
  return w;
}

Spectrum finite_spectrum(const Pencil& p) {
  return linalg::eigvals(weierstrass(p).j);
}

Vec consistent_initial(const WeierstrassData& w, const Mat& b2_bar,
                       const Mat& f_bar, const Vec& x1_0) {
  if (x1_0.size() != w.r || f_bar.cols() != w.r ||
      b2_bar.rows() != w.x2.cols() || b2_bar.cols() != f_bar.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "consistent_initial: dimension mismatch");
  }
  return (w.x1 - w.x2 * b2_bar * f_bar) * x1_0;
}

WeierstrassData regauge(const WeierstrassData& w, const Mat& t, const Mat& s) {
  const Index r = w.r;
  const Index q = w.n() - r;
  if (t.rows() != r || t.cols() != r || s.rows() != q || s.cols() != q) {
    throw Error(ErrorKind::kInvalidArgument, "regauge: dimension mismatch");
  }
  Eigen::FullPivLU<Mat> lt(t);
  Eigen::FullPivLU<Mat> ls(s);
  if ((r > 0 && !lt.isInvertible()) || (q > 0 && !ls.isInvertible())) {
    throw Error(ErrorKind::kInvalidArgument, "regauge: singular gauge");
  }
  const Mat t_inv = r > 0 ? Mat(lt.inverse()) : Mat(0, 0);
  const Mat s_inv = q > 0 ? Mat(ls.inverse()) : Mat(0, 0);
  WeierstrassData out = w;
  out.x1 = w.x1 * t;
  out.x2 = w.x2 * s;
  out.x << out.x1, out.x2;
  Mat yt = w.y.transpose();
  yt.topRows(r) = t_inv * yt.topRows(r);
  yt.bottomRows(q) = s_inv * yt.bottomRows(q);
  out.y = yt.transpose();
  out.j = t_inv * w.j * t;
  return out;
}

CanonicalResidual canonical_residual(const Pencil& p, const WeierstrassData& w) {
  const Index n = w.n();
  Mat ec = Mat::Zero(n, n);
  ec.topLeftCorner(w.r, w.r).setIdentity();
  Mat ac = Mat::Identity(n, n);
  ac.topLeftCorner(w.r, w.r) = w.j;
  CanonicalResidual res;
  res.e = linalg::max_abs(w.y.transpose() * p.e * w.x - ec);
  res.a = linalg::max_abs(w.y.transpose() * p.a * w.x - ac);
  return res;
}

}  // namespace dgame
