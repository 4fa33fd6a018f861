#include "dgame/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dgame/error.hpp"

namespace dgame::linalg {

double max_abs(const Mat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.transpose()) <= tol * (1.0 + max_abs(a));
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vec vec(const Mat& a) {
  return Eigen::Map<const Vec>(a.data(), a.size());
}

Mat unvec(const Vec& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw Error(ErrorKind::kInvalidArgument, "unvec: length mismatch");
  }
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Vec vech(const Mat& sym, double tol) {
  if (!is_symmetric(sym, tol)) {
    throw Error(ErrorKind::kNotSymmetric, "vech: input is not symmetric");
  }
  const Index n = sym.rows();
  Vec out(vech_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) out(k++) = sym(i, j);
  }
  return out;
}

Mat unvech(const Vec& v, Index n) {
  if (v.size() != vech_size(n)) {
    throw Error(ErrorKind::kInvalidArgument, "unvech: length mismatch");
  }
  Mat out(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      out(i, j) = v(k);
      out(j, i) = v(k);
      ++k;
    }
  }
  return out;
}

Mat duplication_matrix(Index n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "duplication_matrix: n < 1");
  Mat d = Mat::Zero(n * n, vech_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      d(i + j * n, k) = 1.0;
      d(j + i * n, k) = 1.0;
      ++k;
    }
  }
  return d;
}

LyapunovSolver::LyapunovSolver(const Mat& a_cl, double rcond_floor)
    : n_(a_cl.rows()) {
  if (a_cl.rows() != a_cl.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "lyapunov: a_cl not square");
  }
  const Mat eye = Mat::Identity(n_, n_);
  const Mat at = a_cl.transpose();
  k_ = kron(eye, at) + kron(at, eye);
  if (n_ == 0) return;
  lu_.compute(k_);
  if (!(lu_.rcond() > rcond_floor)) {
    throw Error(ErrorKind::kSingularLyapunov,
                "non-unique/no Lyapunov solution (eigenvalue pairing)");
  }
}

Mat LyapunovSolver::solve(const Mat& q) const {
  if (q.rows() != n_ || q.cols() != n_) {
    throw Error(ErrorKind::kInvalidArgument, "lyapunov: q has wrong size");
  }
  if (n_ == 0) return Mat(0, 0);
  const Vec p = lu_.solve(-vec(q));
  return symmetrize(unvec(p, n_, n_));
}

Mat solve_lyapunov(const Mat& a_cl, const Mat& q) {
  return LyapunovSolver(a_cl).solve(q);
}

Mat kernel_basis(const Mat& m, double tol) {
  const Index cols = m.cols();
  if (cols == 0) return Mat(0, 0);
  if (m.rows() == 0 || max_abs(m) == 0.0) return Mat::Identity(cols, cols);
  // Pad to a square matrix so the full V is available regardless of shape.
  Mat padded = Mat::Zero(std::max(m.rows(), cols), cols);
  padded.topRows(m.rows()) = m;
  Eigen::JacobiSVD<Mat> svd(padded, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double cut = tol * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) >= cut) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

Index numerical_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index rank = 0;
  while (rank < s.size() && s(rank) >= tol * s(0)) ++rank;
  return rank;
}

namespace {

bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

Spectrum eigvals(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "eigvals: matrix not square");
  }
  if (a.rows() == 0) return {};
  Eigen::EigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNoConvergence, "eigvals: QR iteration failed");
  }
  Spectrum out(es.eigenvalues().data(),
               es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end(), complex_less);
  return out;
}

double spectral_abscissa(const Mat& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Complex& z : eigvals(a)) best = std::max(best, z.real());
  return best;
}

bool is_stable(const Mat& a) { return a.rows() == 0 || spectral_abscissa(a) < 0.0; }

bool spectra_match(const Spectrum& a, const Spectrum& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const Complex& z : a) {
    std::size_t best = b.size();
    double best_d = tol;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(z - b[k]);
      if (d <= best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == b.size()) return false;
    used[best] = true;
  }
  return true;
}

double min_eig_sym(const Mat& a) {
  if (a.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Mat solve_care(const Mat& a, const Mat& b, const Mat& q, const Mat& r) {
  const Index n = a.rows();
  const Mat s = b * r.ldlt().solve(b.transpose());
  Mat h(2 * n, 2 * n);
  h << a, -s, -q, -a.transpose();
  Eigen::ComplexEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNoConvergence, "care: Hamiltonian eigensolve failed");
  }
  Eigen::MatrixXcd u(2 * n, n);
  Index k = 0;
  for (Index j = 0; j < 2 * n; ++j) {
    if (es.eigenvalues()(j).real() < 0.0) {
      if (k == n) break;
      u.col(k++) = es.eigenvectors().col(j);
    }
  }
  if (k != n) {
    throw Error(ErrorKind::kNoConvergence,
                "care: Hamiltonian has eigenvalues on the imaginary axis");
  }
  const Eigen::MatrixXcd u1 = u.topRows(n);
  const Eigen::MatrixXcd u2 = u.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(u1.transpose());
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kNoConvergence, "care: no stabilizing solution");
  }
  // P = U2 U1^{-1}, computed as (U1^{-T} U2^T)^T.
  const Mat p = lu.solve(u2.transpose()).transpose().real();
  return symmetrize(p);
}

bool is_stabilizable(const Mat& a, const Mat& b, double rank_tol) {
  const Index n = a.rows();
  if (n == 0) return true;
  for (const Complex& lam : eigvals(a)) {
    if (lam.real() < 0.0) continue;
    Eigen::MatrixXcd h(n, n + b.cols());
    h.leftCols(n) = lam * Eigen::MatrixXcd::Identity(n, n) - a.cast<Complex>();
    h.rightCols(b.cols()) = b.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
    const auto& s = svd.singularValues();
    const double scale = std::max(1.0, s(0));
    if (s(n - 1) < rank_tol * scale) return false;
  }
  return true;
}

}  // namespace dgame::linalg
