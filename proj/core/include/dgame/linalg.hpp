#pragma once

// Dense linear-algebra substrate: Kronecker/vectorization calculus,
// duplication matrices, Lyapunov solves, kernels and spectral queries.
//
// Conventions:
//   vec  stacks columns top to bottom.
//   vech stacks the lower triangle column by column, so for a 3x3 matrix
//        the order is (a00, a10, a20, a11, a21, a22).
//
// All routines are pure and operate on Eigen dense types.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace dgame::linalg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Relative symmetry tolerance: ||M - M^T||_max <= tol * (1 + ||M||_max).
inline constexpr double kSymmetryTol = 1e-12;
/// Default relative singular-value cutoff for kernel_basis.
inline constexpr double kKernelTol = 1e-9;

double max_abs(const Mat& a);

bool is_symmetric(const Mat& a, double tol = kSymmetryTol);
Mat symmetrize(const Mat& a);

Mat kron(const Mat& a, const Mat& b);

Vec vec(const Mat& a);
Mat unvec(const Vec& v, Index rows, Index cols);

/// Length n(n+1)/2 of vech for an n x n matrix.
constexpr Index vech_size(Index n) { return n * (n + 1) / 2; }

/// Half-vectorization. Throws Error(kNotSymmetric) on asymmetric input.
Vec vech(const Mat& sym, double tol = kSymmetryTol);
Mat unvech(const Vec& v, Index n);

/// The n^2 x n(n+1)/2 duplication matrix D_n with vec(A) = D_n vech(A).
Mat duplication_matrix(Index n);

/// Solver for a_cl^T P + P a_cl + q = 0.
///
/// Works on the Kronecker form K vec(P) = -vec(q) with
/// K = (I kron a_cl^T) + (a_cl^T kron I). K is factorized once, so repeated
/// solves against the same closed loop are cheap. Meant for r up to ~12.
class LyapunovSolver {
 public:
  /// Throws Error(kSingularLyapunov) when K is numerically singular, i.e.
  /// a_cl has eigenvalues with lambda_i + lambda_j = 0.
  explicit LyapunovSolver(const Mat& a_cl, double rcond_floor = 1e-13);

  Mat solve(const Mat& q) const;
  const Mat& operator_matrix() const { return k_; }
  Index dim() const { return n_; }

 private:
  Index n_;
  Mat k_;
  Eigen::PartialPivLU<Mat> lu_;
};

Mat solve_lyapunov(const Mat& a_cl, const Mat& q);

/// Orthonormal basis of the numerical kernel: right singular vectors whose
/// singular values are below tol * sigma_max. A zero matrix yields the
/// identity. Returns a cols x k matrix (k may be 0).
Mat kernel_basis(const Mat& m, double tol = kKernelTol);
Index numerical_rank(const Mat& m, double tol);

/// Eigenvalues of a square matrix, sorted by (real, imag).
/// Throws Error(kNoConvergence) if the QR iteration fails.
Spectrum eigvals(const Mat& a);
double spectral_abscissa(const Mat& a);
bool is_stable(const Mat& a);

/// True when both multisets have equal size and can be paired greedily
/// with |a_i - b_j| <= tol.
bool spectra_match(const Spectrum& a, const Spectrum& b, double tol);

double min_eig_sym(const Mat& a);
inline bool is_pd(const Mat& a, double eps) { return min_eig_sym(a) > eps; }

/// Stabilizing solution of A^T P + P A - P B R^{-1} B^T P + Q = 0 from the
/// stable invariant subspace of the Hamiltonian matrix. Throws
/// Error(kNoConvergence) when no stabilizing solution exists.
Mat solve_care(const Mat& a, const Mat& b, const Mat& q, const Mat& r);

/// Hautus test: rank [lambda I - a, b] = n at every eigenvalue of a with
/// nonnegative real part.
bool is_stabilizable(const Mat& a, const Mat& b, double rank_tol = 1e-9);

}  // namespace dgame::linalg
