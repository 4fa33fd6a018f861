#pragma once

// Regularity, index and Weierstrass reduction of a matrix pencil (E, A).
//
// The transformation (X, Y) is not unique. weierstrass() fixes one
// deterministic construction (SVD of E, then block elimination), and every
// reduced-coordinate quantity downstream depends on that choice. Spectra,
// trajectories and kernel nullity do not.

#include <optional>

#include "dgame/linalg.hpp"

namespace dgame {

using linalg::Index;
using linalg::Mat;
using linalg::Spectrum;
using linalg::Vec;

struct Pencil {
  Mat e;
  Mat a;
};

struct WeierstrassData {
  Mat x;  // n x n, x = [x1 x2]
  Mat y;  // n x n, y^T E x = diag(I_r, 0), y^T A x = diag(j, I)
  Index r = 0;
  Mat j;  // r x r
  int index = 0;
  Mat x1;  // n x r
  Mat x2;  // n x (n - r)

  Index n() const { return x.rows(); }
};

/// Relative singular-value cutoff deciding rank(E).
inline constexpr double kRankTolE = 1e-10;

bool is_regular(const Pencil& p);

/// 0 when E is invertible, otherwise the nilpotency index of the infinite
/// block. Throws Error(kIrregularPencil) for singular pencils.
int index_of(const Pencil& p);

/// Throws Error(kIrregularPencil) or Error(kImpulsiveModes) (index >= 2).
WeierstrassData weierstrass(const Pencil& p);

Spectrum finite_spectrum(const Pencil& p);

/// x0 = (x1 - x2 b2_bar f_bar) x1_0.
Vec consistent_initial(const WeierstrassData& w, const Mat& b2_bar,
                       const Mat& f_bar, const Vec& x1_0);

/// Another valid decomposition: x' = x blkdiag(t, s), y'^T = blkdiag(t^-1,
/// s^-1) y^T, j' = t^-1 j t.
WeierstrassData regauge(const WeierstrassData& w, const Mat& t, const Mat& s);

/// Max-norm residuals of the canonical-form identities, for diagnostics.
struct CanonicalResidual {
  double e = 0.0;
  double a = 0.0;
};
CanonicalResidual canonical_residual(const Pencil& p, const WeierstrassData& w);

}  // namespace dgame
