#include "dgame/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "dgame/error.hpp"
#include "dgame/feedback.hpp"

namespace dgame {
namespace {

using linalg::kron;
using linalg::max_abs;

Mat select_cols(const Mat& m, const std::vector<Index>& idx) {
  Mat out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = m.col(idx[k]);
  return out;
}

Vec embed(const Vec& v, const std::vector<Index>& idx, Index size) {
  Vec out = Vec::Zero(size);
  for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k]) = v(k);
  return out;
}

// Affine-free linear map z -> R_bar_ii(Z z), stored as its basis images.
struct MarginMap {
  std::vector<Mat> h;

  Mat at(const Vec& z) const {
    Mat out = Mat::Zero(h.front().rows(), h.front().cols());
    for (std::size_t l = 0; l < h.size(); ++l) out += z(l) * h[l];
    return out;
  }
  double value(const Vec& z) const { return linalg::min_eig_sym(at(z)); }
  // Supergradient of z -> lambda_min at z.
  Vec supergradient(const Vec& z) const {
    Eigen::SelfAdjointEigenSolver<Mat> es(linalg::symmetrize(at(z)));
    const Vec v = es.eigenvectors().col(0);
    Vec g(h.size());
    for (std::size_t l = 0; l < h.size(); ++l) g(l) = v.dot(h[l] * v);
    return g;
  }
};

std::vector<long long> rounded(const Vec& v) {
  std::vector<long long> out;
  for (Index k = 0; k < v.size(); ++k) out.push_back(std::llround(v(k) * 1e9));
  return out;
}

struct Candidate {
  Vec z;
  double margin = -std::numeric_limits<double>::infinity();
};

// Keeps the larger margin; near-ties go to the lexicographically smaller
// rounded point so results do not depend on restart order.
void offer(Candidate* best, const Vec& z, double margin) {
  if (best->z.size() == 0) {
    best->z = z;
    best->margin = margin;
    return;
  }
  const double tie = 1e-12 * (1.0 + std::abs(best->margin));
  if (margin > best->margin + tie ||
      (std::abs(margin - best->margin) <= tie && rounded(z) < rounded(best->z))) {
    best->z = z;
    best->margin = margin;
  }
}

Candidate maximize_margin(const MarginMap& map, const IdentifyOptions& opts) {
  const Index k = static_cast<Index>(map.h.size());
  Candidate best;
  if (map.h.front().rows() == 1) {
    Vec g(k);
    for (Index l = 0; l < k; ++l) g(l) = map.h[l](0, 0);
    const double norm = g.norm();
    if (norm > 0.0) {
      best.z = g / norm;
      best.margin = norm;
      return best;
    }
  }
  if (k == 1) {
    for (double s : {1.0, -1.0}) {
      Vec z(1);
      z(0) = s;
      offer(&best, z, map.value(z));
    }
    return best;
  }
  if (k == 2) {
    constexpr int kGrid = 3600;
    int arg = 0;
    for (int g = 0; g < kGrid; ++g) {
      const double a = 2.0 * std::numbers::pi * g / kGrid;
      Vec z(2);
      z << std::cos(a), std::sin(a);
      const double v = map.value(z);
      if (v > best.margin) {
        best.margin = v;
        arg = g;
      }
    }
    // Golden-section refinement on the bracketing arc.
    const double h = 2.0 * std::numbers::pi / kGrid;
    double lo = (arg - 1) * h;
    double hi = (arg + 1) * h;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double a) {
      Vec z(2);
      z << std::cos(a), std::sin(a);
      return map.value(z);
    };
    for (int it = 0; it < 80; ++it) {
      const double c = hi - phi * (hi - lo);
      const double d = lo + phi * (hi - lo);
      if (f(c) > f(d)) hi = d; else lo = c;
    }
    const double a = 0.5 * (lo + hi);
    Vec z(2);
    z << std::cos(a), std::sin(a);
    best.z = z;
    best.margin = map.value(z);
    return best;
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  for (int restart = 0; restart < opts.restarts; ++restart) {
    Vec z(k);
    for (Index l = 0; l < k; ++l) z(l) = normal(rng);
    z.normalize();
    Vec z_best = z;
    double v_best = map.value(z);
    for (int it = 0; it < opts.ascent_iterations; ++it) {
      const Vec g = map.supergradient(z);
      const Vec tangent = g - z.dot(g) * z;
      const double gn = tangent.norm();
      if (gn < 1e-14) break;
      z += (0.5 / std::sqrt(it + 1.0)) * tangent / gn;
      z.normalize();
      const double v = map.value(z);
      if (v > v_best) {
        v_best = v;
        z_best = z;
      }
    }
    offer(&best, z_best, v_best);
  }
  return best;
}

// Penalized fallback: minimize ||M theta||^2 - mu * margin on the unit sphere.
Candidate penalized(const Mat& ms, const MarginMap& map, const IdentifyOptions& opts,
                    double* best_residual) {
  const Index k = ms.cols();
  const Mat gram = ms.transpose() * ms;
  const double sigma2 = std::max(gram.norm(), 1e-300);
  const double mu = 0.1 * sigma2;
  const double step0 = 0.25 / sigma2;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Candidate best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < opts.restarts; ++restart) {
    Vec z(k);
    for (Index l = 0; l < k; ++l) z(l) = normal(rng);
    z.normalize();
    for (int it = 0; it <= opts.ascent_iterations; ++it) {
      const double margin = map.value(z);
      const double obj = z.dot(gram * z) - mu * margin;
      if (obj < best_obj) {
        best_obj = obj;
        best.z = z;
        best.margin = margin;
      }
      const Vec grad = 2.0 * gram * z - mu * map.supergradient(z);
      const Vec tangent = grad - z.dot(grad) * z;
      if (tangent.norm() < 1e-14) break;
      z -= step0 / std::sqrt(it + 1.0) * tangent;
      z.normalize();
    }
  }
  *best_residual = (ms * best.z).norm();
  return best;
}

MarginMap margin_map(const ReducedGame& rg, Index i, const ThetaLayout& layout,
                     const Mat& basis) {
  MarginMap map;
  for (Index l = 0; l < basis.cols(); ++l) {
    Mat q;
    std::vector<Mat> rr;
    layout.unpack(basis.col(l), &q, &rr);
    const Mat w = rg.w.x2 * rg.b2[i];
    map.h.push_back(linalg::symmetrize(rr[i] + w.transpose() * q * w));
  }
  return map;
}

}  // namespace

ThetaLayout ThetaLayout::of(const DescriptorGame& g) {
  ThetaLayout out;
  out.n = g.n();
  for (Index i = 0; i < g.n_players(); ++i) out.m.push_back(g.m(i));
  return out;
}

Index ThetaLayout::size() const {
  Index l = q_size();
  for (Index mj : m) l += linalg::vech_size(mj);
  return l;
}

Index ThetaLayout::r_offset(Index j) const {
  Index off = q_size();
  for (Index k = 0; k < j; ++k) off += linalg::vech_size(m[k]);
  return off;
}

Vec ThetaLayout::pack(const Mat& q, const std::vector<Mat>& r_row) const {
  if (r_row.size() != m.size()) {
    throw Error(ErrorKind::kInvalidArgument, "theta: need one R block per player");
  }
  Vec out(size());
  out.head(q_size()) = linalg::vech(q);
  for (std::size_t j = 0; j < m.size(); ++j) {
    out.segment(r_offset(j), linalg::vech_size(m[j])) = linalg::vech(r_row[j]);
  }
  return out;
}

void ThetaLayout::unpack(const Vec& theta, Mat* q, std::vector<Mat>* r_row) const {
  if (theta.size() != size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "theta has length " + std::to_string(theta.size()) + ", expected " +
                    std::to_string(size()));
  }
  *q = linalg::unvech(theta.head(q_size()), n);
  r_row->clear();
  for (std::size_t j = 0; j < m.size(); ++j) {
    r_row->push_back(
        linalg::unvech(theta.segment(r_offset(j), linalg::vech_size(m[j])), m[j]));
  }
}

std::vector<Index> ThetaLayout::diagonal_q_support() const {
  std::vector<Index> out;
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    out.push_back(k);
    k += n - j;
  }
  for (Index t = q_size(); t < size(); ++t) out.push_back(t);
  return out;
}

CostParameters costs_from_thetas(const ThetaLayout& layout, const std::vector<Vec>& thetas) {
  CostParameters c;
  for (const Vec& th : thetas) {
    Mat q;
    std::vector<Mat> rr;
    layout.unpack(th, &q, &rr);
    c.q.push_back(q);
    c.r.push_back(rr);
  }
  return c;
}

std::vector<Vec> thetas_from_costs(const ThetaLayout& layout, const CostParameters& c) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < c.q.size(); ++i) out.push_back(layout.pack(c.q[i], c.r[i]));
  return out;
}

std::vector<Mat> assemble(const ReducedGame& rg, const Mat& f_bar, bool require_stable) {
  const Index n = rg.n();
  const Index r = rg.r();
  if (f_bar.rows() != rg.m_total() || f_bar.cols() != r) {
    throw Error(ErrorKind::kInvalidArgument, "assemble: F_bar must be m x r");
  }
  const Mat a_cl = rg.j() + rg.b1_all * f_bar;
  if (require_stable && !linalg::is_stable(a_cl)) {
    throw Error(ErrorKind::kUnstableLoop, "assemble: closed loop not stable");
  }
  const Mat s = preimage_s(rg, f_bar);
  const linalg::LyapunovSolver lyap(a_cl);
  const Eigen::PartialPivLU<Mat> k_lu(lyap.operator_matrix());
  const Mat eye_r = Mat::Identity(r, r);

  const Mat k_inv_mq = k_lu.solve(kron(s.transpose(), s.transpose()));
  const Mat d_n = linalg::duplication_matrix(n);
  const std::vector<Mat> f_blocks = split_players(rg.game, f_bar);
  std::vector<Mat> k_inv_mr;
  std::vector<Mat> d_m;
  for (Index j = 0; j < rg.n_players(); ++j) {
    const Mat ft = f_blocks[j].transpose();
    k_inv_mr.push_back(k_lu.solve(kron(ft, ft)));
    d_m.push_back(linalg::duplication_matrix(rg.m(j)));
  }

  const ThetaLayout layout = ThetaLayout::of(rg.game);
  std::vector<Mat> out;
  for (Index i = 0; i < rg.n_players(); ++i) {
    const Index mi = rg.m(i);
    const Mat sel = kron(eye_r, rg.b1[i].transpose());  // r m_i x r^2
    const Mat w_t = (rg.w.x2 * rg.b2[i]).transpose();   // m_i x n
    const Mat mq = -kron(s.transpose(), w_t) - sel * k_inv_mq;
    Mat mi_full(r * mi, layout.size());
    mi_full.leftCols(layout.q_size()) = mq * d_n;
    for (Index j = 0; j < rg.n_players(); ++j) {
      Mat mr = -sel * k_inv_mr[j];
      if (j == i) mr += kron(f_blocks[i].transpose(), Mat::Identity(mi, mi));
      mi_full.middleCols(layout.r_offset(j), linalg::vech_size(rg.m(j))) = mr * d_m[j];
    }
    out.push_back(std::move(mi_full));
  }
  return out;
}

std::vector<Index> StructuralConstraints::resolve(const ThetaLayout& layout) const {
  std::vector<Index> all(layout.size());
  for (Index k = 0; k < layout.size(); ++k) all[k] = k;
  std::vector<Index> keep = diagonal_q ? layout.diagonal_q_support() : all;
  if (support) {
    std::set<Index> allowed;
    for (Index k : *support) {
      if (k < 0 || k >= layout.size()) {
        throw Error(ErrorKind::kInvalidArgument, "support index out of range");
      }
      allowed.insert(k);
    }
    std::vector<Index> both;
    for (Index k : keep) {
      if (allowed.count(k)) both.push_back(k);
    }
    keep = std::move(both);
  }
  return keep;
}

bool InverseCertificate::feasible() const {
  return std::all_of(players.begin(), players.end(),
                     [](const PlayerCertificate& p) { return p.feasible; });
}

std::vector<Vec> InverseCertificate::thetas() const {
  std::vector<Vec> out;
  for (const PlayerCertificate& p : players) out.push_back(p.theta);
  return out;
}

InverseCertificate identify(const ReducedGame& rg, const Mat& f_bar,
                            const StructuralConstraints& constraints,
                            const IdentifyOptions& opts) {
  InverseCertificate cert;
  cert.layout = ThetaLayout::of(rg.game);
  const Index l = cert.layout.size();
  const std::vector<Mat> ms = assemble(rg, f_bar, opts.require_stable);
  const std::vector<Index> support = constraints.resolve(cert.layout);
  if (support.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "structural constraints leave no parameters");
  }
  // Basis of the support, used by the fallback search.
  Mat support_basis = Mat::Zero(l, static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) support_basis(support[k], k) = 1.0;

  for (Index i = 0; i < rg.n_players(); ++i) {
    PlayerCertificate pc;
    pc.m = ms[i];
    pc.support = support;
    const Mat m_s = select_cols(ms[i], support);
    const Mat z_s = linalg::kernel_basis(m_s, opts.kernel_tol);
    pc.kernel = Mat::Zero(l, z_s.cols());
    for (Index c = 0; c < z_s.cols(); ++c) pc.kernel.col(c) = embed(z_s.col(c), support, l);

    bool done = false;
    if (z_s.cols() > 0) {
      const MarginMap map = margin_map(rg, i, cert.layout, pc.kernel);
      const Candidate best = maximize_margin(map, opts);
      if (best.z.size() > 0) {
        pc.theta = (pc.kernel * best.z).normalized();
        pc.residual = residual(pc, pc.theta);
        pc.pd_margin = gamma2_margin(rg, i, pc.theta, cert.layout);
        pc.feasible = pc.pd_margin > opts.eps_pd * (1.0 + pc.theta.norm());
        done = pc.feasible;
      }
    }
    if (!done) {
      const MarginMap map = margin_map(rg, i, cert.layout, support_basis);
      double res = 0.0;
      const Candidate best = penalized(m_s, map, opts, &res);
      pc.theta = embed(best.z, support, l).normalized();
      pc.residual = residual(pc, pc.theta);
      pc.pd_margin = gamma2_margin(rg, i, pc.theta, cert.layout);
      pc.feasible = false;
    }
    cert.players.push_back(std::move(pc));
  }
  return cert;
}

double residual(const PlayerCertificate& cert, const Vec& theta) {
  if (theta.size() != cert.m.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "residual: theta has wrong length");
  }
  return (cert.m * theta).norm();
}

double gamma2_margin(const ReducedGame& rg, Index i, const Vec& theta,
                     const ThetaLayout& layout) {
  Mat q;
  std::vector<Mat> rr;
  layout.unpack(theta, &q, &rr);
  const Mat w = rg.w.x2 * rg.b2[i];
  return linalg::min_eig_sym(rr[i] + w.transpose() * q * w);
}

std::vector<DimensionReport> dimension_report(const InverseCertificate& cert,
                                              const ReducedGame& rg) {
  std::vector<DimensionReport> out;
  for (Index i = 0; i < static_cast<Index>(cert.players.size()); ++i) {
    const PlayerCertificate& pc = cert.players[i];
    DimensionReport d;
    d.player = i;
    d.kernel_dim = pc.kernel.cols();
    d.l = static_cast<Index>(pc.support.size());
    d.r_mi = rg.r() * rg.m(i);
    d.n_mi = rg.n() * rg.m(i);
    d.bound_holds = d.kernel_dim >= d.l - d.r_mi;
    if (!d.bound_holds) {
      throw Error(ErrorKind::kNumericalRank,
                  "kernel dimension " + std::to_string(d.kernel_dim) +
                      " below rank-nullity bound " + std::to_string(d.l - d.r_mi) +
                      " for player " + std::to_string(i + 1));
    }
    out.push_back(d);
  }
  return out;
}

Vec scale(const Vec& theta, double kappa) {
  if (!(kappa > 0.0)) throw Error(ErrorKind::kInvalidArgument, "scale: kappa must be > 0");
  return kappa * theta;
}

Vec project_to_kernel(const PlayerCertificate& cert, const Vec& theta) {
  return cert.kernel * (cert.kernel.transpose() * theta);
}

int BehaviorReport::matching() const {
  return static_cast<int>(std::count_if(behaviors.begin(), behaviors.end(),
                                        [](const Behavior& b) { return b.matches; }));
}

double behavior_distance(const ReducedGame& rg, const Mat& f_bar_a, const Mat& f_bar_b,
                         double horizon, double dt) {
  double out = 0.0;
  for (Index k = 0; k < rg.r(); ++k) {
    const Vec x1 = Vec::Unit(rg.r(), k);
    const Trajectory ta = simulate(rg, f_bar_a, x1, horizon, dt);
    const Trajectory tb = simulate(rg, f_bar_b, x1, horizon, dt);
    out = std::max({out, max_abs(ta.x - tb.x), max_abs(ta.u - tb.u)});
  }
  return out;
}

BehaviorReport rationalized_behaviors(const ReducedGame& rg, const CostParameters& c,
                                      const Mat& observed_f_bar, const ForwardOptions& opts,
                                      double match_tol) {
  BehaviorReport out;
  for (EquilibriumSolution& sol : solve_fbne(rg, c, opts).solutions) {
    Behavior b;
    b.distance = behavior_distance(rg, sol.f_bar, observed_f_bar);
    b.matches = b.distance <= match_tol;
    b.solution = std::move(sol);
    out.behaviors.push_back(std::move(b));
  }
  return out;
}

BehaviorReport rationalized_behaviors(const ReducedGame& rg, const InverseCertificate& cert,
                                      const Mat& observed_f_bar, const ForwardOptions& opts,
                                      double match_tol) {
  return rationalized_behaviors(rg, costs_from_thetas(cert.layout, cert.thetas()),
                                observed_f_bar, opts, match_tol);
}

}  // namespace dgame
