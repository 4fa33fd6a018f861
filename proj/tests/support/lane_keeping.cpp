#include "lane_keeping.hpp"

namespace dgame::testing {

Mat diag(std::initializer_list<double> v) {
  Vec d(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) d(k++) = x;
  return d.asDiagonal();
}

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

DescriptorGame lane_keeping_game(double ks) {
  DescriptorGame g;
  g.e = diag({1.0, 1.0, 0.0});
  g.a = Mat::Zero(3, 3);
  g.a(0, 1) = kSpeed;
  g.a(1, 2) = kSpeed / kWheelbase;
  g.a(2, 2) = -ks;
  Mat b = Mat::Zero(3, 1);
  b(2, 0) = 1.0;
  g.b = {b, b};
  return g;
}

CostParameters ground_truth_costs() {
  return {{diag({1.0, 0.5, 0.1}), diag({3.0, 2.0, 0.1})},
          {{scalar(2.0), scalar(0.5)}, {scalar(1.0), scalar(0.5)}}};
}

CostParameters identified_costs() {
  Mat qh(3, 3), qa(3, 3);
  qh << 0.106, 0.017, 0.05, 0.017, -0.328, 1.81, 0.05, 1.81, -0.621;
  qa << 1.378, 1.764, -0.499, 1.764, 0.985, 0.035, -0.499, 0.035, -0.752;
  return {{qh, qa}, {{scalar(0.564), scalar(0.152)}, {scalar(-0.709), scalar(0.231)}}};
}

CostParameters identified_diagonal_costs() {
  return {{diag({0.308, 0.801, -0.991}), diag({0.152, -1.355, 0.801})},
          {{scalar(0.967), scalar(0.237)}, {scalar(0.340), scalar(0.007)}}};
}

std::vector<Vec> misspecified_thetas() {
  Vec t1(8), t2(8);
  t1 << 0.1161, 0.2721, -1.3731, 0.6642, 1.0042, 1.0853, 0.4184, -0.5001;
  t2 << 0.0119, 0.2462, -0.1107, -0.7575, 0.0731, -3.1384, -1.6787, 0.0508;
  return {t1, t2};
}

CostParameters misspecified_costs() {
  return costs_from_thetas(ThetaLayout::of(lane_keeping_game()), misspecified_thetas());
}

Mat printed_feedback() {
  Mat f(2, 3);
  f << -0.0046, -0.3971, 0.7987, -0.4779, -1.8117, 3.8449;
  return f;
}

Mat fitted_feedback() {
  Mat f(2, 3);
  f << -0.10321866676817004, -0.8466081203874779, 1.0026863183423924,
      -0.95067160095935277, -3.9711579625497238, 4.82099157603687;
  return f;
}

}  // namespace dgame::testing
