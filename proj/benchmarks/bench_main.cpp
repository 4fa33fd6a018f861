#include <random>

#include <benchmark/benchmark.h>

#include "dgame/feedback.hpp"
#include "dgame/inverse.hpp"

namespace {

using namespace dgame;

DescriptorGame lane_keeping() {
  DescriptorGame g;
  g.e = Mat::Identity(3, 3);
  g.e(2, 2) = 0.0;
  g.a = Mat::Zero(3, 3);
  g.a(0, 1) = 20.0;
  g.a(1, 2) = 20.0 / 2.7;
  g.a(2, 2) = -10.0;
  Mat b = Mat::Zero(3, 1);
  b(2, 0) = 1.0;
  g.b = {b, b};
  return g;
}

CostParameters lane_costs() {
  auto s = [](double v) { return Mat::Constant(1, 1, v); };
  return {{Vec(Eigen::Vector3d(1.0, 0.5, 0.1)).asDiagonal(), Vec(Eigen::Vector3d(3.0, 2.0, 0.1)).asDiagonal()},
          {{s(2.0), s(0.5)}, {s(1.0), s(0.5)}}};
}

Mat stable_matrix(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat a(n, n);
  for (Index k = 0; k < a.size(); ++k) a(k) = normal(rng);
  const double shift = linalg::spectral_abscissa(a) + 1.0;
  return a - shift * Mat::Identity(n, n);
}

void BM_Lyapunov(benchmark::State& state) {
  const Index n = state.range(0);
  const Mat a = stable_matrix(n, 1);
  const Mat q = Mat::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::solve_lyapunov(a, q));
}
BENCHMARK(BM_Lyapunov)->Arg(2)->Arg(4)->Arg(8)->Arg(12);

void BM_Weierstrass(benchmark::State& state) {
  const DescriptorGame g = lane_keeping();
  for (auto _ : state) benchmark::DoNotOptimize(weierstrass({g.e, g.a}));
}
BENCHMARK(BM_Weierstrass);

void BM_Assemble(benchmark::State& state) {
  const ReducedGame rg = reduce_game(lane_keeping());
  const Mat f_bar = solve_fbne(rg, lane_costs()).solutions.at(0).f_bar;
  for (auto _ : state) benchmark::DoNotOptimize(assemble(rg, f_bar));
}
BENCHMARK(BM_Assemble);

void BM_Identify(benchmark::State& state) {
  const ReducedGame rg = reduce_game(lane_keeping());
  const Mat f_bar = solve_fbne(rg, lane_costs()).solutions.at(0).f_bar;
  for (auto _ : state) benchmark::DoNotOptimize(identify(rg, f_bar));
}
BENCHMARK(BM_Identify)->Unit(benchmark::kMillisecond);

void BM_SolveFbne(benchmark::State& state) {
  const ReducedGame rg = reduce_game(lane_keeping());
  const CostParameters c = lane_costs();
  ForwardOptions opts;
  opts.n_starts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_fbne(rg, c, opts));
}
BENCHMARK(BM_SolveFbne)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
