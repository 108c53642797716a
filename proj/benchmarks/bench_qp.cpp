#include <random>

#include <benchmark/benchmark.h>

#include "ovac/qp.hpp"

namespace {

ovac::QpProblem random_qp(int n, int n_eq, int n_in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto randn = [&](int rows, int cols) {
    ovac::MatX m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
  };
  ovac::QpProblem p;
  const ovac::MatX l = randn(n, n);
  p.h = l * l.transpose() + 0.1 * ovac::MatX::Identity(n, n);
  p.f = randn(n, 1);
  p.a_eq = randn(n_eq, n);
  p.b_eq = randn(n_eq, 1);
  p.a_in = randn(n_in, n);
  p.b_in = randn(n_in, 1).array() - 2.0;  // keep the origin comfortably inside
  p.lb = ovac::VecX::Constant(n, -5.0);
  p.ub = ovac::VecX::Constant(n, 5.0);
  return p;
}

void bm_qp_solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ovac::QpProblem p = random_qp(n, n / 5, n, 42);
  for (auto _ : state) {
    auto sol = ovac::solve(p, {});
    benchmark::DoNotOptimize(sol.x);
  }
}
BENCHMARK(bm_qp_solve)->Arg(12)->Arg(30)->Arg(48);

}  // namespace

BENCHMARK_MAIN();
