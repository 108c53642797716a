#include <random>

#include <benchmark/benchmark.h>

#include "ovac/allocation.hpp"
#include "ovac/dynamics.hpp"

namespace {

void bm_allocate(benchmark::State& state, ovac::PlatformConfig config,
                 ovac::AllocatorMode mode, double o_min) {
  ovac::AllocatorWeights weights =
      ovac::AllocatorWeights::defaults(config.n_generators);
  weights.o_min = o_min;
  const ovac::Allocator allocator(config, weights, mode);

  ovac::AllocationVector x(config.n_generators);
  const double hover = config.total_mass() * ovac::kGravity /
                       config.n_generators;
  for (int i = 0; i < config.n_generators; ++i) x.thrust(i) = hover;

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 0.05);
  ovac::Wrench u;
  u.force = ovac::Vec3(0, 0, config.total_mass() * ovac::kGravity);
  for (auto _ : state) {
    ovac::Wrench cmd = u;
    cmd.force += ovac::Vec3(gauss(rng), gauss(rng), gauss(rng));
    cmd.torque = 0.02 * ovac::Vec3(gauss(rng), gauss(rng), gauss(rng));
    auto result = allocator.allocate(cmd, x);
    x = result.x_new;
    benchmark::DoNotOptimize(result.f_exact);
  }
}

void bm_allocate_four_conventional(benchmark::State& state) {
  bm_allocate(state, ovac::PlatformConfig::four_platform(),
              ovac::AllocatorMode::Conventional, 0.0);
}
void bm_allocate_four_aware(benchmark::State& state) {
  bm_allocate(state, ovac::PlatformConfig::four_platform(),
              ovac::AllocatorMode::DownwashAware, 0.07);
}
void bm_allocate_six_aware(benchmark::State& state) {
  bm_allocate(state, ovac::PlatformConfig::six_platform(),
              ovac::AllocatorMode::DownwashAware, 0.07);
}
BENCHMARK(bm_allocate_four_conventional);
BENCHMARK(bm_allocate_four_aware);
BENCHMARK(bm_allocate_six_aware);

}  // namespace
