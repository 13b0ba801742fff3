// Microbenchmarks for the hot paths: eigendecomposition, protocol
// discretization, trajectory enumeration and the transfer-matrix recursion.

#include <benchmark/benchmark.h>

#include <random>

#include "qwork/distributions.hpp"
#include "qwork/operators.hpp"
#include "qwork/protocol.hpp"
#include "qwork/trajectories.hpp"

using namespace qwork;

namespace {

Matrix random_hermitian(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  Matrix g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = Complex(n(rng), n(rng));
  return 0.5 * (g + g.adjoint());
}

ProtocolSpec ramp(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  ProtocolSpec spec;
  spec.variant = LinearRampSpec{HermitianOperator(random_hermitian(rng, d)),
                                HermitianOperator(random_hermitian(rng, d)),
                                Schedule::linear(0.0, 1.0, 1.0)};
  spec.tau = 1.0;
  return spec;
}

ProtocolSpec resonant(int steps) {
  ProtocolSpec spec;
  spec.variant = QubitDriveSpec{1.0, 1.0};
  spec.tau = steps * 1.5707963267948966;
  return spec;
}

void BM_spectral_decompose(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  const HermitianOperator h(random_hermitian(rng, d));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_decompose(h));
}
BENCHMARK(BM_spectral_decompose)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_discretize_ramp(benchmark::State& state) {
  const ProtocolSpec spec = ramp(static_cast<int>(state.range(0)), 13);
  for (auto _ : state) benchmark::DoNotOptimize(discretize(spec, 16));
}
BENCHMARK(BM_discretize_ramp)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_enumerate(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const DiscretizedProtocol proto = discretize(resonant(steps), steps);
  const DensityMatrix rho = thermal_state(proto.initial_h(), 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(accumulate_work(proto, rho, EnumerationGuard{}));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(trajectory_count(proto)));
}
BENCHMARK(BM_enumerate)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_histories_distribution(benchmark::State& state) {
  const DiscretizedProtocol proto = discretize(resonant(12), 12);
  const DensityMatrix rho = thermal_state(proto.initial_h(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(histories_distribution(proto, rho));
}
BENCHMARK(BM_histories_distribution)->Unit(benchmark::kMillisecond);

void BM_measured_markov(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const DiscretizedProtocol proto = discretize(ramp(2, 17), steps);
  const DensityMatrix rho = thermal_state(proto.initial_h(), 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(measured_distribution_markov(proto, rho));
}
BENCHMARK(BM_measured_markov)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_tpm_distribution(benchmark::State& state) {
  std::mt19937_64 rng(19);
  TabulatedSpec tb;
  for (int j = 0; j <= 6; ++j) tb.hamiltonians.emplace_back(random_hermitian(rng, 4));
  ProtocolSpec spec;
  spec.variant = std::move(tb);
  spec.tau = 1.0;
  const DiscretizedProtocol proto = discretize(spec, 6);
  const DensityMatrix rho = thermal_state(proto.initial_h(), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(tpm_distribution(proto, rho));
}
BENCHMARK(BM_tpm_distribution)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
