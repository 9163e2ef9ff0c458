#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "pstab/cpcore.hpp"
#include "pstab/geometry.hpp"
#include "pstab/spectral.hpp"
#include "pstab/verify.hpp"

using namespace pstab;

namespace {

Domain unit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

void BM_PiP(benchmark::State& state) {
  const Exponent p(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(pi_p(p));
}
BENCHMARK(BM_PiP);

void BM_PiPQuadrature(benchmark::State& state) {
  const Exponent p(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(pi_p_quadrature(p));
}
BENCHMARK(BM_PiPQuadrature);

void BM_C1Sharp(benchmark::State& state) {
  const Exponent p(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(c1_sharp(p).c1);
}
BENCHMARK(BM_C1Sharp)->Arg(3)->Arg(10);

void BM_CpEval(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<std::complex<double>> xi(static_cast<std::size_t>(state.range(0)));
  std::vector<std::complex<double>> eta(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    xi[i] = {g(rng), g(rng)};
    eta[i] = {g(rng), g(rng)};
  }
  const Exponent p(3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cp_eval(p, std::span<const std::complex<double>>(xi),
                                     std::span<const std::complex<double>>(eta)).value);
  }
}
BENCHMARK(BM_CpEval)->Arg(2)->Arg(64);

void BM_BuildMesh(benchmark::State& state) {
  const Domain d = unit_square();
  for (auto _ : state) benchmark::DoNotOptimize(build_mesh(d, static_cast<int>(state.range(0))).num_nodes());
}
BENCHMARK(BM_BuildMesh)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_FirstEigenpairSquare(benchmark::State& state) {
  const Mesh m = build_mesh(unit_square(), static_cast<int>(state.range(1)));
  const Exponent p(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(first_eigenpair(p, m, Measure::lebesgue()).lambda);
}
BENCHMARK(BM_FirstEigenpairSquare)->Args({2, 3})->Args({2, 4})->Args({3, 3})->Args({3, 4})->Unit(benchmark::kMillisecond);

void BM_StabilityCheck(benchmark::State& state) {
  const Domain d = unit_square();
  const Mesh m = build_mesh(d, 3);
  const EigenPair first = first_eigenpair(Exponent(3.0), m, Measure::gaussian());
  const Field u = random_zero_trace_field(m, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stability_check(Exponent(3.0), d, m, u, Measure::gaussian(), &first).margin);
  }
}
BENCHMARK(BM_StabilityCheck)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
