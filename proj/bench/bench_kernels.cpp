#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "bellproj/kernels.hpp"
#include "bellproj/optimizer.hpp"
#include "bellproj/random.hpp"

using namespace bellproj;
using kernels::Execution;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_ConjugationAverage(benchmark::State& state) {
  Rng rng(7);
  const Matrix rho = random_density_matrix(rng, 4, 4).matrix();
  std::vector<Matrix> us;
  std::vector<double> ws;
  for (int k = 0; k < state.range(1); ++k) {
    us.push_back(expm_hermitian(random_hermitian(rng, 4), 1.0).matrix());
    ws.push_back(1.0 / static_cast<double>(state.range(1)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(kernels::conjugation_average(rho, us, ws, mode(state)));
}

void BM_TimeAverage(benchmark::State& state) {
  Rng rng(11);
  const Matrix rho = random_density_matrix(rng, 4, 4).matrix();
  const Matrix h = random_hermitian(rng, 4).matrix();
  std::vector<double> times;
  for (int k = 0; k < state.range(1); ++k) times.push_back(1e-4 * k);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::time_average(rho, h, times, mode(state)));
}

void BM_ObjectiveBatch(benchmark::State& state) {
  OptimizationProblem p;
  p.system = SpinSystem{1500.0, -1500.0, 353.0};
  p.base_spec = reference_dq_cycle(0.75e-3, 10e-6, 2);
  p.objective = ObjectiveKind::state_infidelity;
  p.free_parameters = default_delay_parameters(p.base_spec, 0.5, 1.5, true);
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto values = kernels::evaluate_batch(
        n,
        [&](std::size_t i) {
          std::vector<double> x(p.free_parameters.size());
          for (std::size_t k = 0; k < x.size(); ++k) {
            const auto& f = p.free_parameters[k];
            x[k] = f.lower + (f.upper - f.lower) * static_cast<double>((i + k) % 7) / 6.0;
          }
          return evaluate_objective(apply_parameters(p, x), p);
        },
        mode(state));
    benchmark::DoNotOptimize(values);
  }
}

}  // namespace

BENCHMARK(BM_ConjugationAverage)->ArgsProduct({{0, 1}, {64, 4096}});
BENCHMARK(BM_TimeAverage)->ArgsProduct({{0, 1}, {64, 65536}});
BENCHMARK(BM_ObjectiveBatch)->ArgsProduct({{0, 1}, {32}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
