#include <benchmark/benchmark.h>

#include <random>

#include "wifield/dataset.hpp"
#include "wifield/forward.hpp"
#include "wifield/greens.hpp"
#include "wifield/invert.hpp"
#include "wifield/toeplitz.hpp"

using namespace wifield;

namespace {

VectorXc random_vector(Eigen::Index size, double scale) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXc v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v[i] = scale * cplx{u(rng), -0.1 * u(rng)};
  }
  return v;
}

void BM_GreenTable(benchmark::State& state) {
  const SensingDomain d{{-0.525, -0.525}, 1.05, static_cast<int>(state.range(0))};
  const double k0 = wavenumber(kChannel11Hz);
  for (auto _ : state) {
    GreenTable t(d, k0);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_GreenTable)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_ToeplitzApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SensingDomain d{{-0.525, -0.525}, 1.05, n};
  const GreenTable t(d, wavenumber(kChannel11Hz));
  const GridWindow all{0, 0, n, n};
  const ToeplitzConvolver conv(t, all, all);
  const VectorXc in = random_vector(all.size(), 1.0);
  VectorXc out(all.size());
  for (auto _ : state) {
    conv.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ToeplitzApply)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_SolveTotalFields(benchmark::State& state) {
  const SensingDomain d;
  const OperatorSet ops = build_operators(d, default_array(d, {kChannel11Hz}), {});
  const VectorXc chi = random_vector(d.cell_count(), 1.0);
  SolverOptions opt;
  opt.method = state.range(0) == 0 ? SolverMethod::Dense : SolverMethod::Iterative;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_total_fields(chi, d, ops.tones[0], opt));
  }
}
BENCHMARK(BM_SolveTotalFields)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PhaselessGradient(benchmark::State& state) {
  const SensingDomain d;
  const OperatorSet ops = build_operators(d, default_array(d, {kChannel11Hz}), {});
  const Eigen::MatrixXd meas = ops.tones[0].ei_rx.cwiseAbs2();
  const PhaselessProblem prob(ops.tones[0], meas, 0.0);
  const VectorXc chi = random_vector(d.cell_count(), 0.1);
  VectorXc g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prob.objective_and_gradient(chi, &g));
  }
}
BENCHMARK(BM_PhaselessGradient)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
