#include <benchmark/benchmark.h>

#include "asymflow/rng.hpp"
#include "asymflow/transport.hpp"

using namespace asymflow;

namespace {

DiscreteMeasure uniform_measure(Rng& rng, int n, int dim, double radius) {
  DiscreteMeasure m;
  for (int i = 0; i < n; ++i) {
    m.support.push_back(rng.ball_point(dim, radius));
    m.weights.push_back(1.0 / n);
  }
  double s = 0.0;
  for (double w : m.weights) s += w;
  m.weights.back() += 1.0 - s;
  return m;
}

}  // namespace

static void BM_SolveOT(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MetricModel model = MetricModel::funk_ball(2);
  Rng rng(7);
  const DiscreteMeasure mu = uniform_measure(rng, n, 2, 0.8);
  const DiscreteMeasure nu = uniform_measure(rng, n, 2, 0.8);
  const Mat cost = cost_matrix(model, mu, nu, 2.0, Direction::Forward);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ot(cost, mu, nu));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SolveOT)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Complexity();

static void BM_DivergenceExperiment(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(funk_divergence_experiment(m, {m / 2, m}, 2.0));
}
BENCHMARK(BM_DivergenceExperiment)->Arg(1 << 10)->Arg(1 << 14);
