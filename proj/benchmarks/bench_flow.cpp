#include <benchmark/benchmark.h>

#include "asymflow/gradient_flow.hpp"

using namespace asymflow;

static void BM_FlowVelocity(benchmark::State& state) {
  const MetricModel model = MetricModel::funk_ball(2);
  const Potential phi = Potential::quadratic(Mat::identity(2), {0.1, -0.2}, 0.0);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  const Vec x{0.3, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(flow_velocity(model, triple, phi, x));
}
BENCHMARK(BM_FlowVelocity);

static void BM_IntegrateFlow(benchmark::State& state) {
  const MetricModel model = MetricModel::minkowski(NormSpec::euclidean(2));
  const Potential phi = Potential::quadratic(Mat::identity(2), zeros(2), 0.0);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  const double dt = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_flow(model, triple, phi, {0.6, -0.8}, 1.0, dt));
}
BENCHMARK(BM_IntegrateFlow)->Arg(100)->Arg(1000);
