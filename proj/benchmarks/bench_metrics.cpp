#include <benchmark/benchmark.h>

#include "asymflow/metric_models.hpp"
#include "asymflow/rng.hpp"

using namespace asymflow;

static void BM_FunkDistance(benchmark::State& state) {
  const MetricModel model = MetricModel::funk_ball(2);
  Rng rng(1);
  const Vec x = rng.ball_point(2, 0.9);
  const Vec y = rng.ball_point(2, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(distance(model, x, y));
}
BENCHMARK(BM_FunkDistance);

static void BM_FunkMetricValue(benchmark::State& state) {
  const MetricModel model = MetricModel::funk_ball(2);
  Rng rng(2);
  const Vec x = rng.ball_point(2, 0.9);
  const Vec v = rng.direction(2);
  for (auto _ : state) benchmark::DoNotOptimize(metric_value(model, x, v));
}
BENCHMARK(BM_FunkMetricValue);

static void BM_MetricTensor(benchmark::State& state) {
  const MetricModel model = MetricModel::funk_ball(static_cast<int>(state.range(0)));
  Rng rng(3);
  const Vec x = rng.ball_point(model.dimension, 0.6);
  const Vec v = rng.direction(model.dimension);
  for (auto _ : state) benchmark::DoNotOptimize(metric_tensor(model, x, v));
}
BENCHMARK(BM_MetricTensor)->Arg(2)->Arg(3);

static void BM_FunkGradient(benchmark::State& state) {
  const MetricModel model = MetricModel::funk_ball(2);
  Rng rng(4);
  const Vec x = rng.ball_point(2, 0.6);
  const Vec xi = rng.direction(2);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(model, x, xi));
}
BENCHMARK(BM_FunkGradient);
