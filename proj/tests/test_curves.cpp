#include <doctest.h>

#include <cmath>
#include <functional>

#include "asymflow/curves.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/rng.hpp"

using namespace asymflow;

namespace {

const double kLn2 = std::log(2.0);

SampledCurve uniform_curve(int segments, const std::function<Vec(double)>& gamma) {
  SampledCurve c;
  for (int i = 0; i <= segments; ++i) {
    const double t = static_cast<double>(i) / segments;
    c.times.push_back(t);
    c.points.push_back(gamma(t));
  }
  return c;
}

// radial segment of the funk ball from radius a to radius b along e1
SampledCurve radial_curve(int segments, double a, double b) {
  return uniform_curve(segments, [a, b](double t) -> Vec { return {a + (b - a) * t, 0.0}; });
}

}  // namespace

TEST_CASE("curve length on straight and radial segments") {
  const MetricModel euclid = MetricModel::minkowski(NormSpec::euclidean(2));
  const SampledCurve seg = uniform_curve(17, [](double t) -> Vec { return {t, 0.0}; });
  const CurveLength len = curve_length(euclid, seg);
  CHECK(len.chord == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(len.quadrature == doctest::Approx(1.0).epsilon(1e-12));

  const MetricModel funk = MetricModel::funk_ball(2);
  const SampledCurve out = radial_curve(1000, 0.0, 0.5);
  const CurveLength lo = curve_length(funk, out);
  CHECK(std::fabs(lo.chord - kLn2) <= 1e-4);
  CHECK(std::fabs(lo.quadrature - kLn2) <= 1e-4);

  const SampledCurve back = radial_curve(1000, 0.5, 0.0);
  const CurveLength lb = curve_length(funk, back);
  CHECK(std::fabs(lb.chord - std::log(1.5)) <= 1e-4);
  CHECK(std::fabs(lb.quadrature - std::log(1.5)) <= 1e-4);
}

TEST_CASE("metric derivative profiles") {
  // drift line: forward 1 + omega, backward 1 - omega, exactly
  const MetricModel drift = MetricModel::minkowski(NormSpec::l1_drift(1, 0.25));
  const SampledCurve line = uniform_curve(64, [](double t) -> Vec { return {t}; });
  const DerivativeProfile fwd = metric_derivative(drift, line, Side::Forward);
  const DerivativeProfile bwd = metric_derivative(drift, line, Side::Backward);
  for (double q : fwd.quotients) CHECK(std::fabs(q - 1.25) <= 1e-12);
  for (double q : bwd.quotients) CHECK(std::fabs(q - 0.75) <= 1e-12);

  // euclidean unit speed
  const MetricModel euclid = MetricModel::minkowski(NormSpec::euclidean(2));
  const SampledCurve seg = uniform_curve(64, [](double t) -> Vec { return {t, 0.0}; });
  for (double q : metric_derivative(euclid, seg, Side::Forward).quotients)
    CHECK(q == doctest::Approx(1.0).epsilon(1e-12));

  // unit funk speed outward radial: r(t) = 1 - e^{-t}
  const MetricModel funk = MetricModel::funk_ball(2);
  const SampledCurve radial =
      uniform_curve(1000, [](double t) -> Vec { return {1.0 - std::exp(-t), 0.0}; });
  for (double q : metric_derivative(funk, radial, Side::Forward).quotients)
    CHECK(std::fabs(q - 1.0) <= 1e-3);
}

TEST_CASE("derivative quotient converges to the metric at first order") {
  const MetricModel funk = MetricModel::funk_ball(2);
  const auto gamma = [](double t) -> Vec {
    const double rho = 0.4 + 0.2 * std::sin(5.0 * t);
    return {rho * std::cos(t), rho * std::sin(t)};
  };
  const auto gamma_dot = [](double t) -> Vec {
    const double rho = 0.4 + 0.2 * std::sin(5.0 * t);
    const double drho = std::cos(5.0 * t);
    return {drho * std::cos(t) - rho * std::sin(t), drho * std::sin(t) + rho * std::cos(t)};
  };
  double prev_fwd = 0.0, prev_bwd = 0.0;
  for (int k : {1000, 2000}) {
    const SampledCurve curve = uniform_curve(k, gamma);
    const DerivativeProfile fwd = metric_derivative(funk, curve, Side::Forward);
    const DerivativeProfile bwd = metric_derivative(funk, curve, Side::Backward);
    double worst_fwd = 0.0, worst_bwd = 0.0;
    for (int i = 0; i < k; ++i) {
      const Vec at = gamma(fwd.seg_times[i]);
      const Vec vel = gamma_dot(fwd.seg_times[i]);
      worst_fwd = std::max(worst_fwd, std::fabs(fwd.quotients[i] - metric_value(funk, at, vel)));
      worst_bwd = std::max(worst_bwd, std::fabs(bwd.quotients[i] - metric_value(funk, at, -vel)));
    }
    if (k == 1000) {
      CHECK(worst_fwd <= 1e-2);
      CHECK(worst_bwd <= 1e-2);
      prev_fwd = worst_fwd;
      prev_bwd = worst_bwd;
    } else {
      CHECK(worst_fwd <= 0.6 * prev_fwd);  // first-order decay, both sides
      CHECK(worst_bwd <= 0.6 * prev_bwd);
    }
  }
}

TEST_CASE("classification: toy half line is FAC but not BAC") {
  const MetricModel toy = MetricModel::toy_half_line();
  for (int k : {16, 64, 256}) {
    const SampledCurve line = uniform_curve(k, [](double t) -> Vec { return {t}; });
    const AcReport report = classify_ac(toy, line, 2.0);
    CHECK(report.forward_ok);
    CHECK(!report.backward_ok);
  }
}

TEST_CASE("classification: smooth curves pass both directions") {
  const MetricModel euclid = MetricModel::minkowski(NormSpec::euclidean(2));
  const SampledCurve seg = uniform_curve(32, [](double t) -> Vec { return {t, t * t}; });
  const AcReport report = classify_ac(euclid, seg, 2.0);
  CHECK(report.forward_ok);
  CHECK(report.backward_ok);

  // geodesic restricted to a closed subinterval
  const MetricModel funk = MetricModel::funk_ball(2);
  SampledCurve sub;
  for (int i = 0; i <= 200; ++i) {
    const double t = 0.2 + 0.6 * i / 200.0;
    sub.times.push_back(t);
    sub.points.push_back({1.0 - std::exp(-t), 0.0});
  }
  const AcReport sub_report = classify_ac(funk, sub, 2.0);
  CHECK(sub_report.forward_ok);
  CHECK(sub_report.backward_ok);
}

TEST_CASE("backward certificate norm grows along the divergent funk curve") {
  const MetricModel funk = MetricModel::funk_ball(2);
  for (int j : {2, 3, 4}) {
    const double r_max = 1.0 - std::pow(10.0, -j);
    // inward curve from radius r_max (toward the -e1 boundary point) to 0
    const SampledCurve curve = uniform_curve(
        400, [r_max](double t) -> Vec { return {-(1.0 - t) * r_max, 0.0}; });
    const AcReport report = classify_ac(funk, curve, 1.0);
    // backward chord sums telescope to -log(1 - r_max) = j log 10
    CHECK(std::fabs(report.backward.l1_norm - j * std::log(10.0)) <= 1e-9);
    CHECK(report.forward_ok);
    CHECK(report.backward_ok);  // finite resolution: certificate exists, norm grows
  }
}

TEST_CASE("pointwise variation and additivity") {
  const MetricModel euclid = MetricModel::minkowski(NormSpec::euclidean(2));
  const SampledCurve seg = uniform_curve(64, [](double t) -> Vec { return {2.0 * t, 0.0}; });
  CHECK(pointwise_variation(euclid, seg, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

  const MetricModel funk = MetricModel::funk_ball(2);
  const SampledCurve round = uniform_curve(800, [](double t) -> Vec {
    return {t <= 0.5 ? t : 1.0 - t, 0.0};
  });
  CHECK(std::fabs(pointwise_variation(funk, round, 0.0, 1.0) - (kLn2 + std::log(1.5))) <= 1e-4);

  // additivity over a split interior to a cell
  Rng rng(17);
  for (int k = 0; k < 20; ++k) {
    const double split = rng.uniform(0.1, 0.9);
    const double whole = pointwise_variation(funk, round, 0.0, 1.0);
    const double left = pointwise_variation(funk, round, 0.0, split);
    const double right = pointwise_variation(funk, round, split, 1.0);
    CHECK(std::fabs(whole - left - right) <= 1e-12);
  }

  // refinement of the sample set never decreases the variation
  SampledCurve coarse;
  for (std::size_t i = 0; i < round.times.size(); i += 4) {
    coarse.times.push_back(round.times[i]);
    coarse.points.push_back(round.points[i]);
  }
  CHECK(pointwise_variation(funk, coarse, 0.0, 1.0) <=
        pointwise_variation(funk, round, 0.0, 1.0) + 1e-12);
}

TEST_CASE("variation density approximates the forward derivative") {
  const MetricModel euclid = MetricModel::minkowski(NormSpec::euclidean(2));
  const SampledCurve seg = uniform_curve(512, [](double t) -> Vec { return {t, 0.0}; });
  for (double eps : {0.25, 0.1, 0.01})
    CHECK(variation_density(euclid, seg, 0.5, eps) == doctest::Approx(1.0).epsilon(1e-9));

  const MetricModel drift = MetricModel::minkowski(NormSpec::l1_drift(1, 0.25));
  const SampledCurve line = uniform_curve(512, [](double t) -> Vec { return {t}; });
  CHECK(variation_density(drift, line, 0.4, 0.05) == doctest::Approx(1.25).epsilon(1e-9));

  const MetricModel funk = MetricModel::funk_ball(2);
  const SampledCurve radial =
      uniform_curve(1000, [](double t) -> Vec { return {1.0 - std::exp(-t), 0.0}; });
  CHECK(std::fabs(variation_density(funk, radial, 0.5, 1e-2) - 1.0) <= 1e-2);

  // density at the edge uses the clipped window
  CHECK(variation_density(euclid, seg, 0.0, 0.01) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(variation_density(euclid, seg, 0.5, 0.0), InputError);
}

TEST_CASE("variation density agrees with the forward derivative in discrete L1") {
  const MetricModel funk = MetricModel::funk_ball(2);
  const int k = 400;
  const SampledCurve curve = uniform_curve(k, [](double t) -> Vec {
    return {0.5 * std::sin(2.0 * t), 0.4 * std::cos(2.0 * t) - 0.2};
  });
  const DerivativeProfile prof = metric_derivative(funk, curve, Side::Forward);
  const double mesh = 1.0 / k;
  const double total_variation = pointwise_variation(funk, curve, 0.0, 1.0);
  double l1_gap = 0.0;
  for (int i = 1; i + 1 < k; ++i) {
    const double mid = prof.seg_times[i] + 0.5 * mesh;
    l1_gap += std::fabs(variation_density(funk, curve, mid, 2.0 * mesh) - prof.quotients[i]) *
              mesh;
  }
  CHECK(l1_gap <= 2.0 * mesh * total_variation);
}

TEST_CASE("variation measure dyadic nodes sum to parents") {
  const MetricModel funk = MetricModel::funk_ball(2);
  const SampledCurve round = uniform_curve(333, [](double t) -> Vec {
    return {0.4 * std::sin(3.0 * t), 0.4 * std::cos(3.0 * t) - 0.2};
  });
  const VariationMeasure vm = variation_measure(funk, round);
  for (int level = 1; level <= 4; ++level)
    for (int idx = 0; idx < (1 << (level - 1)); ++idx)
      CHECK(vm.dyadic_node(level - 1, idx) ==
            doctest::Approx(vm.dyadic_node(level, 2 * idx) + vm.dyadic_node(level, 2 * idx + 1))
                .epsilon(1e-12));
}

TEST_CASE("reversibility transfer bound along curves") {
  // straight euclidean segment: theta = 1 and the bound is tight
  const MetricModel euclid = MetricModel::minkowski(NormSpec::euclidean(2));
  const SampledCurve seg = uniform_curve(32, [](double t) -> Vec { return {t, 0.0}; });
  const TransferReport re = reversibility_transfer_check(euclid, seg, 2.0);
  CHECK(re.ok);
  CHECK(re.theta == doctest::Approx(1.0));
  CHECK(std::fabs(re.min_slack) <= 1e-9);

  // randers line against the drift: theta = 3, bound tight
  const MetricModel randers = MetricModel::minkowski(NormSpec::randers({0.5, 0.0}));
  const SampledCurve against = uniform_curve(32, [](double t) -> Vec { return {-t, 0.0}; });
  const TransferReport rr = reversibility_transfer_check(randers, against, 2.0);
  CHECK(rr.ok);
  CHECK(rr.theta == doctest::Approx(3.0));
  CHECK(std::fabs(rr.min_slack) <= 1e-9);

  // funk round trip: bound holds with theta from the outermost point
  const MetricModel funk = MetricModel::funk_ball(2);
  const SampledCurve round = uniform_curve(200, [](double t) -> Vec {
    return {t <= 0.5 ? 0.8 * t : 0.8 * (1.0 - t), 0.0};
  });
  const TransferReport rf = reversibility_transfer_check(funk, round, 2.0);
  CHECK(rf.ok);
  CHECK(rf.theta == doctest::Approx((1.0 + 0.4) / (1.0 - 0.4)).epsilon(1e-12));
}

TEST_CASE("curve csv round trip") {
  const SampledCurve seg = uniform_curve(5, [](double t) -> Vec { return {t, 1.0 - t}; });
  const SampledCurve back = curve_from_csv(curve_to_csv(seg));
  REQUIRE(back.times.size() == seg.times.size());
  for (std::size_t i = 0; i < seg.times.size(); ++i) {
    CHECK(back.times[i] == seg.times[i]);
    CHECK(back.points[i][0] == seg.points[i][0]);
    CHECK(back.points[i][1] == seg.points[i][1]);
  }
  CHECK_THROWS_AS(curve_from_csv(""), InputError);
}

TEST_CASE("quadrature length rejects the toy metric") {
  const MetricModel toy = MetricModel::toy_half_line();
  const SampledCurve line = uniform_curve(8, [](double t) -> Vec { return {t}; });
  CHECK_THROWS_AS(curve_length(toy, line), ModelError);
  // the chord reading stays available through the variation measure
  CHECK(pointwise_variation(toy, line, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}
