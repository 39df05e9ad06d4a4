#include <doctest.h>

#include <cmath>
#include <functional>

#include "asymflow/errors.hpp"
#include "asymflow/gradient_flow.hpp"
#include "asymflow/rng.hpp"

using namespace asymflow;

namespace {

MetricModel euclid2() { return MetricModel::minkowski(NormSpec::euclidean(2)); }

Potential half_norm_squared(int dim) {
  return Potential::quadratic(Mat::identity(dim), zeros(dim), 0.0);
}

DissipationTriple table_triple() {
  Vec xs, ys;
  for (int i = 0; i <= 50; ++i) {
    const double x = 10.0 * i / 50.0;
    xs.push_back(x);
    ys.push_back(x + 0.25 * x * x);
  }
  return DissipationTriple::monotone_table(xs, ys);
}

}  // namespace

TEST_CASE("fenchel conjugate closed forms and equality condition") {
  CHECK(fenchel_conjugate(DissipationTriple::power_law(2.0), 3.0) ==
        doctest::Approx(4.5).epsilon(1e-14));
  CHECK(fenchel_conjugate(DissipationTriple::power_law(3.0), 4.0) ==
        doctest::Approx(16.0 / 3.0).epsilon(1e-12));
  CHECK(fenchel_conjugate(DissipationTriple::power_law(1.5), 0.0) == 0.0);
  CHECK_THROWS_AS(fenchel_conjugate(DissipationTriple::power_law(2.0), -1.0), InputError);

  const DissipationTriple table = table_triple();
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(0.05, 9.0);
    const double y = table.h(x);
    CHECK(std::fabs(x * y - table.psi(x) - fenchel_conjugate(table, y)) <= 1e-10);
  }
}

TEST_CASE("monotone table inverts its rate function") {
  const DissipationTriple table = table_triple();
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(0.0, 9.5);
    CHECK(std::fabs(table.h_inverse(table.h(x)) - x) <= 1e-10);
  }
  // beyond the table the rate extends linearly and stays invertible
  CHECK(std::fabs(table.h_inverse(table.h(14.0)) - 14.0) <= 1e-9);
}

TEST_CASE("fenchel-young holds with equality only on the graph of h") {
  Rng rng(7);
  for (const DissipationTriple& triple :
       {DissipationTriple::power_law(1.5), DissipationTriple::power_law(3.0), table_triple()}) {
    for (int k = 0; k < 300; ++k) {
      const double x = rng.uniform(0.1, 9.0);
      const double y = triple.h(x);
      CHECK(std::fabs(x * y - triple.psi(x) - triple.psi_star(y)) <= 1e-10);
      for (double off : {0.9, 1.1})
        CHECK(x * (y * off) < triple.psi(x) + triple.psi_star(y * off) - 1e-12);
    }
  }
}

TEST_CASE("closed-form potential differentials match finite differences") {
  Mat a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = a(1, 0) = -0.5;
  a(1, 1) = 1.5;
  const Potential quad = Potential::quadratic(a, {0.3, -0.7}, 1.0);
  const Potential lin = Potential::linear({0.4, 0.9}, -2.0);
  Rng rng(19);
  for (int k = 0; k < 50; ++k) {
    Vec x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    for (const Potential* phi : {&quad, &lin}) {
      const Vec d = phi->differential(x);
      for (int i = 0; i < 2; ++i) {
        Vec xp = x, xm = x;
        xp[i] += 1e-6;
        xm[i] -= 1e-6;
        const double fd = (phi->value(xp) - phi->value(xm)) / 2e-6;
        CHECK(std::fabs(d[i] - fd) <= 1e-6);
      }
    }
  }
}

TEST_CASE("flow velocity: explicit formula and critical point") {
  const MetricModel model = euclid2();
  const Potential phi = half_norm_squared(2);
  const DissipationTriple identity_rate = DissipationTriple::power_law(2.0);

  const Vec v = flow_velocity(model, identity_rate, phi, {0.3, -0.4});
  CHECK(v[0] == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(v[1] == doctest::Approx(0.4).epsilon(1e-9));

  CHECK(norm2(flow_velocity(model, identity_rate, phi, {0.0, 0.0})) == 0.0);

  // p = 3: speed sqrt(r) toward the origin
  const DissipationTriple cubic = DissipationTriple::power_law(3.0);
  const Vec w = flow_velocity(model, cubic, phi, {0.25, 0.0});
  CHECK(norm2(w) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(w[0] < 0.0);

  // saturated Fenchel-Young along the velocity
  const Vec x{0.7, 0.2};
  const Vec g = gradient(model, x, -phi.differential(x));
  const double fg = metric_value(model, x, g);
  const Vec vel = flow_velocity(model, cubic, phi, x);
  const double pairing = dot(vel, -phi.differential(x));
  CHECK(std::fabs(pairing - cubic.psi(metric_value(model, x, vel)) - cubic.psi_star(fg)) <=
        1e-8);
}

TEST_CASE("flow velocity saturates fenchel-young on every smooth model") {
  const std::vector<MetricModel> models{
      euclid2(), MetricModel::minkowski(NormSpec::randers({0.4, 0.2})),
      MetricModel::funk_ball(2)};
  const std::vector<DissipationTriple> triples{DissipationTriple::power_law(1.5),
                                               DissipationTriple::power_law(3.0),
                                               table_triple()};
  Rng rng(23);
  for (const MetricModel& model : models) {
    const Potential phi = Potential::quadratic(Mat::identity(2), {0.1, -0.3}, 0.0);
    for (const DissipationTriple& triple : triples) {
      for (int k = 0; k < 30; ++k) {
        const Vec x = model.sample_domain_point(rng);
        const Vec v = flow_velocity(model, triple, phi, x);
        const Vec g = gradient(model, x, -phi.differential(x));
        const double fg = metric_value(model, x, g);
        if (fg <= 1e-12) continue;
        const double pairing = dot(v, -phi.differential(x));
        const double split = triple.psi(metric_value(model, x, v)) + triple.psi_star(fg);
        CHECK(std::fabs(pairing - split) <= 1e-8 * (1.0 + std::fabs(split)));
      }
    }
  }
}

TEST_CASE("quadratic flow decays exponentially") {
  const MetricModel model = euclid2();
  const Potential phi = half_norm_squared(2);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  const Vec x0{0.6, -0.8};
  const FlowTrajectory traj = integrate_flow(model, triple, phi, x0, 1.0, 1e-3);
  const Vec expect = std::exp(-1.0) * x0;
  CHECK(norm2(traj.points.back() - expect) <= 1e-6);

  // phi never increases along the flow
  for (std::size_t i = 0; i + 1 < traj.phi.size(); ++i)
    CHECK(traj.phi[i + 1] <= traj.phi[i] + 1e-10);
}

TEST_CASE("cubic dissipation arrives in finite time") {
  const MetricModel model = euclid2();
  const Potential phi = half_norm_squared(2);
  const DissipationTriple triple = DissipationTriple::power_law(3.0);
  const FlowTrajectory traj = integrate_flow(model, triple, phi, {1.0, 0.0}, 2.05, 1e-4);
  double arrival = -1.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (norm2(traj.points[i]) <= 1e-7) {
      arrival = traj.times[i];
      break;
    }
  }
  REQUIRE(arrival >= 0.0);
  CHECK(std::fabs(arrival - 2.0) <= 1e-3);
  // exact solution r(t) = (1 - t/2)^2 away from the arrival
  for (double t : {0.5, 1.0, 1.5}) {
    const std::size_t i = static_cast<std::size_t>(std::lround(t / 1e-4));
    const double expect = (1.0 - t / 2.0) * (1.0 - t / 2.0);
    CHECK(std::fabs(norm2(traj.points[i]) - expect) <= 1e-6);
  }
}

TEST_CASE("funk flow of a linear potential descends monotonically") {
  const MetricModel model = MetricModel::funk_ball(2);
  const Potential phi = Potential::linear({1.0, 0.0}, 0.0);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  const FlowTrajectory traj = integrate_flow(model, triple, phi, {0.0, 0.0}, 0.5, 1e-3);
  CHECK(traj.points.back()[0] < -0.1);  // moves into the -e1 half space
  for (std::size_t i = 0; i + 1 < traj.phi.size(); ++i)
    CHECK(traj.phi[i + 1] <= traj.phi[i] + 1e-10);
}

TEST_CASE("energy audit: clean trajectories pass, faults are detected") {
  const MetricModel model = euclid2();
  const Potential phi = half_norm_squared(2);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  const FlowTrajectory traj = integrate_flow(model, triple, phi, {0.6, -0.8}, 1.0, 1e-3);

  const EnergyAuditReport clean = energy_audit(traj, model, triple, phi);
  CHECK(clean.max_residual <= 1e-6);
  CHECK(clean.phi_increase <= 1e-10);

  // constant trajectory at the critical point has an exactly zero ledger
  const FlowTrajectory frozen = integrate_flow(model, triple, phi, {0.0, 0.0}, 0.1, 1e-2);
  const EnergyAuditReport zero = energy_audit(frozen, model, triple, phi);
  CHECK(zero.max_residual == 0.0);

  // noise at 1e-2 must be flagged well above 1e-4
  FlowTrajectory noisy = traj;
  Rng rng(13);
  for (std::size_t i = 1; i < noisy.points.size(); i += 7)
    noisy.points[i][0] += 1e-2 * (rng.uniform() - 0.5);
  const EnergyAuditReport fault = energy_audit(noisy, model, triple, phi);
  CHECK(fault.max_residual > 1e-4);
}

TEST_CASE("energy audit residual drops by at least 8x per dt halving") {
  const MetricModel model = euclid2();
  const Potential phi = half_norm_squared(2);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  FlowOptions fixed;
  fixed.step_residual_tol = 1e300;  // fixed steps: measure the integrator order
  Vec residuals;
  for (double dt : {4e-2, 2e-2, 1e-2}) {
    const FlowTrajectory traj = integrate_flow(model, triple, phi, {0.6, -0.8}, 1.0, dt, fixed);
    residuals.push_back(energy_audit(traj, model, triple, phi).max_residual);
  }
  CHECK(residuals[0] / residuals[1] >= 8.0);
  CHECK(residuals[1] / residuals[2] >= 8.0);
}

TEST_CASE("chain rule bound along curves") {
  const MetricModel model = euclid2();
  const Potential phi = half_norm_squared(2);
  const DissipationTriple triple = DissipationTriple::power_law(2.0);

  // the flow trajectory saturates the bound
  const FlowTrajectory traj = integrate_flow(model, triple, phi, {0.6, -0.8}, 1.0, 1e-3);
  SampledCurve curve{traj.times, traj.points};
  const ChainRuleReport flow_report = chain_rule_check(model, phi, curve, 1e-6);
  CHECK(flow_report.ok);
  CHECK(flow_report.max_equality_gap <= 1e-6);

  // a curve orthogonal to dphi keeps the left side at zero, strictly above
  const Potential linear = Potential::linear({1.0, 0.0}, 0.0);
  SampledCurve ortho;
  for (int i = 0; i <= 64; ++i) {
    ortho.times.push_back(i / 64.0);
    ortho.points.push_back({0.5, i / 64.0});
  }
  const ChainRuleReport ortho_report = chain_rule_check(model, linear, ortho, 1e-9);
  CHECK(ortho_report.ok);
  CHECK(ortho_report.min_margin > 0.1);

  // random smooth curve in the funk ball: no violations at 1e-4 / mesh
  const MetricModel funk = MetricModel::funk_ball(2);
  SampledCurve wavy;
  const int k = 100;
  for (int i = 0; i <= k; ++i) {
    const double t = static_cast<double>(i) / k;
    wavy.times.push_back(t);
    wavy.points.push_back({0.4 * std::sin(2.0 * t), 0.3 * std::cos(3.0 * t)});
  }
  const ChainRuleReport funk_report =
      chain_rule_check(funk, half_norm_squared(2), wavy, 1e-4 * k);
  CHECK(funk_report.ok);
}

TEST_CASE("step rejection cascade raises a numerical error") {
  const MetricModel model = euclid2();
  const DissipationTriple triple = DissipationTriple::power_law(2.0);
  // potential whose differential oscillates too fast for any tried step
  const Potential rough = Potential::black_box(2, [](const Vec& x) {
    return 0.5 * dot(x, x) + 1e-2 * std::sin(1e8 * x[0]);
  });
  CHECK_THROWS_AS(integrate_flow(model, triple, rough, {0.5, 0.5}, 1.0, 1e-2), NumericalError);
}

TEST_CASE("funk flow toward the boundary stops with a flag") {
  // the linear potential keeps pushing toward -e1; the run must end either
  // at the configured blowup distance or at the numerical domain edge
  const MetricModel model = MetricModel::funk_ball(2);
  const Potential phi = Potential::linear({1.0, 0.0}, 0.0);
  FlowOptions opts;
  opts.blowup_radius = 3.0;
  const FlowTrajectory traj = integrate_flow(model, DissipationTriple::power_law(2.0), phi,
                                             {0.0, 0.0}, 50.0, 1e-2, opts);
  CHECK((traj.blowup || traj.exited));
  CHECK(traj.stop_time < 50.0);
  CHECK(norm2(traj.points.back()) < 1.0);
}

TEST_CASE("blowup detection stops the trajectory") {
  const MetricModel model = euclid2();
  // phi = -|x|^2/2 pushes outward with exponential growth
  Mat a = Mat::identity(2);
  a(0, 0) = a(1, 1) = -1.0;
  const Potential phi = Potential::quadratic(a, zeros(2), 0.0);
  FlowOptions opts;
  opts.blowup_radius = 10.0;
  const FlowTrajectory traj = integrate_flow(model, DissipationTriple::power_law(2.0), phi,
                                             {1.0, 0.0}, 10.0, 1e-2, opts);
  CHECK(traj.blowup);
  CHECK(traj.stop_time < 10.0);
}

TEST_CASE("trajectory csv has the ledger columns") {
  const MetricModel model = euclid2();
  const FlowTrajectory traj = integrate_flow(model, DissipationTriple::power_law(2.0),
                                             half_norm_squared(2), {0.5, 0.0}, 0.1, 1e-2);
  const std::string csv = trajectory_to_csv(traj);
  CHECK(csv.find("t,x1,x2,speed,phi,psi_term,psistar_term") == 0);
}
