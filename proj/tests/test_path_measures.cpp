#include <doctest.h>

#include <cmath>

#include "asymflow/errors.hpp"
#include "asymflow/path_measures.hpp"
#include "asymflow/rng.hpp"

using namespace asymflow;

namespace {

MetricModel euclid2() { return MetricModel::minkowski(NormSpec::euclidean(2)); }

DiscreteMeasure measure_of(std::vector<Vec> pts, Vec weights) {
  DiscreteMeasure m;
  m.support = std::move(pts);
  m.weights = std::move(weights);
  return m;
}

DiscreteMeasure random_measure(Rng& rng, const MetricModel& model, int atoms, double radius) {
  DiscreteMeasure m;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    m.support.push_back(rng.ball_point(model.dimension, radius));
    m.weights.push_back(0.2 + rng.uniform());
    total += m.weights.back();
  }
  for (double& w : m.weights) w /= total;
  double s = 0.0;
  for (double w : m.weights) s += w;
  m.weights.back() += 1.0 - s;
  return m;
}

CurveOfMeasures translation_chain(const MetricModel& model, int levels,
                                  const std::vector<Vec>& base, const Vec& velocity) {
  CurveOfMeasures curve;
  curve.schedule.levels = levels;
  for (int i = 0; i <= curve.schedule.cells(); ++i) {
    std::vector<Vec> pts;
    for (const Vec& b : base) pts.push_back(b + curve.schedule.node_time(i) * velocity);
    Vec w(base.size(), 1.0 / base.size());
    curve.measures.push_back(measure_of(std::move(pts), std::move(w)));
  }
  return curve;
}

}  // namespace

TEST_CASE("gluing a single cell reproduces the optimal plan") {
  const MetricModel model = euclid2();
  CurveOfMeasures curve;
  curve.schedule.levels = 0;
  curve.measures.push_back(measure_of({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}));
  curve.measures.push_back(measure_of({{0.0, 0.5}, {1.0, 0.5}}, {0.5, 0.5}));
  const JointPathMeasure joint = glue_plans(model, curve, 2.0);
  REQUIRE(joint.pair_plans.size() == 1);
  REQUIRE(joint.atoms.size() == 2);
  for (std::size_t a = 0; a < joint.atoms.size(); ++a) {
    const double plan_mass = joint.pair_plans[0](joint.atoms[a][0], joint.atoms[a][1]);
    CHECK(joint.weights[a] == doctest::Approx(plan_mass).epsilon(1e-14));
  }
}

TEST_CASE("deterministic translation chains compose permutations") {
  const MetricModel model = euclid2();
  const CurveOfMeasures curve =
      translation_chain(model, 2, {{0.0, 0.0}, {1.0, 0.0}}, {0.2, 0.1});
  const JointPathMeasure joint = glue_plans(model, curve, 2.0);
  // identity pairing at every step: exactly two parallel paths of weight 1/2
  REQUIRE(joint.atoms.size() == 2);
  CHECK(joint.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  for (const auto& tuple : joint.atoms)
    for (std::size_t i = 1; i < tuple.size(); ++i) CHECK(tuple[i] == tuple[0]);
}

TEST_CASE("gluing reproduces node and pairwise marginals on random chains") {
  const MetricModel model = MetricModel::funk_ball(2);
  Rng rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    CurveOfMeasures curve;
    curve.schedule.levels = 1 + trial % 2;
    for (int i = 0; i <= curve.schedule.cells(); ++i)
      curve.measures.push_back(random_measure(rng, model, 3, 0.7));
    const JointPathMeasure joint = glue_plans(model, curve, 2.0);

    for (int node = 0; node <= curve.schedule.cells(); ++node) {
      Vec agg(curve.measures[node].size(), 0.0);
      for (std::size_t a = 0; a < joint.atoms.size(); ++a)
        agg[joint.atoms[a][node]] += joint.weights[a];
      for (int i = 0; i < curve.measures[node].size(); ++i)
        CHECK(std::fabs(agg[i] - curve.measures[node].weights[i]) <= 1e-12);
    }
    for (int cell = 0; cell < curve.schedule.cells(); ++cell) {
      const TransportPlan& plan = joint.pair_plans[cell];
      Mat agg(plan.rows, plan.cols);
      for (std::size_t a = 0; a < joint.atoms.size(); ++a)
        agg(joint.atoms[a][cell], joint.atoms[a][cell + 1]) += joint.weights[a];
      for (int i = 0; i < plan.rows; ++i)
        for (int j = 0; j < plan.cols; ++j)
          CHECK(std::fabs(agg(i, j) - plan(i, j)) <= 1e-12);
    }
  }
}

TEST_CASE("path measure atoms and marginals") {
  const MetricModel model = euclid2();

  // single dirac chain: one path of weight 1
  CurveOfMeasures dirac_chain;
  dirac_chain.schedule.levels = 2;
  for (int i = 0; i <= 4; ++i)
    dirac_chain.measures.push_back(
        measure_of({{0.1 * i, 0.0}}, {1.0}));
  const JointPathMeasure joint = glue_plans(model, dirac_chain, 2.0);
  const DiscretePathMeasure eta = path_measure(joint, Representative::Constant);
  REQUIRE(eta.atoms.size() == 1);
  CHECK(eta.atoms[0].weight == doctest::Approx(1.0));

  const DiscreteMeasure mid = marginal_at(eta, model, 0.5);
  CHECK(mid.support[0][0] == doctest::Approx(0.2));  // node value at t^2

  // node-time marginals equal the inputs exactly
  const CurveOfMeasures chain =
      translation_chain(model, 2, {{0.0, 0.0}, {1.0, 0.0}}, {0.3, 0.0});
  const DiscretePathMeasure eta2 =
      path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);
  for (int node = 0; node <= 4; ++node) {
    const DiscreteMeasure m = marginal_at(eta2, model, chain.schedule.node_time(node));
    for (int i = 0; i < m.size(); ++i)
      CHECK(m.weights[i] == doctest::Approx(chain.measures[node].weights[i]).epsilon(1e-14));
  }
}

TEST_CASE("geodesic representative midpoints are metric midpoints") {
  const MetricModel model = MetricModel::funk_ball(2);
  CurveOfMeasures curve;
  curve.schedule.levels = 0;
  curve.measures.push_back(measure_of({{0.0, 0.0}}, {1.0}));
  curve.measures.push_back(measure_of({{0.6, 0.2}}, {1.0}));
  const DiscretePathMeasure eta =
      path_measure(glue_plans(model, curve, 2.0), Representative::Geodesic);

  const Vec a{0.0, 0.0}, b{0.6, 0.2};
  const double total = distance(model, a, b);
  const DiscreteMeasure mid = marginal_at(eta, model, 0.5);
  const Vec m = mid.support[0];
  CHECK(std::fabs(distance(model, a, m) - 0.5 * total) <= 1e-10);
  CHECK(std::fabs(distance(model, a, m) + distance(model, m, b) - total) <= 1e-10);
}

TEST_CASE("speed estimates on rigid translations") {
  const Vec v{0.4, -0.2};
  {
    const MetricModel model = MetricModel::minkowski(NormSpec::randers({0.3, 0.1}));
    const CurveOfMeasures chain = translation_chain(model, 2, {{0.0, 0.0}}, v);
    const DiscretePathMeasure eta =
        path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);
    const double f = norm(model.norm_spec, v);
    const double fr = norm(model.norm_spec, -v);
    for (double p : {1.0, 2.0, 3.0}) {
      CHECK(speed_estimate(eta, model, p, 0.3, Side::Forward) ==
            doctest::Approx(f).epsilon(1e-12));
      CHECK(speed_estimate(eta, model, p, 0.3, Side::Backward) ==
            doctest::Approx(fr).epsilon(1e-12));
    }

    // matches the W_p difference quotient of the marginals
    const double h = chain.schedule.cell_width();
    const DiscreteMeasure m0 = marginal_at(eta, model, 0.25);
    const DiscreteMeasure m1 = marginal_at(eta, model, 0.25 + h * 0.5);
    const double quotient =
        wasserstein(model, m0, m1, 2.0, Direction::Forward) / (h * 0.5);
    CHECK(std::fabs(speed_estimate(eta, model, 2.0, 0.25 + 0.2 * h) - quotient) <=
          2.0 * h * f);
  }
  {
    // two-atom rigid translation shares one velocity
    const MetricModel model = euclid2();
    const CurveOfMeasures chain =
        translation_chain(model, 1, {{0.0, 0.0}, {0.0, 1.0}}, v);
    const DiscretePathMeasure eta =
        path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);
    CHECK(speed_estimate(eta, model, 3.0, 0.3) == doctest::Approx(norm2(v)).epsilon(1e-12));
  }
  {
    // node times are rejected, constant representative is rejected
    const MetricModel model = euclid2();
    const CurveOfMeasures chain = translation_chain(model, 1, {{0.0, 0.0}}, v);
    const JointPathMeasure joint = glue_plans(model, chain, 2.0);
    const DiscretePathMeasure geo = path_measure(joint, Representative::Geodesic);
    CHECK_THROWS_AS(speed_estimate(geo, model, 2.0, 0.5), InputError);
    const DiscretePathMeasure flat = path_measure(joint, Representative::Constant);
    CHECK_THROWS_AS(speed_estimate(flat, model, 2.0, 0.3), ModelError);
  }
}

TEST_CASE("step1 estimates hold on constructed joints") {
  const MetricModel model = euclid2();

  // deterministic translation chain: large slack
  const CurveOfMeasures chain =
      translation_chain(model, 2, {{0.0, 0.0}, {1.0, 0.0}}, {0.2, 0.1});
  const JointPathMeasure joint = glue_plans(model, chain, 2.0);
  const Step1Report report = step1_inequalities_check(joint, model);
  CHECK(report.ok);
  CHECK(report.checked_atoms == 2);

  // single-cell joint: the moment bound is tight at alpha = p
  CurveOfMeasures one;
  one.schedule.levels = 0;
  one.measures.push_back(measure_of({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}));
  one.measures.push_back(measure_of({{0.2, 0.3}, {0.9, -0.4}}, {0.5, 0.5}));
  const JointPathMeasure j1 = glue_plans(model, one, 2.0);
  double moment = 0.0;
  for (std::size_t a = 0; a < j1.atoms.size(); ++a)
    moment += j1.weights[a] * std::pow(distance(model, one.measures[0].support[j1.atoms[a][0]],
                                                one.measures[1].support[j1.atoms[a][1]]),
                                       2.0);
  CHECK(moment == doctest::Approx(j1.pair_cost_values[0]).epsilon(1e-12));
  CHECK(step1_inequalities_check(j1, model).ok);

  // random chains: zero violations
  const MetricModel funk = MetricModel::funk_ball(2);
  Rng rng(97);
  for (int trial = 0; trial < 100; ++trial) {
    CurveOfMeasures rc;
    rc.schedule.levels = 1 + trial % 3;
    for (int i = 0; i <= rc.schedule.cells(); ++i)
      rc.measures.push_back(random_measure(rng, funk, 2 + trial % 4, 0.6));
    const Step1Report r = step1_inequalities_check(glue_plans(funk, rc, 2.0), funk);
    CHECK(r.ok);
  }
}

TEST_CASE("velocity field conditioning and jensen bound") {
  const MetricModel model = euclid2();
  const Vec v{0.4, -0.2};

  // all atoms through a shared point share the averaged velocity
  const CurveOfMeasures chain = translation_chain(model, 1, {{0.0, 0.0}}, v);
  const DiscretePathMeasure eta =
      path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);
  const VelocityFieldSample sample = velocity_field(eta, model, 0.3, 2.0);
  REQUIRE(sample.base_points.size() == 1);
  CHECK(sample.velocities[0][0] == doctest::Approx(v[0]).epsilon(1e-12));
  CHECK(sample.field_lp_norm == doctest::Approx(sample.atom_lp_norm).epsilon(1e-12));

  // two equal-weight atoms crossing at the same position with velocities +-w
  CurveOfMeasures cross;
  cross.schedule.levels = 0;
  cross.measures.push_back(measure_of({{-0.5, 0.0}, {0.5, 0.0}}, {0.5, 0.5}));
  cross.measures.push_back(measure_of({{0.5, 0.0}, {-0.5, 0.0}}, {0.5, 0.5}));
  // force the crossing plan: the optimal plan would keep the atoms in place,
  // so build the joint by hand
  JointPathMeasure jc;
  jc.schedule = cross.schedule;
  jc.node_measures = cross.measures;
  jc.p = 2.0;
  // index-identity pairing sends each atom across to the opposite side
  TransportPlan crossing_plan;
  crossing_plan.rows = crossing_plan.cols = 2;
  crossing_plan.entries = {0.5, 0.0, 0.0, 0.5};
  jc.pair_plans.push_back(crossing_plan);
  jc.pair_cost_values.push_back(0.5 * 1.0 + 0.5 * 1.0);
  jc.atoms = {{0, 0}, {1, 1}};
  jc.weights = {0.5, 0.5};
  const DiscretePathMeasure crossing = path_measure(jc, Representative::Geodesic);
  const VelocityFieldSample mid = velocity_field(crossing, model, 0.5, 2.0);
  REQUIRE(mid.base_points.size() == 1);  // both atoms sit at the origin at t = 1/2
  CHECK(norm2(mid.velocities[0]) <= 1e-12);
  CHECK(mid.field_lp_norm + 1e-12 < mid.atom_lp_norm);  // strict jensen drop

  // random instances: jensen bound never violated
  const MetricModel funk = MetricModel::funk_ball(2);
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    CurveOfMeasures rc;
    rc.schedule.levels = 1;
    for (int i = 0; i <= 2; ++i)
      rc.measures.push_back(random_measure(rng, funk, 3, 0.6));
    const DiscretePathMeasure re =
        path_measure(glue_plans(funk, rc, 2.0), Representative::Geodesic);
    const VelocityFieldSample s = velocity_field(re, funk, 0.25, 2.0);
    CHECK(s.field_lp_norm <= s.atom_lp_norm + 1e-9);
  }
}

TEST_CASE("continuity residuals: exact on translations, fault detected") {
  const MetricModel model = euclid2();
  const Vec v{0.3, 0.2};
  const CurveOfMeasures chain = translation_chain(model, 2, {{0.0, 0.0}}, v);
  const DiscretePathMeasure eta =
      path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);

  std::vector<VelocityFieldSample> fields;
  for (int cell = 0; cell < chain.schedule.cells(); ++cell)
    fields.push_back(velocity_field(
        eta, model, chain.schedule.node_time(cell) + 0.5 * chain.schedule.cell_width(), 2.0));

  const Potential linear = Potential::linear({1.0, 1.0}, 0.0);
  const ContinuityReport exact = continuity_residual(chain, fields, {linear});
  CHECK(exact.max_residual <= 1e-12);

  std::vector<VelocityFieldSample> negated = fields;
  for (VelocityFieldSample& f : negated)
    for (Vec& w : f.velocities) w = -w;
  const Potential aligned = Potential::linear((1.0 / norm2(v)) * v, 0.0);
  const ContinuityReport fault = continuity_residual(chain, negated, {aligned});
  CHECK(fault.max_residual >= 0.1 * norm2(v));
}

TEST_CASE("reverse-model gluing coincides with forward gluing when reversible") {
  Rng rng(103);
  const MetricModel euclid = euclid2();
  CurveOfMeasures curve;
  curve.schedule.levels = 1;
  for (int i = 0; i <= 2; ++i) curve.measures.push_back(random_measure(rng, euclid, 3, 0.7));
  const JointPathMeasure fwd = glue_plans(euclid, curve, 2.0, Direction::Forward);
  const JointPathMeasure bwd = glue_plans(euclid, curve, 2.0, Direction::Backward);
  // symmetric costs: identical plans, hence identical joints
  REQUIRE(fwd.atoms.size() == bwd.atoms.size());
  for (int cell = 0; cell < 2; ++cell)
    for (int i = 0; i < fwd.pair_plans[cell].rows; ++i)
      for (int j = 0; j < fwd.pair_plans[cell].cols; ++j)
        CHECK(std::fabs(fwd.pair_plans[cell](i, j) - bwd.pair_plans[cell](i, j)) <= 1e-12);

  // both directions reproduce the node marginals on an irreversible model
  const MetricModel funk = MetricModel::funk_ball(2);
  CurveOfMeasures fc;
  fc.schedule.levels = 1;
  for (int i = 0; i <= 2; ++i) fc.measures.push_back(random_measure(rng, funk, 3, 0.6));
  const JointPathMeasure rev = glue_plans(funk, fc, 2.0, Direction::Backward);
  for (int node = 0; node <= 2; ++node) {
    Vec agg(fc.measures[node].size(), 0.0);
    for (std::size_t a = 0; a < rev.atoms.size(); ++a)
      agg[rev.atoms[a][node]] += rev.weights[a];
    for (int i = 0; i < fc.measures[node].size(); ++i)
      CHECK(std::fabs(agg[i] - fc.measures[node].weights[i]) <= 1e-12);
  }
}

TEST_CASE("input validation on schedules and field lists") {
  const MetricModel model = euclid2();
  CurveOfMeasures bad;
  bad.schedule.levels = 1;
  bad.measures.push_back(measure_of({{0.0, 0.0}}, {1.0}));  // needs 3 measures
  CHECK_THROWS_AS(glue_plans(model, bad, 2.0), InputError);

  const CurveOfMeasures chain = translation_chain(model, 1, {{0.0, 0.0}}, {0.1, 0.0});
  const DiscretePathMeasure eta =
      path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);
  std::vector<VelocityFieldSample> one_field{velocity_field(eta, model, 0.25, 2.0)};
  CHECK_THROWS_AS(continuity_residual(chain, one_field, {}), InputError);
  CHECK_THROWS_AS(glue_plans(model, chain, 0.5), InputError);
  CHECK_THROWS_AS(marginal_at(eta, model, 1.5), InputError);
}

TEST_CASE("path measure serialization") {
  const MetricModel model = euclid2();
  const CurveOfMeasures chain = translation_chain(model, 1, {{0.0, 0.0}}, {0.1, 0.0});
  const DiscretePathMeasure eta =
      path_measure(glue_plans(model, chain, 2.0), Representative::Geodesic);
  const std::string json = path_measure_to_json(eta);
  CHECK(json.find("\"schedule_N\":1") != std::string::npos);
  CHECK(json.find("\"representative\":\"geodesic\"") != std::string::npos);
}
