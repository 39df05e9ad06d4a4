#include "asymflow/path_measures.hpp"

#include <algorithm>
#include <cmath>

#include "asymflow/errors.hpp"

namespace asymflow {

namespace {
constexpr std::size_t kAtomCap = 2'000'000;
}

int DyadicSchedule::cell_of(double t) const {
  const int idx = static_cast<int>(std::floor(t * cells()));
  return std::clamp(idx, 0, cells() - 1);
}

void CurveOfMeasures::validate(const MetricModel& model) const {
  if (static_cast<int>(measures.size()) != schedule.nodes())
    throw InputError("curve of measures: need one measure per schedule node");
  for (const DiscreteMeasure& m : measures) m.validate(&model);
}

JointPathMeasure glue_plans(const MetricModel& model, const CurveOfMeasures& curve, double p,
                            Direction direction) {
  curve.validate(model);
  if (p < 1.0) throw InputError("glue_plans: p must be >= 1");

  JointPathMeasure joint;
  joint.schedule = curve.schedule;
  joint.node_measures = curve.measures;
  joint.p = p;

  const int cells = curve.schedule.cells();
  joint.pair_plans.reserve(cells);
  joint.pair_cost_values.reserve(cells);
  for (int i = 0; i < cells; ++i) {
    const Mat cost =
        cost_matrix(model, curve.measures[i], curve.measures[i + 1], p, direction);
    OTResult r = solve_ot(cost, curve.measures[i], curve.measures[i + 1]);
    joint.pair_cost_values.push_back(r.value);
    joint.pair_plans.push_back(std::move(r.plan));
  }

  // Markov chaining: weight(x_0..x_K) = mu_0(x_0) prod pi_i(x_i, x_{i+1}) / mu_i(x_i)
  std::vector<std::vector<int>> atoms;
  Vec weights;
  for (int idx = 0; idx < curve.measures[0].size(); ++idx) {
    if (curve.measures[0].weights[idx] <= 0.0) {
      ++joint.pruned_atoms;
      continue;
    }
    atoms.push_back({idx});
    weights.push_back(curve.measures[0].weights[idx]);
  }
  for (int i = 0; i < cells; ++i) {
    const TransportPlan& plan = joint.pair_plans[i];
    std::vector<std::vector<int>> next_atoms;
    Vec next_weights;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const int row = atoms[a].back();
      const double row_mass = curve.measures[i].weights[row];
      if (row_mass <= 0.0) {
        ++joint.pruned_atoms;
        continue;
      }
      for (int col = 0; col < plan.cols; ++col) {
        const double f = plan(row, col);
        if (f <= 0.0) continue;
        if (next_atoms.size() >= kAtomCap)
          throw SizeError("glue_plans: path atom count exceeds cap");
        std::vector<int> tuple = atoms[a];
        tuple.push_back(col);
        next_atoms.push_back(std::move(tuple));
        next_weights.push_back(weights[a] * (f / row_mass));
      }
    }
    atoms = std::move(next_atoms);
    weights = std::move(next_weights);
  }
  joint.atoms = std::move(atoms);
  joint.weights = std::move(weights);
  return joint;
}

DiscretePathMeasure path_measure(const JointPathMeasure& joint, Representative representative) {
  DiscretePathMeasure eta;
  eta.schedule = joint.schedule;
  eta.representative = representative;
  eta.node_measures = joint.node_measures;
  eta.atoms.reserve(joint.atoms.size());
  for (std::size_t a = 0; a < joint.atoms.size(); ++a) {
    PathAtom atom;
    atom.node_indices = joint.atoms[a];
    atom.weight = joint.weights[a];
    atom.nodes.reserve(atom.node_indices.size());
    for (std::size_t i = 0; i < atom.node_indices.size(); ++i)
      atom.nodes.push_back(joint.node_measures[i].support[atom.node_indices[i]]);
    eta.atoms.push_back(std::move(atom));
  }
  return eta;
}

// ---------------------------------------------------------------------------
// Representatives.

namespace {

// Fraction lambda along the chord a -> b realizing forward-distance fraction
// s in the Funk ball: solves d(a, a + lambda u) = s d(a, b).
double funk_chord_fraction(const MetricModel& model, const Vec& a, const Vec& b, double s) {
  const double total = distance(model, a, b);
  if (total <= 0.0) return 0.0;
  const double target = s * total;
  const Vec u = b - a;
  double lo = 0.0, hi = 1.0, lambda = s;
  for (int it = 0; it < 100; ++it) {
    Vec point = a;
    axpy(lambda, u, point);
    const double err = distance(model, a, point) - target;
    if (std::fabs(err) < 1e-14 * (1.0 + total)) break;
    (err < 0.0 ? lo : hi) = lambda;
    // Newton step with bisection fallback
    const double slope = metric_value(model, point, u);
    double next = lambda - err / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
  }
  return lambda;
}

struct CellLocation {
  int cell = 0;
  double s = 0.0;  // fraction inside the cell
};

CellLocation locate(const DyadicSchedule& schedule, double t) {
  if (t < 0.0 || t > 1.0) throw InputError("path time must lie in [0, 1]");
  CellLocation loc;
  loc.cell = schedule.cell_of(t);
  loc.s = (t - schedule.node_time(loc.cell)) / schedule.cell_width();
  return loc;
}

}  // namespace

Vec atom_position(const MetricModel& model, const DiscretePathMeasure& eta,
                  const PathAtom& atom, double t) {
  if (t >= 1.0) return atom.nodes.back();
  const CellLocation loc = locate(eta.schedule, t);
  const Vec& a = atom.nodes[loc.cell];
  if (eta.representative == Representative::Constant) return a;
  const Vec& b = atom.nodes[loc.cell + 1];
  switch (model.variant) {
    case ModelVariant::MinkowskiSpace: {
      Vec point = a;
      axpy(loc.s, b - a, point);
      return point;
    }
    case ModelVariant::FunkBall: {
      const double lambda = funk_chord_fraction(model, a, b, loc.s);
      Vec point = a;
      axpy(lambda, b - a, point);
      return point;
    }
    default:
      throw ModelError("geodesic representative needs a model with explicit geodesics");
  }
}

Vec atom_velocity(const MetricModel& model, const DiscretePathMeasure& eta,
                  const PathAtom& atom, double t) {
  if (eta.representative != Representative::Geodesic)
    throw ModelError("velocities require the geodesic representative");
  const CellLocation loc = locate(eta.schedule, std::min(t, 1.0 - 1e-15));
  const Vec& a = atom.nodes[loc.cell];
  const Vec& b = atom.nodes[loc.cell + 1];
  const double width = eta.schedule.cell_width();
  switch (model.variant) {
    case ModelVariant::MinkowskiSpace:
      return (1.0 / width) * (b - a);
    case ModelVariant::FunkBall: {
      const double total = distance(model, a, b);
      if (total <= 0.0) return zeros(model.dimension);
      const Vec pos = atom_position(model, eta, atom, t);
      const Vec u = b - a;
      // constant-speed parametrization: F(pos, velocity) = d(a,b)/width
      const double scale = total / (width * metric_value(model, pos, u));
      return scale * u;
    }
    default:
      throw ModelError("geodesic representative needs a model with explicit geodesics");
  }
}

DiscreteMeasure marginal_at(const DiscretePathMeasure& eta, const MetricModel& model,
                            double t) {
  if (t < 0.0 || t > 1.0) throw InputError("marginal_at: t must lie in [0, 1]");
  // node times reproduce the input measure exactly, on its own support order
  const double scaled = t * eta.schedule.cells();
  const double nearest = std::round(scaled);
  if (std::fabs(scaled - nearest) < 1e-12) {
    const int node = static_cast<int>(nearest);
    DiscreteMeasure out;
    out.support = eta.node_measures[node].support;
    out.weights.assign(out.support.size(), 0.0);
    for (const PathAtom& atom : eta.atoms)
      out.weights[atom.node_indices[node]] += atom.weight;
    return out;
  }
  DiscreteMeasure out;
  out.support.reserve(eta.atoms.size());
  out.weights.reserve(eta.atoms.size());
  for (const PathAtom& atom : eta.atoms) {
    out.support.push_back(atom_position(model, eta, atom, t));
    out.weights.push_back(atom.weight);
  }
  return out;
}

double speed_estimate(const DiscretePathMeasure& eta, const MetricModel& model, double p,
                      double t, Side side) {
  if (eta.representative != Representative::Geodesic)
    throw ModelError("speed_estimate requires the geodesic representative");
  const double scaled = t * eta.schedule.cells();
  if (std::fabs(scaled - std::round(scaled)) < 1e-12)
    throw InputError("speed_estimate: t must be interior to a schedule cell");
  double acc = 0.0;
  for (const PathAtom& atom : eta.atoms) {
    const Vec vel = atom_velocity(model, eta, atom, t);
    const Vec pos = atom_position(model, eta, atom, t);
    const double f = (side == Side::Forward) ? metric_value(model, pos, vel)
                                             : metric_value(model, pos, -vel);
    acc += atom.weight * std::pow(f, p);
  }
  return std::pow(acc, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Step-1 estimates.

namespace {

// exact integral of t -> d(sigma_t, sigma_{t+h})^alpha over [0, 1-h] for the
// piecewise-constant representative of one node tuple
double shift_integral(const std::vector<double>& pair_dist_alpha, int n_cells, double h) {
  const double width = 1.0 / n_cells;
  // breakpoints where either cell index changes
  std::vector<double> cuts{0.0, 1.0 - h};
  for (int i = 1; i <= n_cells; ++i) {
    const double a = i * width;
    if (a < 1.0 - h) cuts.push_back(a);
    const double b = i * width - h;
    if (b > 0.0 && b < 1.0 - h) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi - lo < 1e-15) continue;
    const double mid = 0.5 * (lo + hi);
    const int i1 = std::min(static_cast<int>(mid * n_cells), n_cells - 1);
    const int i2 = std::min(static_cast<int>((mid + h) * n_cells), n_cells);
    acc += pair_dist_alpha[i1 * (n_cells + 1) + i2] * (hi - lo);
  }
  return acc;
}

}  // namespace

Step1Report step1_inequalities_check(const JointPathMeasure& joint, const MetricModel& model) {
  Step1Report report;
  const int n_cells = joint.schedule.cells();
  const int n_nodes = joint.schedule.nodes();
  const int levels = joint.schedule.levels;
  const double p = joint.p;

  // shift grid: cell multiples and off-grid values
  std::vector<double> shifts;
  for (int k = 1; k < n_cells; ++k) {
    shifts.push_back(static_cast<double>(k) / n_cells);
    shifts.push_back((k + 0.5) / n_cells);
  }
  shifts.push_back(0.31 / n_cells);
  shifts.push_back(0.77 / n_cells);

  for (const double alpha : {1.0, p}) {
    const double bound_a = std::pow(2.0, alpha + levels * (alpha - 1.0));
    const double bound_b =
        std::pow(2.0, alpha) + std::pow(2.0, alpha * levels) / (n_cells - 1 == 0 ? 1.0 : n_cells - 1);

    for (std::size_t a = 0; a < joint.atoms.size(); ++a) {
      const std::vector<int>& tuple = joint.atoms[a];
      // distances between all node pairs of this tuple, to the alpha power
      std::vector<double> dist_alpha(static_cast<std::size_t>(n_nodes) * n_nodes, 0.0);
      for (int i = 0; i < n_nodes; ++i)
        for (int j = 0; j < n_nodes; ++j) {
          if (i == j) continue;
          const double d = distance(model, joint.node_measures[i].support[tuple[i]],
                                    joint.node_measures[j].support[tuple[j]]);
          dist_alpha[i * n_nodes + j] = std::pow(d, alpha);
        }
      double consecutive_sum = 0.0;
      for (int i = 0; i < n_cells; ++i) consecutive_sum += dist_alpha[i * n_nodes + (i + 1)];

      for (const double h : shifts) {
        const double integral = shift_integral(dist_alpha, n_cells, h);
        if (h >= 1.0 / n_cells - 1e-15) {
          const double lhs = integral / std::pow(h, alpha);
          const double rhs = bound_a * consecutive_sum;
          if (lhs > rhs + 1e-9 * (1.0 + rhs)) {
            report.ok = false;
            report.max_excess = std::max(report.max_excess, lhs - rhs);
          }
        }
        {
          const double lhs = integral / h;
          const double rhs = bound_b * consecutive_sum;
          if (lhs > rhs + 1e-9 * (1.0 + rhs)) {
            report.ok = false;
            report.max_excess = std::max(report.max_excess, lhs - rhs);
          }
        }
      }
    }

    // moment bound per cell, through the pairwise plans
    for (int i = 0; i < n_cells; ++i) {
      const TransportPlan& plan = joint.pair_plans[i];
      double moment = 0.0;
      for (int r = 0; r < plan.rows; ++r)
        for (int c = 0; c < plan.cols; ++c) {
          const double f = plan(r, c);
          if (f <= 0.0) continue;
          const double d = distance(model, joint.node_measures[i].support[r],
                                    joint.node_measures[i + 1].support[c]);
          moment += f * std::pow(d, alpha);
        }
      const double wp = std::pow(std::max(joint.pair_cost_values[i], 0.0), 1.0 / p);
      const double rhs = std::pow(wp, alpha);
      if (moment > rhs + 1e-9 * (1.0 + rhs)) {
        report.ok = false;
        report.moment_max_excess = std::max(report.moment_max_excess, moment - rhs);
      }
    }
  }
  report.checked_atoms = static_cast<int>(joint.atoms.size());
  return report;
}

// ---------------------------------------------------------------------------
// Velocity fields and continuity residuals.

VelocityFieldSample velocity_field(const DiscretePathMeasure& eta, const MetricModel& model,
                                   double t, double p, double merge_radius) {
  VelocityFieldSample sample;
  sample.time = t;
  sample.cell = eta.schedule.cell_of(t);

  double atom_norm_p = 0.0;
  std::vector<Vec> positions, velocities;
  Vec weights;
  for (const PathAtom& atom : eta.atoms) {
    positions.push_back(atom_position(model, eta, atom, t));
    velocities.push_back(atom_velocity(model, eta, atom, t));
    weights.push_back(atom.weight);
    atom_norm_p +=
        atom.weight * std::pow(metric_value(model, positions.back(), velocities.back()), p);
  }

  // greedy merge by symmetrized distance
  std::vector<int> group(positions.size(), -1);
  for (std::size_t a = 0; a < positions.size(); ++a) {
    if (group[a] >= 0) continue;
    const int g = static_cast<int>(sample.base_points.size());
    group[a] = g;
    sample.base_points.push_back(positions[a]);
    for (std::size_t b = a + 1; b < positions.size(); ++b) {
      if (group[b] >= 0) continue;
      const double sym = 0.5 * (distance(model, positions[a], positions[b]) +
                                distance(model, positions[b], positions[a]));
      if (sym <= merge_radius) group[b] = g;
    }
  }
  sample.velocities.assign(sample.base_points.size(), zeros(model.dimension));
  sample.masses.assign(sample.base_points.size(), 0.0);
  for (std::size_t a = 0; a < positions.size(); ++a) {
    const int g = group[a];
    sample.masses[g] += weights[a];
    axpy(weights[a], velocities[a], sample.velocities[g]);
  }
  double field_norm_p = 0.0;
  for (std::size_t g = 0; g < sample.base_points.size(); ++g) {
    if (sample.masses[g] > 0.0) sample.velocities[g] = (1.0 / sample.masses[g]) * sample.velocities[g];
    field_norm_p +=
        sample.masses[g] *
        std::pow(metric_value(model, sample.base_points[g], sample.velocities[g]), p);
  }
  sample.atom_lp_norm = std::pow(atom_norm_p, 1.0 / p);
  sample.field_lp_norm = std::pow(field_norm_p, 1.0 / p);
  return sample;
}

ContinuityReport continuity_residual(const CurveOfMeasures& curve,
                                     const std::vector<VelocityFieldSample>& fields,
                                     const std::vector<Potential>& tests) {
  if (static_cast<int>(fields.size()) != curve.schedule.cells())
    throw InputError("continuity_residual: need one field sample per cell");
  ContinuityReport report;
  const double width = curve.schedule.cell_width();
  report.residuals.assign(fields.size(), std::vector<double>(tests.size(), 0.0));
  for (std::size_t cell = 0; cell < fields.size(); ++cell) {
    const DiscreteMeasure& m0 = curve.measures[cell];
    const DiscreteMeasure& m1 = curve.measures[cell + 1];
    for (std::size_t q = 0; q < tests.size(); ++q) {
      const Potential& phi = tests[q];
      double i0 = 0.0, i1 = 0.0;
      for (int a = 0; a < m0.size(); ++a) i0 += m0.weights[a] * phi.value(m0.support[a]);
      for (int a = 0; a < m1.size(); ++a) i1 += m1.weights[a] * phi.value(m1.support[a]);
      const double lhs = (i1 - i0) / width;
      double rhs = 0.0;
      const VelocityFieldSample& f = fields[cell];
      for (std::size_t g = 0; g < f.base_points.size(); ++g)
        rhs += f.masses[g] * dot(f.velocities[g], phi.differential(f.base_points[g]));
      const double residual = std::fabs(lhs - rhs);
      report.residuals[cell][q] = residual;
      report.max_residual = std::max(report.max_residual, residual);
    }
  }
  return report;
}

}  // namespace asymflow
