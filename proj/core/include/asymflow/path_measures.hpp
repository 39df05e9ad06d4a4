#ifndef ASYMFLOW_PATH_MEASURES_HPP
#define ASYMFLOW_PATH_MEASURES_HPP

#include <string>
#include <vector>

#include "asymflow/gradient_flow.hpp"
#include "asymflow/transport.hpp"

namespace asymflow {

// Discrete dynamical transference plans over a dyadic schedule: consecutive
// optimal plans are glued Markovianly into a measure on node tuples, pushed
// forward to piecewise paths, and interrogated for speeds, velocity fields
// and continuity-equation residuals.

struct DyadicSchedule {
  int levels = 0;  // N; nodes at i / 2^N

  int cells() const { return 1 << levels; }
  int nodes() const { return cells() + 1; }
  double node_time(int i) const { return static_cast<double>(i) / cells(); }
  double cell_width() const { return 1.0 / cells(); }
  /// Cell index whose half-open interval [t^i, t^(i+1)) contains t.
  int cell_of(double t) const;
};

struct CurveOfMeasures {
  DyadicSchedule schedule;
  std::vector<DiscreteMeasure> measures;  // one per node

  void validate(const MetricModel& model) const;
};

enum class Representative { Constant, Geodesic };

/// Markov gluing of the per-cell optimal plans: a measure on node tuples.
struct JointPathMeasure {
  DyadicSchedule schedule;
  std::vector<DiscreteMeasure> node_measures;
  std::vector<TransportPlan> pair_plans;  // optimal plan per cell
  Vec pair_cost_values;                   // sum pi d^p per cell (= W_p^p)
  std::vector<std::vector<int>> atoms;    // node-index tuple per atom
  Vec weights;
  int pruned_atoms = 0;
  double p = 2.0;
};

/// Backward direction glues the reverse-cost optimal plans (the reverse-model
/// construction); on a reversible model both directions coincide.
JointPathMeasure glue_plans(const MetricModel& model, const CurveOfMeasures& curve, double p,
                            Direction direction = Direction::Forward);

struct PathAtom {
  std::vector<Vec> nodes;
  std::vector<int> node_indices;
  double weight = 0.0;
};

struct DiscretePathMeasure {
  DyadicSchedule schedule;
  Representative representative = Representative::Constant;
  std::vector<PathAtom> atoms;
  std::vector<DiscreteMeasure> node_measures;
};

DiscretePathMeasure path_measure(const JointPathMeasure& joint, Representative representative);

/// Position of a path atom at time t under the chosen representative.
Vec atom_position(const MetricModel& model, const DiscretePathMeasure& eta,
                  const PathAtom& atom, double t);

/// Velocity at an interior time; geodesic representative only.
Vec atom_velocity(const MetricModel& model, const DiscretePathMeasure& eta,
                  const PathAtom& atom, double t);

/// Pushforward of the path measure under evaluation at t. Reproduces the
/// input node measures exactly at node times.
DiscreteMeasure marginal_at(const DiscretePathMeasure& eta, const MetricModel& model,
                            double t);

/// ( sum_atoms w F^p(+-velocity at t) )^(1/p); the discrete speed of the
/// measure curve. Side::Backward evaluates F(-velocity).
double speed_estimate(const DiscretePathMeasure& eta, const MetricModel& model, double p,
                      double t, Side side = Side::Forward);

struct Step1Report {
  bool ok = true;
  double max_excess = 0.0;      // worst bound violation
  double moment_max_excess = 0.0;
  int checked_atoms = 0;
};

/// The three per-construction estimates behind the dyadic gluing: the
/// time-shift bound with constant 2^(alpha+N(alpha-1)), the normalized bound
/// with constant (2^alpha + 2^(alpha N)/(2^N - 1)), and the moment bound
/// against W_p of consecutive node measures, each for alpha in {1, p}.
Step1Report step1_inequalities_check(const JointPathMeasure& joint, const MetricModel& model);

struct VelocityFieldSample {
  int cell = 0;
  double time = 0.0;
  std::vector<Vec> base_points;
  std::vector<Vec> velocities;  // mass-weighted conditional average per base
  Vec masses;
  double field_lp_norm = 0.0;  // || v_t ||_{L^p(mu_t)}
  double atom_lp_norm = 0.0;   // Jensen majorant: (sum w F^p(atom velocity))^(1/p)
};

/// Conditional-average velocity field at time t: atoms whose positions agree
/// within merge_radius (symmetrized distance) share one averaged vector.
VelocityFieldSample velocity_field(const DiscretePathMeasure& eta, const MetricModel& model,
                                   double t, double p, double merge_radius = 1e-9);

struct ContinuityReport {
  double max_residual = 0.0;
  std::vector<std::vector<double>> residuals;  // [cell][test]
};

/// Weak continuity-equation residual per cell and test potential:
/// | d/dt int phi dmu_t  -  sum mass <v_t, dphi> |, the time derivative taken
/// as the difference quotient of the node integrals across the cell.
ContinuityReport continuity_residual(const CurveOfMeasures& curve,
                                     const std::vector<VelocityFieldSample>& fields,
                                     const std::vector<Potential>& tests);

std::string path_measure_to_json(const DiscretePathMeasure& eta);
std::string continuity_report_to_csv(const ContinuityReport& report);

}  // namespace asymflow

#endif
