#ifndef ASYMFLOW_GRADIENT_FLOW_HPP
#define ASYMFLOW_GRADIENT_FLOW_HPP

#include <functional>
#include <string>
#include <vector>

#include "asymflow/curves.hpp"
#include "asymflow/metric_models.hpp"

namespace asymflow {

// Generalized gradient flows d/dt (phi o xi) = -psi(F(xi')) - psi*(F(grad(-phi)))
// for a dissipation triple (h, psi, psi*). Along a flow the Fenchel-Young
// inequality saturates, which pins the explicit velocity
//   xi' = h^{-1}(F(g)) g / F(g),   g = grad(-phi),
// and is what the energy audit verifies after the fact.

/// Strictly increasing rate h with h(0) = 0, its convex primitive psi and
/// conjugate psi*. Either a power law h(r) = r^(p-1) or a monotone table
/// interpolated by a shape-preserving cubic.
class DissipationTriple {
public:
  static DissipationTriple power_law(double p);
  static DissipationTriple monotone_table(Vec xs, Vec ys);

  double h(double x) const;
  double h_inverse(double y) const;
  double psi(double x) const;
  double psi_star(double y) const;

  bool is_power_law() const { return power_ > 1.0; }
  double exponent() const { return power_; }

private:
  DissipationTriple() = default;

  double power_ = 0.0;  // > 1 for power law, else table
  // table representation: knots, values, tangents, cumulative psi
  Vec xs_, ys_, tangents_, psi_knots_;
  double hermite(double x) const;
  double hermite_integral(double x) const;
};

/// psi*(y) = sup_{x >= 0} (x y - psi(x)); equals x y - psi(x) at x = h^{-1}(y).
double fenchel_conjugate(const DissipationTriple& triple, double y);

/// C^1 potential with an exact or finite-difference differential.
class Potential {
public:
  static Potential quadratic(Mat a, Vec b, double c);
  static Potential linear(Vec b, double c);
  static Potential black_box(int dim, std::function<double(const Vec&)> f);

  double value(const Vec& x) const;
  Vec differential(const Vec& x) const;
  int dim() const { return dim_; }

private:
  Potential() = default;
  enum class Kind { Quadratic, Linear, BlackBox } kind_ = Kind::Linear;
  int dim_ = 0;
  Mat a_;
  Vec b_;
  double c_ = 0.0;
  std::function<double(const Vec&)> f_;
};

struct FlowTrajectory {
  Vec times;
  std::vector<Vec> points;
  std::vector<Vec> velocities;
  // per-sample energy ledger
  Vec speed;         // F(xi(t), xi'(t))
  Vec phi;           // phi(xi(t))
  Vec psi_term;      // psi(F(xi'))
  Vec psi_star_term; // psi*(F(grad(-phi)))
  bool exited = false;   // left the model domain
  bool blowup = false;   // exceeded the blowup radius
  double stop_time = 0.0;
};

/// Flow velocity at a point: zero at critical points (F(g) <= 1e-12), else
/// h^{-1}(F(g)) g / F(g).
Vec flow_velocity(const MetricModel& model, const DissipationTriple& triple,
                  const Potential& phi, const Vec& x);

struct FlowOptions {
  double blowup_radius = 1e6;
  double step_residual_tol = 1e-6;  // halve dt above this per-step residual
  int max_halvings = 20;
};

FlowTrajectory integrate_flow(const MetricModel& model, const DissipationTriple& triple,
                              const Potential& phi, const Vec& x0, double T, double dt,
                              const FlowOptions& opts = {});

struct EnergyAuditReport {
  double max_residual = 0.0;        // energy identity over all ledger pairs
  double max_chain_residual = 0.0;  // pointwise d/dt(phi) + F(xi')F(grad(-phi))
  double phi_increase = 0.0;        // largest per-step increase of phi (>= 0)
};

/// Recomputes the ledger from the stored states and checks the energy
/// identity on every [s, t] pair; independent of the integrator internals.
EnergyAuditReport energy_audit(const FlowTrajectory& traj, const MetricModel& model,
                               const DissipationTriple& triple, const Potential& phi);

struct ChainRuleReport {
  double min_margin = 0.0;        // min of lhs - rhs over interior samples
  double max_equality_gap = 0.0;  // max |lhs - rhs| (flows saturate the bound)
  int violation_count = 0;
  bool ok = true;
};

/// Checks d/dt(phi o gamma) >= -F(gamma') F(grad(-phi)) along a sampled curve.
ChainRuleReport chain_rule_check(const MetricModel& model, const Potential& phi,
                                 const SampledCurve& curve, double tol);

std::string trajectory_to_csv(const FlowTrajectory& traj);
std::string energy_audit_to_json(const EnergyAuditReport& report);

}  // namespace asymflow

#endif
