#ifndef ASYMFLOW_AUDIT_HPP
#define ASYMFLOW_AUDIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "asymflow/metric_models.hpp"

namespace asymflow {

// The acceptance sweep: every check pins its tolerance in code and computes
// its expected values through an independent route (closed forms, brute
// force, quadrature, finite differences) rather than through the code path
// under test.

struct AuditCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the full acceptance sweep. Deterministic in the seed.
std::vector<AuditCheck> run_acceptance_checks(std::uint64_t seed);

/// Distance along the straight chord by adaptive quadrature of the metric;
/// the independent route against the closed-form distance.
double chord_quadrature_distance(const MetricModel& model, const Vec& x, const Vec& y,
                                 double tol);

struct PowerFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log(y) against log(x).
PowerFit fit_log_log(const Vec& xs, const Vec& ys);

}  // namespace asymflow

#endif
