#ifndef ASYMFLOW_CURVES_HPP
#define ASYMFLOW_CURVES_HPP

#include <string>
#include <vector>

#include "asymflow/metric_models.hpp"
#include "asymflow/sampled_curve.hpp"

namespace asymflow {

// Finite-resolution curve analysis: lengths, one-sided difference-quotient
// profiles, variation measures, and absolute-continuity certificates. The
// forward and backward quotients of an asymmetric metric genuinely differ;
// the toy half-line keeps a curve forward-certifiable while every backward
// certificate blows up under refinement.

enum class Side { Forward, Backward };

/// Per-segment one-sided difference quotients of a sampled curve.
struct DerivativeProfile {
  Side side = Side::Forward;
  Vec seg_times;   // left endpoint of each segment
  Vec seg_widths;  // segment widths
  Vec quotients;   // d(., .) / width, ordered per DerivativeProfile side

  double lp_norm(double p) const;
  double linf_norm() const;
};

struct CurveLength {
  double chord = 0.0;       // sum of consecutive forward distances
  double quadrature = 0.0;  // midpoint quadrature of F along the chords
};

/// Both length readings of a sampled curve. The quadrature reading needs a
/// pointwise metric; the toy half line raises a model error (its chord sum is
/// still available through pointwise_variation).

struct AcViolation {
  int i = 0;
  int j = 0;
  double excess = 0.0;  // distance minus certificate integral
};

struct AcCertificate {
  DerivativeProfile profile;
  double l1_norm = 0.0;
  double lp_norm = 0.0;
  bool ok = true;
  std::vector<AcViolation> violations;
};

struct AcReport {
  bool forward_ok = true;
  bool backward_ok = true;
  AcCertificate forward;
  AcCertificate backward;
};

/// Variation measure of a sampled curve: each consecutive forward distance is
/// spread uniformly over its time cell, which makes the measure exactly
/// additive over disjoint intervals. Sample-aligned evaluation reproduces the
/// full-partition chord sum.
struct VariationMeasure {
  Vec times;     // K+1 sample times
  Vec seg_mass;  // K chord distances

  double total() const;
  double on_interval(double a, double b) const;
  /// V on the dyadic interval [i/2^level, (i+1)/2^level] of the unit interval.
  double dyadic_node(int level, int index) const;
};

CurveLength curve_length(const MetricModel& model, const SampledCurve& curve);

DerivativeProfile metric_derivative(const MetricModel& model, const SampledCurve& curve,
                                    Side side);

/// Certificate classification at sample resolution, with a dyadic refinement
/// probe for the discontinuous toy metric (see AcReport).
AcReport classify_ac(const MetricModel& model, const SampledCurve& curve, double p);

VariationMeasure variation_measure(const MetricModel& model, const SampledCurve& curve);

double pointwise_variation(const MetricModel& model, const SampledCurve& curve, double a,
                           double b);

double variation_density(const MetricModel& model, const SampledCurve& curve, double t,
                         double eps);

struct TransferReport {
  double theta = 1.0;         // max pointwise reversibility over the curve
  bool ok = true;             // reversed distances bounded by theta * speed integral
  double max_excess = 0.0;    // worst violation beyond tolerance
  double min_slack = 0.0;     // min of rhs - lhs over all pairs
  int worst_i = 0;
  int worst_j = 0;
};

/// Checks d(gamma(t2), gamma(t1)) <= theta * integral of F(gamma') over all
/// sampled subintervals, theta taken from the pointwise reversibility.
TransferReport reversibility_transfer_check(const MetricModel& model,
                                            const SampledCurve& curve, double p);

std::string curve_to_csv(const SampledCurve& curve);
SampledCurve curve_from_csv(const std::string& text);
std::string ac_report_to_json(const AcReport& report, double p);

}  // namespace asymflow

#endif
