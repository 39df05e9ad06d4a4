#include "asymflow/curves.hpp"

#include <algorithm>
#include <cmath>

#include "asymflow/errors.hpp"

namespace asymflow {

double DerivativeProfile::lp_norm(double p) const {
  double s = 0.0;
  for (std::size_t i = 0; i < quotients.size(); ++i)
    s += std::pow(quotients[i], p) * seg_widths[i];
  return std::pow(s, 1.0 / p);
}

double DerivativeProfile::linf_norm() const {
  double m = 0.0;
  for (double q : quotients) m = std::max(m, q);
  return m;
}

CurveLength curve_length(const MetricModel& model, const SampledCurve& curve) {
  curve.validate();
  CurveLength out;
  const int k = curve.segments();
  for (int i = 0; i < k; ++i)
    out.chord += distance(model, curve.points[i], curve.points[i + 1]);
  if (!model.has_tangent_structure())
    throw ModelError("curve_length: quadrature length needs a pointwise metric");
  for (int i = 0; i < k; ++i) {
    const double dt = curve.times[i + 1] - curve.times[i];
    const Vec vel = (1.0 / dt) * (curve.points[i + 1] - curve.points[i]);
    const Vec mid = 0.5 * (curve.points[i] + curve.points[i + 1]);
    out.quadrature += metric_value(model, mid, vel) * dt;
  }
  return out;
}

DerivativeProfile metric_derivative(const MetricModel& model, const SampledCurve& curve,
                                    Side side) {
  curve.validate();
  if (curve.segments() < 2) throw InputError("metric_derivative needs K >= 2");
  DerivativeProfile prof;
  prof.side = side;
  const int k = curve.segments();
  prof.seg_times.resize(k);
  prof.seg_widths.resize(k);
  prof.quotients.resize(k);
  for (int i = 0; i < k; ++i) {
    const double dt = curve.times[i + 1] - curve.times[i];
    prof.seg_times[i] = curve.times[i];
    prof.seg_widths[i] = dt;
    const double d = (side == Side::Forward)
                         ? distance(model, curve.points[i], curve.points[i + 1])
                         : distance(model, curve.points[i + 1], curve.points[i]);
    prof.quotients[i] = d / dt;
  }
  return prof;
}

namespace {

// Certificate inequality for all sampled pairs (i, j): the distance from
// sample i to sample j must not exceed the integral of the certificate.
// The certificate is piecewise constant on the cells of `cert_times`.
std::vector<AcViolation> certificate_violations(const MetricModel& model,
                                                const SampledCurve& curve,
                                                const Vec& cert_times, const Vec& cert_values,
                                                Side side, double tol) {
  std::vector<AcViolation> v;
  const int n = static_cast<int>(curve.times.size());
  // prefix integral of the certificate at each curve sample time
  Vec prefix(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double t = curve.times[i];
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < cert_times.size(); ++c) {
      const double lo = cert_times[c];
      const double hi = std::min(cert_times[c + 1], t);
      if (hi <= lo) break;
      acc += cert_values[c] * (hi - lo);
    }
    prefix[i] = acc;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (side == Side::Forward)
                           ? distance(model, curve.points[i], curve.points[j])
                           : distance(model, curve.points[j], curve.points[i]);
      const double bound = prefix[j] - prefix[i];
      if (d > bound + tol) v.push_back({i, j, d - bound});
    }
  }
  return v;
}

SampledCurve subsample(const SampledCurve& curve, int stride) {
  SampledCurve coarse;
  const int n = static_cast<int>(curve.times.size());
  for (int i = 0; i < n; i += stride) {
    coarse.times.push_back(curve.times[i]);
    coarse.points.push_back(curve.points[i]);
  }
  if (coarse.times.back() != curve.times.back()) {
    coarse.times.push_back(curve.times.back());
    coarse.points.push_back(curve.points.back());
  }
  return coarse;
}

AcCertificate build_certificate(const MetricModel& model, const SampledCurve& curve,
                                Side side, double p) {
  AcCertificate cert;
  cert.profile = metric_derivative(model, curve, side);
  cert.l1_norm = cert.profile.lp_norm(1.0);
  cert.lp_norm = std::isinf(p) ? cert.profile.linf_norm() : cert.profile.lp_norm(p);
  cert.violations = certificate_violations(model, curve, curve.times,
                                           cert.profile.quotients, side, 1e-9);
  cert.ok = cert.violations.empty();
  return cert;
}

// Discontinuous metrics admit no mesh-convergent certificate: a coarse-level
// certificate must keep bounding the fine-level distances. Declared failed
// only when every refinement level tried is violated.
bool refinement_probe_fails(const MetricModel& model, const SampledCurve& curve, Side side) {
  bool all_levels_violated = true;
  bool any_level_tried = false;
  for (int stride : {2, 4, 8}) {
    if (curve.segments() < 2 * stride) continue;
    any_level_tried = true;
    SampledCurve coarse = subsample(curve, stride);
    DerivativeProfile prof = metric_derivative(model, coarse, side);
    const auto violations =
        certificate_violations(model, curve, coarse.times, prof.quotients, side, 1e-9);
    if (violations.empty()) all_levels_violated = false;
  }
  return any_level_tried && all_levels_violated;
}

}  // namespace

AcReport classify_ac(const MetricModel& model, const SampledCurve& curve, double p) {
  curve.validate();
  if (curve.segments() < 2) throw InputError("classify_ac needs K >= 2");
  AcReport report;
  report.forward = build_certificate(model, curve, Side::Forward, p);
  report.backward = build_certificate(model, curve, Side::Backward, p);
  report.forward_ok = report.forward.ok;
  report.backward_ok = report.backward.ok;
  if (model.variant == ModelVariant::ToyHalfLine) {
    if (refinement_probe_fails(model, curve, Side::Forward)) report.forward_ok = false;
    if (refinement_probe_fails(model, curve, Side::Backward)) report.backward_ok = false;
  }
  return report;
}

double VariationMeasure::total() const {
  double s = 0.0;
  for (double m : seg_mass) s += m;
  return s;
}

double VariationMeasure::on_interval(double a, double b) const {
  if (!(b > a)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double lo = std::max(times[i], a);
    const double hi = std::min(times[i + 1], b);
    if (hi > lo) s += seg_mass[i] * (hi - lo) / (times[i + 1] - times[i]);
  }
  return s;
}

double VariationMeasure::dyadic_node(int level, int index) const {
  const double w = std::ldexp(1.0, -level);
  return on_interval(index * w, (index + 1) * w);
}

VariationMeasure variation_measure(const MetricModel& model, const SampledCurve& curve) {
  curve.validate();
  VariationMeasure vm;
  vm.times = curve.times;
  vm.seg_mass.resize(curve.segments());
  for (int i = 0; i < curve.segments(); ++i)
    vm.seg_mass[i] = distance(model, curve.points[i], curve.points[i + 1]);
  return vm;
}

double pointwise_variation(const MetricModel& model, const SampledCurve& curve, double a,
                           double b) {
  if (!(b >= a)) throw InputError("pointwise_variation: empty interval");
  return variation_measure(model, curve).on_interval(a, b);
}

double variation_density(const MetricModel& model, const SampledCurve& curve, double t,
                         double eps) {
  if (eps <= 0.0) throw InputError("variation_density: eps must be positive");
  const double lo = std::max(t - eps, curve.times.front());
  const double hi = std::min(t + eps, curve.times.back());
  if (!(hi > lo)) throw InputError("variation_density: window does not meet the curve domain");
  return variation_measure(model, curve).on_interval(lo, hi) / (hi - lo);
}

TransferReport reversibility_transfer_check(const MetricModel& model,
                                            const SampledCurve& curve, double /*p*/) {
  curve.validate();
  if (!model.smooth()) throw ModelError("reversibility_transfer_check requires a smooth model");
  if (curve.segments() < 2) throw InputError("reversibility_transfer_check needs K >= 2");

  TransferReport report;
  for (const Vec& x : curve.points)
    report.theta = std::max(report.theta, model.pointwise_reversibility(x));

  const int k = curve.segments();
  Vec prefix(k + 1, 0.0);  // speed quadrature up to each sample
  for (int i = 0; i < k; ++i) {
    const double dt = curve.times[i + 1] - curve.times[i];
    const Vec vel = (1.0 / dt) * (curve.points[i + 1] - curve.points[i]);
    prefix[i + 1] = prefix[i] + metric_value(model, curve.points[i], vel) * dt;
  }

  report.min_slack = 1e300;
  for (int i = 0; i <= k; ++i) {
    for (int j = i + 1; j <= k; ++j) {
      const double lhs = distance(model, curve.points[j], curve.points[i]);
      const double rhs = report.theta * (prefix[j] - prefix[i]);
      const double tol = 1e-9 * (1.0 + rhs);
      const double slack = rhs - lhs;
      if (slack < report.min_slack) {
        report.min_slack = slack;
        report.worst_i = i;
        report.worst_j = j;
      }
      if (lhs > rhs + tol) {
        report.ok = false;
        report.max_excess = std::max(report.max_excess, lhs - rhs);
      }
    }
  }
  return report;
}

}  // namespace asymflow
