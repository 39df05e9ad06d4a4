#ifndef ASYMFLOW_METRIC_MODELS_HPP
#define ASYMFLOW_METRIC_MODELS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "asymflow/linalg.hpp"
#include "asymflow/norms.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/sampled_curve.hpp"

namespace asymflow {

// Concrete asymmetric metric / Finsler models. The irreversible workhorse is
// the Funk ball: the open Euclidean unit ball with
//   F(x,v) = (sqrt(|v|^2 - (|x|^2 |v|^2 - <x,v>^2)) + <x,v>) / (1 - |x|^2),
// whose distance has the closed form used in distance() below. Straight
// chords realize these distances; the generic spray integrator provides the
// second, independent route to geodesics.

enum class ModelVariant { FunkBall, MinkowskiSpace, ToyHalfLine, BlackBoxChart };

struct MetricModel {
  ModelVariant variant = ModelVariant::MinkowskiSpace;
  int dimension = 0;
  NormSpec norm_spec;  // MinkowskiSpace only

  // BlackBoxChart only
  std::function<bool(const Vec&)> domain_predicate;
  std::function<double(const Vec&, const Vec&)> metric_evaluator;

  static MetricModel funk_ball(int dim);
  static MetricModel minkowski(NormSpec spec);
  static MetricModel toy_half_line();
  static MetricModel black_box_chart(int dim,
                                     std::function<bool(const Vec&)> domain,
                                     std::function<double(const Vec&, const Vec&)> metric);

  /// Variants with a tangent-space structure (everything except ToyHalfLine,
  /// and MinkowskiSpace over a non-smooth norm is excluded from tensor work).
  bool has_tangent_structure() const { return variant != ModelVariant::ToyHalfLine; }
  bool smooth() const {
    if (variant == ModelVariant::ToyHalfLine) return false;
    if (variant == ModelVariant::MinkowskiSpace) return norm_spec.smooth();
    return true;
  }

  bool in_domain(const Vec& x) const;
  void require_in_domain(const Vec& x, const char* op) const;

  /// Draw a point from a canonical distribution over the domain (test and
  /// profile sampling). Funk: uniform in radius 0.95; Minkowski: unit ball.
  Vec sample_domain_point(Rng& rng) const;

  /// sup_v F(x,-v)/F(x,v) at a fixed point; closed form where known.
  double pointwise_reversibility(const Vec& x) const;
};

/// Fundamental tensor at (x, v): second v-derivatives of F^2/2.
struct MetricTensor {
  Vec base;
  Vec direction;
  Mat g;
};

/// Sampled reversibility-vs-radius profile around a center point:
/// values[j] bounds d(x,y)/d(y,x) over pairs in the closed forward
/// radii[j]-ball and is nondecreasing in j.
struct ReversibilityProfile {
  Vec center;
  Vec radii;
  Vec values;

  /// Profile value at radius r (step lookup; last value beyond the grid).
  double at(double r) const;
};

double metric_value(const MetricModel& model, const Vec& x, const Vec& v);

MetricTensor metric_tensor(const MetricModel& model, const Vec& x, const Vec& v);

double distance(const MetricModel& model, const Vec& x, const Vec& y);

/// Integrate the geodesic spray ODE from (x, v) for duration T. Spray
/// coefficients are assembled from finite differences of F^2, so this path is
/// independent of the closed-form distances it is tested against.
GeodesicResult geodesic(const MetricModel& model, const Vec& x, const Vec& v, double T,
                        int steps);

/// Gradient at x of a function with differential dphi: the Legendre inverse
/// of dphi in the fiber norm F(x, .).
Vec gradient(const MetricModel& model, const Vec& x, const Vec& dphi);

ReversibilityProfile reversibility_profile(const MetricModel& model, const Vec& center,
                                           const Vec& radii, int samples,
                                           std::uint64_t seed);

struct SampleSpec {
  int count = 1000;
  std::uint64_t seed = 1;
};

/// Sampled lower bound on the uniform constant sup g_v(y,y)/g_z(y,y);
/// nondecreasing in count for a fixed seed.
double uniform_constant(const MetricModel& model, const SampleSpec& spec);

/// Fiber norm F(x, .) with analytic gradient where available.
FiberNorm fiber(const MetricModel& model, const Vec& x);

/// Closed-form reversibility bound for the forward r-ball around center,
/// or NaN when no closed form is available for this model/center.
double ball_reversibility_bound(const MetricModel& model, const Vec& center, double r);

std::string metric_model_to_json(const MetricModel& model);
MetricModel metric_model_from_json(const std::string& text);

}  // namespace asymflow

#endif
