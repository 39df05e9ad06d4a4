#ifndef ASYMFLOW_NORMS_HPP
#define ASYMFLOW_NORMS_HPP

#include <functional>
#include <string>

#include "asymflow/linalg.hpp"

namespace asymflow {

// Asymmetric Minkowski norms on finite-dimensional spaces. A norm here is
// positively 1-homogeneous and satisfies the triangle inequality, but
// F(-v) may differ from F(v).

enum class NormVariant { Euclidean, Randers, L1Drift };

/// Specification of an asymmetric norm on R^dim.
///   Euclidean:  F(v) = |v|
///   Randers:    F(v) = |v| + <drift, v>,      |drift| < 1
///   L1Drift:    F(v) = sum|v_i| + omega*sum v_i,  |omega| < 1
struct NormSpec {
  NormVariant variant = NormVariant::Euclidean;
  int dimension = 0;
  Vec drift;           // Randers only
  double omega = 0.0;  // L1Drift only

  static NormSpec euclidean(int dim);
  static NormSpec randers(Vec drift);
  static NormSpec l1_drift(int dim, double omega);

  /// True for variants that are smooth and strongly convex away from 0.
  bool smooth() const { return variant != NormVariant::L1Drift; }
};

double norm(const NormSpec& spec, const Vec& v);
double reverse_norm(const NormSpec& spec, const Vec& v);

/// Dual norm F*(xi) = sup{ <y, xi> : F(y) = 1 }.
double dual_norm(const NormSpec& spec, const Vec& xi);

/// Inverse Legendre map: the v with F(v) = F*(xi) and <v, xi> = F(v) F*(xi).
/// Smooth variants only.
Vec legendre_inverse(const NormSpec& spec, const Vec& xi);

/// sup_{v != 0} F(-v)/F(v); closed form per variant.
double reversibility(const NormSpec& spec);

std::string norm_spec_to_json(const NormSpec& spec);
NormSpec norm_spec_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Fiber norms: a single tangent-space norm given by callables. Metric models
// plug their pointwise F(x, .) in here so the dual/Legendre machinery below
// is shared between flat norms and manifold fibers.

struct FiberNorm {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // dF at v != 0
};

FiberNorm fiber_of(const NormSpec& spec);

struct FiberDual {
  double value = 0.0;   // F*(xi)
  Vec maximizer;        // y* with F(y*) = 1 attaining the sup (xi != 0)
  double stationarity = 0.0;
  int iterations = 0;
};

/// Maximizes <y, xi> over the indicatrix {F = 1} by projected gradient ascent
/// with a Newton polish. 200-iteration ascent cap, 1e-12 stationarity target.
FiberDual dual_on_fiber(const FiberNorm& fiber, const Vec& xi);

/// Legendre inverse on a fiber: scale the dual maximizer so F(v) = F*(xi).
Vec legendre_inverse_on_fiber(const FiberNorm& fiber, const Vec& xi);

}  // namespace asymflow

#endif
