#include "asymflow/norms.hpp"

#include <algorithm>
#include <cmath>

#include "asymflow/errors.hpp"

namespace asymflow {

namespace {

void check_dim(const NormSpec& spec, const Vec& v, const char* op) {
  if (static_cast<int>(v.size()) != spec.dimension)
    throw InputError(std::string(op) + ": vector length does not match norm dimension");
}

double l1_value(const NormSpec& spec, const Vec& v) {
  double abs_sum = 0.0, sum = 0.0;
  for (double x : v) {
    abs_sum += std::fabs(x);
    sum += x;
  }
  return abs_sum + spec.omega * sum;
}

}  // namespace

NormSpec NormSpec::euclidean(int dim) {
  if (dim < 1) throw InputError("norm dimension must be >= 1");
  NormSpec s;
  s.variant = NormVariant::Euclidean;
  s.dimension = dim;
  return s;
}

NormSpec NormSpec::randers(Vec drift) {
  if (drift.empty()) throw InputError("norm dimension must be >= 1");
  if (norm2(drift) >= 1.0)
    throw InputError("randers drift must have euclidean length < 1");
  NormSpec s;
  s.variant = NormVariant::Randers;
  s.dimension = static_cast<int>(drift.size());
  s.drift = std::move(drift);
  return s;
}

NormSpec NormSpec::l1_drift(int dim, double omega) {
  if (dim < 1) throw InputError("norm dimension must be >= 1");
  if (std::fabs(omega) >= 1.0) throw InputError("l1 drift omega must satisfy |omega| < 1");
  NormSpec s;
  s.variant = NormVariant::L1Drift;
  s.dimension = dim;
  s.omega = omega;
  return s;
}

double norm(const NormSpec& spec, const Vec& v) {
  check_dim(spec, v, "norm");
  switch (spec.variant) {
    case NormVariant::Euclidean:
      return norm2(v);
    case NormVariant::Randers:
      return norm2(v) + dot(spec.drift, v);
    case NormVariant::L1Drift:
      return l1_value(spec, v);
  }
  return 0.0;
}

double reverse_norm(const NormSpec& spec, const Vec& v) {
  check_dim(spec, v, "reverse_norm");
  return norm(spec, -v);
}

double dual_norm(const NormSpec& spec, const Vec& xi) {
  check_dim(spec, xi, "dual_norm");
  switch (spec.variant) {
    case NormVariant::Euclidean:
      return norm2(xi);
    case NormVariant::Randers:
      return dual_on_fiber(fiber_of(spec), xi).value;
    case NormVariant::L1Drift: {
      // Polyhedral unit ball; the sup is attained at a vertex +-e_i / F(+-e_i).
      double best = 0.0;
      for (double x : xi) {
        best = std::max(best, x / (1.0 + spec.omega));
        best = std::max(best, -x / (1.0 - spec.omega));
      }
      return best;
    }
  }
  return 0.0;
}

Vec legendre_inverse(const NormSpec& spec, const Vec& xi) {
  check_dim(spec, xi, "legendre_inverse");
  if (!spec.smooth())
    throw ModelError("legendre_inverse requires a smooth norm variant");
  if (spec.variant == NormVariant::Euclidean) return xi;
  return legendre_inverse_on_fiber(fiber_of(spec), xi);
}

double reversibility(const NormSpec& spec) {
  switch (spec.variant) {
    case NormVariant::Euclidean:
      return 1.0;
    case NormVariant::Randers: {
      const double b = norm2(spec.drift);
      return (1.0 + b) / (1.0 - b);
    }
    case NormVariant::L1Drift: {
      const double w = std::fabs(spec.omega);
      return (1.0 + w) / (1.0 - w);
    }
  }
  return 1.0;
}

FiberNorm fiber_of(const NormSpec& spec) {
  FiberNorm f;
  f.dim = spec.dimension;
  switch (spec.variant) {
    case NormVariant::Euclidean:
      f.value = [](const Vec& v) { return norm2(v); };
      f.gradient = [](const Vec& v) { return (1.0 / norm2(v)) * v; };
      break;
    case NormVariant::Randers: {
      const Vec drift = spec.drift;
      f.value = [drift](const Vec& v) { return norm2(v) + dot(drift, v); };
      f.gradient = [drift](const Vec& v) {
        Vec g = (1.0 / norm2(v)) * v;
        axpy(1.0, drift, g);
        return g;
      };
      break;
    }
    case NormVariant::L1Drift: {
      const NormSpec s = spec;
      f.value = [s](const Vec& v) { return l1_value(s, v); };
      f.gradient = nullptr;  // not differentiable; callers must not ask
      break;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Dual / Legendre machinery on a fiber.

namespace {

Vec normalized(const Vec& v) { return (1.0 / norm2(v)) * v; }

// Finite-difference Hessian of F at y from the analytic gradient.
Mat fd_hessian(const FiberNorm& fiber, const Vec& y) {
  const int d = fiber.dim;
  const double h = 1e-6 * norm2(y);
  Mat hess(d, d);
  for (int j = 0; j < d; ++j) {
    Vec yp = y, ym = y;
    yp[j] += h;
    ym[j] -= h;
    const Vec gp = fiber.gradient(yp);
    const Vec gm = fiber.gradient(ym);
    for (int i = 0; i < d; ++i) hess(i, j) = (gp[i] - gm[i]) / (2.0 * h);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double s = 0.5 * (hess(i, j) + hess(j, i));
      hess(i, j) = hess(j, i) = s;
    }
  return hess;
}

}  // namespace

FiberDual dual_on_fiber(const FiberNorm& fiber, const Vec& xi) {
  const int d = fiber.dim;
  FiberDual out;
  const double xi_len = norm2(xi);
  if (xi_len == 0.0) {
    out.maximizer = zeros(d);
    return out;
  }
  const Vec xin = (1.0 / xi_len) * xi;  // work with a unit covector

  // Ascent phase on the sphere: maximize R(u) = <u, xin> / F(u).
  Vec u = xin;
  double fu = fiber.value(u);
  double ratio = dot(u, xin) / fu;
  int it = 0;
  for (; it < 200; ++it) {
    const Vec gf = fiber.gradient(u);
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = (xin[i] - ratio * gf[i]) / fu;
    const double gu = dot(g, u);
    Vec gt = g;
    axpy(-gu, u, gt);
    const double gt_len = norm2(gt);
    if (gt_len < 1e-13) break;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vec trial = u;
      axpy(alpha, gt, trial);
      trial = normalized(trial);
      const double ft = fiber.value(trial);
      const double rt = dot(trial, xin) / ft;
      if (rt > ratio + 1e-16) {
        u = trial;
        fu = ft;
        ratio = rt;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }

  // Newton polish on the indicatrix: xi = lambda dF(y), F(y) = 1.
  Vec y = (1.0 / fu) * u;
  double lambda = dot(y, xin);
  for (int polish = 0; polish < 60; ++polish) {
    const Vec gf = fiber.gradient(y);
    Vec residual(d + 1);
    double res_norm = 0.0;
    for (int i = 0; i < d; ++i) {
      residual[i] = xin[i] - lambda * gf[i];
      res_norm = std::max(res_norm, std::fabs(residual[i]));
    }
    residual[d] = fiber.value(y) - 1.0;
    res_norm = std::max(res_norm, std::fabs(residual[d]));
    if (res_norm < 1e-14) break;

    const Mat hess = fd_hessian(fiber, y);
    Mat jac(d + 1, d + 1);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) jac(i, j) = -lambda * hess(i, j);
      jac(i, d) = -gf[i];
      jac(d, i) = gf[i];
    }
    jac(d, d) = 0.0;
    Vec step;
    try {
      step = solve(jac, -1.0 * residual);
    } catch (const NumericalError&) {
      break;
    }
    for (int i = 0; i < d; ++i) y[i] += step[i];
    lambda += step[d];
  }

  // Final stationarity report in the normalized problem.
  {
    const Vec gf = fiber.gradient(y);
    double res = std::fabs(fiber.value(y) - 1.0);
    for (int i = 0; i < d; ++i) res = std::max(res, std::fabs(xin[i] - lambda * gf[i]));
    out.stationarity = res;
  }
  if (out.stationarity > 1e-9)
    throw NumericalError("dual_on_fiber failed to converge", out.stationarity);

  out.value = lambda * xi_len;
  out.maximizer = y;
  out.iterations = it;
  return out;
}

Vec legendre_inverse_on_fiber(const FiberNorm& fiber, const Vec& xi) {
  if (norm2(xi) == 0.0) return zeros(fiber.dim);
  const FiberDual dual = dual_on_fiber(fiber, xi);
  return dual.value * dual.maximizer;
}

}  // namespace asymflow
