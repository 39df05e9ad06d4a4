#include "asymflow/metric_models.hpp"

#include <algorithm>
#include <cmath>

#include "asymflow/errors.hpp"

namespace asymflow {

namespace {

// sum of squared 2x2 minors of (a, b); equals |a|^2|b|^2 - <a,b>^2 without
// the cancellation of the textbook expression
double cross_term(const Vec& a, const Vec& b) {
  double s = 0.0;
  const int d = static_cast<int>(a.size());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double m = a[i] * b[j] - a[j] * b[i];
      s += m * m;
    }
  return s;
}

double funk_metric(const Vec& x, const Vec& v) {
  const double x2 = dot(x, x);
  const double q = dot(v, v) - cross_term(x, v);
  return (std::sqrt(std::max(q, 0.0)) + dot(x, v)) / (1.0 - x2);
}

Vec funk_metric_gradient(const Vec& x, const Vec& v) {
  const double x2 = dot(x, x);
  const double xv = dot(x, v);
  const double q = std::max(dot(v, v) - cross_term(x, v), 1e-300);
  const double sq = std::sqrt(q);
  // dQ/dv = 2(1-|x|^2) v + 2<x,v> x
  Vec g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    g[i] = (((1.0 - x2) * v[i] + xv * x[i]) / sq + x[i]) / (1.0 - x2);
  return g;
}

double funk_distance(const Vec& x, const Vec& y) {
  Vec delta = y - x;
  const double dl = norm2(delta);
  if (dl == 0.0) return 0.0;
  // |x|^2|y|^2 - <x,y>^2 via minors of (x, delta): x ^ y = x ^ delta
  const double disc = dl * dl - cross_term(x, delta);
  const double sq = std::sqrt(std::max(disc, 0.0));
  const double num = sq - dot(x, delta);
  const double den = sq - dot(y, delta);
  return std::log(num / den);
}

double black_box_polyline_distance(const MetricModel& model, const Vec& x, const Vec& y);

}  // namespace

MetricModel MetricModel::funk_ball(int dim) {
  if (dim < 2) throw InputError("funk ball dimension must be >= 2");
  MetricModel m;
  m.variant = ModelVariant::FunkBall;
  m.dimension = dim;
  return m;
}

MetricModel MetricModel::minkowski(NormSpec spec) {
  MetricModel m;
  m.variant = ModelVariant::MinkowskiSpace;
  m.dimension = spec.dimension;
  m.norm_spec = std::move(spec);
  return m;
}

MetricModel MetricModel::toy_half_line() {
  MetricModel m;
  m.variant = ModelVariant::ToyHalfLine;
  m.dimension = 1;
  return m;
}

MetricModel MetricModel::black_box_chart(int dim, std::function<bool(const Vec&)> domain,
                                         std::function<double(const Vec&, const Vec&)> metric) {
  if (dim < 1) throw InputError("black box chart dimension must be >= 1");
  MetricModel m;
  m.variant = ModelVariant::BlackBoxChart;
  m.dimension = dim;
  m.domain_predicate = std::move(domain);
  m.metric_evaluator = std::move(metric);
  return m;
}

bool MetricModel::in_domain(const Vec& x) const {
  if (static_cast<int>(x.size()) != dimension) return false;
  switch (variant) {
    case ModelVariant::FunkBall:
      return norm2(x) < 1.0;
    case ModelVariant::MinkowskiSpace:
    case ModelVariant::ToyHalfLine:
      return true;
    case ModelVariant::BlackBoxChart:
      return domain_predicate(x);
  }
  return false;
}

void MetricModel::require_in_domain(const Vec& x, const char* op) const {
  if (static_cast<int>(x.size()) != dimension)
    throw InputError(std::string(op) + ": point dimension mismatch");
  if (!in_domain(x)) throw DomainError(std::string(op) + ": point outside model domain");
}

Vec MetricModel::sample_domain_point(Rng& rng) const {
  switch (variant) {
    case ModelVariant::FunkBall:
      return rng.ball_point(dimension, 0.95);
    case ModelVariant::MinkowskiSpace:
      return rng.ball_point(dimension, 1.0);
    case ModelVariant::ToyHalfLine:
      return Vec{rng.uniform()};
    case ModelVariant::BlackBoxChart:
      throw ModelError("black box chart has no canonical domain sampler");
  }
  return {};
}

double MetricModel::pointwise_reversibility(const Vec& x) const {
  require_in_domain(x, "pointwise_reversibility");
  switch (variant) {
    case ModelVariant::FunkBall: {
      const double r = norm2(x);
      return (1.0 + r) / (1.0 - r);
    }
    case ModelVariant::MinkowskiSpace:
      return reversibility(norm_spec);
    case ModelVariant::BlackBoxChart: {
      // sampled sup over directions
      Rng rng(0xa5f0c3d1u);
      double best = 1.0;
      for (int k = 0; k < 512; ++k) {
        const Vec u = rng.direction(dimension);
        const double f = metric_evaluator(x, u);
        const double fr = metric_evaluator(x, -u);
        if (f > 1e-15) best = std::max(best, fr / f);
        if (fr > 1e-15) best = std::max(best, f / fr);
      }
      return best;
    }
    case ModelVariant::ToyHalfLine:
      throw ModelError("toy half line has no pointwise metric");
  }
  return 1.0;
}

double ReversibilityProfile::at(double r) const {
  for (std::size_t j = 0; j < radii.size(); ++j)
    if (radii[j] >= r) return values[j];
  return values.empty() ? 1.0 : values.back();
}

double metric_value(const MetricModel& model, const Vec& x, const Vec& v) {
  model.require_in_domain(x, "metric_value");
  if (static_cast<int>(v.size()) != model.dimension)
    throw InputError("metric_value: vector dimension mismatch");
  switch (model.variant) {
    case ModelVariant::FunkBall:
      return funk_metric(x, v);
    case ModelVariant::MinkowskiSpace:
      return norm(model.norm_spec, v);
    case ModelVariant::BlackBoxChart:
      return model.metric_evaluator(x, v);
    case ModelVariant::ToyHalfLine:
      throw ModelError("toy half line has no pointwise metric");
  }
  return 0.0;
}

FiberNorm fiber(const MetricModel& model, const Vec& x) {
  model.require_in_domain(x, "fiber");
  FiberNorm f;
  f.dim = model.dimension;
  switch (model.variant) {
    case ModelVariant::FunkBall: {
      const Vec base = x;
      f.value = [base](const Vec& v) { return funk_metric(base, v); };
      f.gradient = [base](const Vec& v) { return funk_metric_gradient(base, v); };
      break;
    }
    case ModelVariant::MinkowskiSpace:
      f = fiber_of(model.norm_spec);
      break;
    case ModelVariant::BlackBoxChart: {
      const Vec base = x;
      const auto eval = model.metric_evaluator;
      f.value = [base, eval](const Vec& v) { return eval(base, v); };
      f.gradient = [base, eval](const Vec& v) {
        const int d = static_cast<int>(v.size());
        const double h = 1e-7 * std::max(norm2(v), 1e-12);
        Vec g(d);
        for (int i = 0; i < d; ++i) {
          Vec vp = v, vm = v;
          vp[i] += h;
          vm[i] -= h;
          g[i] = (eval(base, vp) - eval(base, vm)) / (2.0 * h);
        }
        return g;
      };
      break;
    }
    case ModelVariant::ToyHalfLine:
      throw ModelError("toy half line has no tangent structure");
  }
  return f;
}

MetricTensor metric_tensor(const MetricModel& model, const Vec& x, const Vec& v) {
  if (!model.smooth()) throw ModelError("metric_tensor requires a smooth model");
  model.require_in_domain(x, "metric_tensor");
  const double vlen = norm2(v);
  if (vlen == 0.0) throw InputError("metric_tensor: direction must be nonzero");

  const FiberNorm f = fiber(model, x);
  const auto half_f2 = [&f](const Vec& w) {
    const double val = f.value(w);
    return 0.5 * val * val;
  };

  const int d = model.dimension;
  const double h = 1e-5 * vlen;
  Mat g(d, d);
  const double center = half_f2(v);
  for (int i = 0; i < d; ++i) {
    Vec vp = v, vm = v;
    vp[i] += h;
    vm[i] -= h;
    g(i, i) = (half_f2(vp) - 2.0 * center + half_f2(vm)) / (h * h);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Vec vpp = v, vpm = v, vmp = v, vmm = v;
      vpp[i] += h; vpp[j] += h;
      vpm[i] += h; vpm[j] -= h;
      vmp[i] -= h; vmp[j] += h;
      vmm[i] -= h; vmm[j] -= h;
      const double val =
          (half_f2(vpp) - half_f2(vpm) - half_f2(vmp) + half_f2(vmm)) / (4.0 * h * h);
      g(i, j) = g(j, i) = val;
    }
  }

  // positive definiteness signals strong convexity of the evaluator
  const Vec ev = sym_eigenvalues(g);
  double ev_min = ev[0], ev_max = ev[0];
  for (double e : ev) {
    ev_min = std::min(ev_min, e);
    ev_max = std::max(ev_max, e);
  }
  if (!(ev_min > 1e-7 * std::max(1.0, ev_max)))
    throw ModelError("metric_tensor: indefinite result (evaluator not strongly convex)");

  return MetricTensor{x, v, g};
}

double distance(const MetricModel& model, const Vec& x, const Vec& y) {
  model.require_in_domain(x, "distance");
  model.require_in_domain(y, "distance");
  switch (model.variant) {
    case ModelVariant::FunkBall:
      return funk_distance(x, y);
    case ModelVariant::MinkowskiSpace:
      return norm(model.norm_spec, y - x);
    case ModelVariant::ToyHalfLine:
      return y[0] >= x[0] ? y[0] - x[0] : 1.0;
    case ModelVariant::BlackBoxChart:
      return black_box_polyline_distance(model, x, y);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Geodesic spray.

namespace {

// Spray coefficients via G^i = 1/4 g^{il} ( d/ds [dL/dy^l](x+sy) |_0 - dL/dx^l ),
// L = F^2. The v-gradient of L is analytic through the fiber; x-derivatives
// are central differences.
Vec spray_acceleration(const MetricModel& model, const Vec& x, const Vec& y) {
  const int d = model.dimension;
  const double hx = 1e-6 * (1.0 + norm2(x));
  const double hs = 1e-6 / std::max(1.0, norm2(y));

  const auto l_grad = [&model](const Vec& at, const Vec& w) {
    const FiberNorm f = fiber(model, at);
    Vec g = f.gradient(w);
    const double val = f.value(w);
    for (auto& gi : g) gi *= 2.0 * val;
    return g;
  };
  const auto l_value = [&model](const Vec& at, const Vec& w) {
    const double val = metric_value(model, at, w);
    return val * val;
  };

  Vec xp = x, xm = x;
  axpy(hs, y, xp);
  axpy(-hs, y, xm);
  const Vec mp = l_grad(xp, y);
  const Vec mm = l_grad(xm, y);

  Vec rhs(d);
  for (int l = 0; l < d; ++l) {
    Vec ep = x, em = x;
    ep[l] += hx;
    em[l] -= hx;
    const double dl_dx = (l_value(ep, y) - l_value(em, y)) / (2.0 * hx);
    rhs[l] = (mp[l] - mm[l]) / (2.0 * hs) - dl_dx;
  }

  const Mat g = metric_tensor(model, x, y).g;
  // acceleration = -2 G = -1/2 g^{-1} rhs
  Vec acc = solve(g, rhs);
  for (auto& a : acc) a *= -0.5;
  return acc;
}

}  // namespace

GeodesicResult geodesic(const MetricModel& model, const Vec& x, const Vec& v, double T,
                        int steps) {
  model.require_in_domain(x, "geodesic");
  if (norm2(v) == 0.0) throw InputError("geodesic: initial velocity must be nonzero");
  if (steps < 1) throw InputError("geodesic: steps must be >= 1");
  if (!model.has_tangent_structure()) throw ModelError("geodesic: model has no tangent structure");

  GeodesicResult out;
  out.curve.times.reserve(steps + 1);
  out.curve.points.reserve(steps + 1);
  out.curve.times.push_back(0.0);
  out.curve.points.push_back(x);
  out.velocities.push_back(v);

  if (model.variant == ModelVariant::MinkowskiSpace) {
    for (int k = 1; k <= steps; ++k) {
      const double t = T * k / steps;
      Vec p = x;
      axpy(t, v, p);
      out.curve.times.push_back(t);
      out.curve.points.push_back(p);
      out.velocities.push_back(v);
    }
    return out;
  }

  const double dt = T / steps;
  Vec pos = x, vel = v;
  for (int k = 1; k <= steps; ++k) {
    Vec p1, p2, p3, v1, v2, v3, a0, a1, a2, a3;
    try {
      a0 = spray_acceleration(model, pos, vel);
      p1 = pos; axpy(0.5 * dt, vel, p1);
      v1 = vel; axpy(0.5 * dt, a0, v1);
      a1 = spray_acceleration(model, p1, v1);
      p2 = pos; axpy(0.5 * dt, v1, p2);
      v2 = vel; axpy(0.5 * dt, a1, v2);
      a2 = spray_acceleration(model, p2, v2);
      p3 = pos; axpy(dt, v2, p3);
      v3 = vel; axpy(dt, a2, v3);
      a3 = spray_acceleration(model, p3, v3);
    } catch (const DomainError&) {
      out.exited = true;
      out.exit_time = out.curve.times.back();
      return out;
    }
    Vec new_pos = pos, new_vel = vel;
    for (int i = 0; i < model.dimension; ++i) {
      new_pos[i] += dt / 6.0 * (vel[i] + 2.0 * v1[i] + 2.0 * v2[i] + v3[i]);
      new_vel[i] += dt / 6.0 * (a0[i] + 2.0 * a1[i] + 2.0 * a2[i] + a3[i]);
    }
    if (!model.in_domain(new_pos)) {
      out.exited = true;
      out.exit_time = out.curve.times.back();
      return out;
    }
    pos = new_pos;
    vel = new_vel;
    out.curve.times.push_back(dt * k);
    out.curve.points.push_back(pos);
    out.velocities.push_back(vel);
  }
  return out;
}

Vec gradient(const MetricModel& model, const Vec& x, const Vec& dphi) {
  if (!model.smooth()) throw ModelError("gradient requires a smooth model");
  model.require_in_domain(x, "gradient");
  if (norm2(dphi) == 0.0) return zeros(model.dimension);
  const FiberNorm f = fiber(model, x);
  Vec grad = legendre_inverse_on_fiber(f, dphi);
  // certify the Legendre identities
  const double fg = f.value(grad);
  const double fstar = dual_on_fiber(f, dphi).value;
  const double res = std::max(std::fabs(fg - fstar), std::fabs(dot(grad, dphi) - fg * fstar));
  if (res > 1e-8 * (1.0 + fstar * fstar))
    throw NumericalError("gradient: legendre certification failed", res);
  return grad;
}

ReversibilityProfile reversibility_profile(const MetricModel& model, const Vec& center,
                                           const Vec& radii, int samples, std::uint64_t seed) {
  model.require_in_domain(center, "reversibility_profile");
  for (std::size_t j = 1; j < radii.size(); ++j)
    if (!(radii[j] > radii[j - 1]))
      throw InputError("reversibility_profile: radii must be increasing");

  ReversibilityProfile profile;
  profile.center = center;
  profile.radii = radii;
  profile.values.assign(radii.size(), 1.0);

  Rng root(seed);
  const int d = model.dimension;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double r = radii[j];
    Rng rng = root.split(j);

    // candidate proposal covering the closed forward r-ball
    const auto propose = [&]() -> Vec {
      switch (model.variant) {
        case ModelVariant::FunkBall:
          return rng.ball_point(d, std::min(0.999999, 1.0 - std::exp(-r)));
        case ModelVariant::MinkowskiSpace: {
          double b = 0.0;
          if (model.norm_spec.variant == NormVariant::Randers) b = norm2(model.norm_spec.drift);
          if (model.norm_spec.variant == NormVariant::L1Drift)
            b = std::fabs(model.norm_spec.omega);
          Vec p = rng.ball_point(d, r / (1.0 - b));
          axpy(1.0, center, p);
          return p;
        }
        default:
          return Vec{center[0] + rng.uniform(0.0, r)};
      }
    };

    std::vector<Vec> pool;
    pool.reserve(2 * samples);
    int attempts = 0;
    const int cap = 400 * samples;
    while (static_cast<int>(pool.size()) < 2 * samples && attempts < cap) {
      ++attempts;
      Vec cand = propose();
      if (!model.in_domain(cand)) continue;
      if (distance(model, center, cand) <= r) pool.push_back(std::move(cand));
    }

    double best = (j == 0) ? 1.0 : profile.values[j - 1];
    for (std::size_t k = 0; k + 1 < pool.size(); k += 2) {
      Vec a = pool[k];
      Vec b = pool[k + 1];
      if ((k / 2) % 2 == 1) {
        // near pair: probes the pointwise reversibility at a
        Vec nb = a;
        axpy(r * 1e-3, rng.direction(d), nb);
        if (model.in_domain(nb) && distance(model, center, nb) <= r) b = nb;
      }
      const double dab = distance(model, a, b);
      const double dba = distance(model, b, a);
      if (dba > 1e-15) best = std::max(best, dab / dba);
      if (dab > 1e-15) best = std::max(best, dba / dab);
    }
    profile.values[j] = best;
  }
  return profile;
}

double uniform_constant(const MetricModel& model, const SampleSpec& spec) {
  if (!model.smooth()) throw ModelError("uniform_constant requires a smooth model");
  Rng rng(spec.seed);
  double best = 1.0;
  const int d = model.dimension;
  for (int k = 0; k < spec.count; ++k) {
    const Vec x = model.sample_domain_point(rng);
    const Vec v = rng.direction(d);
    const Vec z = rng.direction(d);
    const Vec y = rng.direction(d);
    const Mat gv = metric_tensor(model, x, v).g;
    const Mat gz = metric_tensor(model, x, z).g;
    const double num = quad_form(gv, y);
    const double den = quad_form(gz, y);
    if (den > 0.0) best = std::max(best, num / den);
  }
  return best;
}

double ball_reversibility_bound(const MetricModel& model, const Vec& center, double r) {
  if (model.variant == ModelVariant::MinkowskiSpace) return reversibility(model.norm_spec);
  if (model.variant == ModelVariant::FunkBall && norm2(center) < 1e-15) {
    // forward r-ball around 0 is the Euclidean ball of radius 1 - e^-r, which
    // is convex and chords realize distances; the pointwise bound transfers
    return 2.0 * std::exp(r) - 1.0;
  }
  return std::nan("");
}

// ---------------------------------------------------------------------------
// Black-box distance: polyline descent.

namespace {

double polyline_length(const MetricModel& model, const std::vector<Vec>& nodes) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const Vec mid = 0.5 * (nodes[i] + nodes[i + 1]);
    total += model.metric_evaluator(mid, nodes[i + 1] - nodes[i]);
  }
  return total;
}

double black_box_polyline_distance(const MetricModel& model, const Vec& x, const Vec& y) {
  const int d = model.dimension;
  double best = std::nan("");

  std::vector<Vec> nodes{x, y};
  for (int level = 1; level <= 6; ++level) {
    // split every segment
    std::vector<Vec> refined;
    refined.reserve(2 * nodes.size());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      refined.push_back(nodes[i]);
      Vec mid = 0.5 * (nodes[i] + nodes[i + 1]);
      if (model.in_domain(mid)) refined.push_back(std::move(mid));
    }
    refined.push_back(nodes.back());
    nodes = std::move(refined);

    // coordinate descent with a shrinking pattern step on interior nodes
    double step = norm2(y - x) / static_cast<double>(nodes.size());
    if (step <= 0.0) step = 1e-3;
    double length = polyline_length(model, nodes);
    while (step > 1e-9) {
      bool improved = false;
      for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
        for (int c = 0; c < d; ++c) {
          for (double sign : {1.0, -1.0}) {
            Vec trial = nodes[i];
            trial[c] += sign * step;
            if (!model.in_domain(trial)) continue;
            const Vec saved = nodes[i];
            nodes[i] = trial;
            const double trial_length = polyline_length(model, nodes);
            if (trial_length < length - 1e-15) {
              length = trial_length;
              improved = true;
            } else {
              nodes[i] = saved;
            }
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (std::isnan(best) || length < best) best = length;
  }
  if (std::isnan(best))
    throw NumericalError("black box distance: no feasible polyline", 0.0);
  return best;
}

}  // namespace

}  // namespace asymflow
