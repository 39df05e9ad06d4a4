#include "asymflow/gradient_flow.hpp"

#include <algorithm>
#include <cmath>

#include "asymflow/errors.hpp"

namespace asymflow {

// ---------------------------------------------------------------------------
// Dissipation triple.

DissipationTriple DissipationTriple::power_law(double p) {
  if (!(p > 1.0)) throw InputError("power law exponent must be > 1");
  DissipationTriple t;
  t.power_ = p;
  return t;
}

DissipationTriple DissipationTriple::monotone_table(Vec xs, Vec ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw InputError("monotone table needs matching xs/ys with >= 2 knots");
  if (xs[0] != 0.0 || ys[0] != 0.0) throw InputError("monotone table must start at h(0) = 0");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InputError("monotone table xs must increase");
    if (!(ys[i] > ys[i - 1])) throw InputError("monotone table ys must strictly increase");
  }

  DissipationTriple t;
  t.xs_ = std::move(xs);
  t.ys_ = std::move(ys);

  // Fritsch-Carlson shape-preserving tangents
  const int n = static_cast<int>(t.xs_.size());
  Vec widths(n - 1), slopes(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    widths[i] = t.xs_[i + 1] - t.xs_[i];
    slopes[i] = (t.ys_[i + 1] - t.ys_[i]) / widths[i];
  }
  t.tangents_.assign(n, 0.0);
  t.tangents_[0] = slopes[0];
  t.tangents_[n - 1] = slopes[n - 2];
  for (int i = 1; i < n - 1; ++i) {
    if (slopes[i - 1] * slopes[i] <= 0.0) {
      t.tangents_[i] = 0.0;
    } else {
      const double w1 = 2.0 * widths[i] + widths[i - 1];
      const double w2 = widths[i] + 2.0 * widths[i - 1];
      t.tangents_[i] = (w1 + w2) / (w1 / slopes[i - 1] + w2 / slopes[i]);
    }
  }

  // cumulative psi at the knots (exact integrals of the cubic pieces)
  t.psi_knots_.assign(n, 0.0);
  for (int i = 0; i < n - 1; ++i) {
    const double h = widths[i];
    // integral over the full cell of the Hermite basis: 1/2, 1/12, 1/2, -1/12
    const double cell = h * (0.5 * t.ys_[i] + h * t.tangents_[i] / 12.0 + 0.5 * t.ys_[i + 1] -
                             h * t.tangents_[i + 1] / 12.0);
    t.psi_knots_[i + 1] = t.psi_knots_[i] + cell;
  }
  return t;
}

double DissipationTriple::hermite(double x) const {
  const int n = static_cast<int>(xs_.size());
  if (x >= xs_[n - 1])  // linear extension beyond the table
    return ys_[n - 1] + tangents_[n - 1] * (x - xs_[n - 1]);
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (xs_[mid] <= x ? lo : hi) = mid;
  }
  const double h = xs_[lo + 1] - xs_[lo];
  const double s = (x - xs_[lo]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return ys_[lo] * (2 * s3 - 3 * s2 + 1) + h * tangents_[lo] * (s3 - 2 * s2 + s) +
         ys_[lo + 1] * (-2 * s3 + 3 * s2) + h * tangents_[lo + 1] * (s3 - s2);
}

double DissipationTriple::hermite_integral(double x) const {
  const int n = static_cast<int>(xs_.size());
  if (x >= xs_[n - 1]) {
    const double dx = x - xs_[n - 1];
    return psi_knots_[n - 1] + ys_[n - 1] * dx + 0.5 * tangents_[n - 1] * dx * dx;
  }
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (xs_[mid] <= x ? lo : hi) = mid;
  }
  const double h = xs_[lo + 1] - xs_[lo];
  const double s = (x - xs_[lo]) / h;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  const double i00 = 0.5 * s4 - s3 + s;
  const double i10 = 0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2;
  const double i01 = -0.5 * s4 + s3;
  const double i11 = 0.25 * s4 - s3 / 3.0;
  return psi_knots_[lo] + h * (ys_[lo] * i00 + h * tangents_[lo] * i10 + ys_[lo + 1] * i01 +
                               h * tangents_[lo + 1] * i11);
}

double DissipationTriple::h(double x) const {
  if (x < 0.0) throw InputError("dissipation rate argument must be >= 0");
  if (is_power_law()) return std::pow(x, power_ - 1.0);
  return hermite(x);
}

double DissipationTriple::h_inverse(double y) const {
  if (y < 0.0) throw InputError("h_inverse argument must be >= 0");
  if (is_power_law()) return std::pow(y, 1.0 / (power_ - 1.0));
  if (y == 0.0) return 0.0;
  // bracket, extending linearly past the table if needed
  double lo = 0.0, hi = xs_.back();
  while (hermite(hi) < y) hi *= 2.0;
  // bisection to 1e-12
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hermite(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double DissipationTriple::psi(double x) const {
  if (x < 0.0) throw InputError("psi argument must be >= 0");
  if (is_power_law()) return std::pow(x, power_) / power_;
  return hermite_integral(x);
}

double DissipationTriple::psi_star(double y) const { return fenchel_conjugate(*this, y); }

double fenchel_conjugate(const DissipationTriple& triple, double y) {
  if (y < 0.0) throw InputError("fenchel_conjugate argument must be >= 0");
  if (y == 0.0) return 0.0;
  if (triple.is_power_law()) {
    const double p = triple.exponent();
    const double q = p / (p - 1.0);
    return std::pow(y, q) / q;
  }
  // the sup is attained exactly where y = h(x)
  const double x = triple.h_inverse(y);
  return x * y - triple.psi(x);
}

// ---------------------------------------------------------------------------
// Potentials.

Potential Potential::quadratic(Mat a, Vec b, double c) {
  if (a.rows != a.cols || a.rows != static_cast<int>(b.size()))
    throw InputError("quadratic potential: shape mismatch");
  for (int i = 0; i < a.rows; ++i)
    for (int j = i + 1; j < a.cols; ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-12)
        throw InputError("quadratic potential: matrix must be symmetric");
  Potential p;
  p.kind_ = Kind::Quadratic;
  p.dim_ = a.rows;
  p.a_ = std::move(a);
  p.b_ = std::move(b);
  p.c_ = c;
  return p;
}

Potential Potential::linear(Vec b, double c) {
  Potential p;
  p.kind_ = Kind::Linear;
  p.dim_ = static_cast<int>(b.size());
  p.b_ = std::move(b);
  p.c_ = c;
  return p;
}

Potential Potential::black_box(int dim, std::function<double(const Vec&)> f) {
  Potential p;
  p.kind_ = Kind::BlackBox;
  p.dim_ = dim;
  p.f_ = std::move(f);
  return p;
}

double Potential::value(const Vec& x) const {
  switch (kind_) {
    case Kind::Quadratic:
      return 0.5 * dot(a_.apply(x), x) + dot(b_, x) + c_;
    case Kind::Linear:
      return dot(b_, x) + c_;
    case Kind::BlackBox:
      return f_(x);
  }
  return 0.0;
}

Vec Potential::differential(const Vec& x) const {
  switch (kind_) {
    case Kind::Quadratic: {
      Vec d = a_.apply(x);
      axpy(1.0, b_, d);
      return d;
    }
    case Kind::Linear:
      return b_;
    case Kind::BlackBox: {
      const double h = 1e-6;
      Vec d(dim_);
      for (int i = 0; i < dim_; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        d[i] = (f_(xp) - f_(xm)) / (2.0 * h);
      }
      return d;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Flow integration.

Vec flow_velocity(const MetricModel& model, const DissipationTriple& triple,
                  const Potential& phi, const Vec& x) {
  const Vec g = gradient(model, x, -phi.differential(x));
  const double fg = metric_value(model, x, g);
  if (fg <= 1e-12) return zeros(model.dimension);
  const double speed = triple.h_inverse(fg);
  return (speed / fg) * g;
}

namespace {

struct LedgerEntry {
  Vec velocity;
  double speed = 0.0;
  double phi = 0.0;
  double psi_term = 0.0;
  double psi_star_term = 0.0;
};

LedgerEntry ledger_at(const MetricModel& model, const DissipationTriple& triple,
                      const Potential& phi, const Vec& x) {
  LedgerEntry e;
  e.phi = phi.value(x);
  const Vec g = gradient(model, x, -phi.differential(x));
  const double fg = metric_value(model, x, g);
  if (fg <= 1e-12) {
    e.velocity = zeros(model.dimension);
  } else {
    e.velocity = (triple.h_inverse(fg) / fg) * g;
  }
  e.speed = metric_value(model, x, e.velocity);
  e.psi_term = triple.psi(e.speed);
  e.psi_star_term = triple.psi_star(fg);
  return e;
}

}  // namespace

FlowTrajectory integrate_flow(const MetricModel& model, const DissipationTriple& triple,
                              const Potential& phi, const Vec& x0, double T, double dt,
                              const FlowOptions& opts) {
  if (!(dt > 0.0) || !(T > 0.0)) throw InputError("integrate_flow: T and dt must be positive");
  model.require_in_domain(x0, "integrate_flow");

  const auto rhs = [&](const Vec& x) { return flow_velocity(model, triple, phi, x); };

  FlowTrajectory traj;
  const auto push = [&](double t, const Vec& x) {
    const LedgerEntry e = ledger_at(model, triple, phi, x);
    traj.times.push_back(t);
    traj.points.push_back(x);
    traj.velocities.push_back(e.velocity);
    traj.speed.push_back(e.speed);
    traj.phi.push_back(e.phi);
    traj.psi_term.push_back(e.psi_term);
    traj.psi_star_term.push_back(e.psi_star_term);
  };
  push(0.0, x0);

  double t = 0.0;
  Vec x = x0;
  while (t < T - 1e-15) {
    double step = std::min(dt, T - t);
    int halvings = 0;
    for (;;) {
      Vec k1, k2, k3, k4, x1, x2, x3;
      bool domain_ok = true;
      try {
        k1 = rhs(x);
        x1 = x; axpy(0.5 * step, k1, x1);
        k2 = rhs(x1);
        x2 = x; axpy(0.5 * step, k2, x2);
        k3 = rhs(x2);
        x3 = x; axpy(step, k3, x3);
        k4 = rhs(x3);
      } catch (const DomainError&) {
        domain_ok = false;
      }
      Vec x_new;
      if (domain_ok) {
        x_new = x;
        for (int i = 0; i < model.dimension; ++i)
          x_new[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!model.in_domain(x_new)) domain_ok = false;
      }
      if (!domain_ok) {
        traj.exited = true;
        traj.stop_time = t;
        return traj;
      }

      // per-step chain-rule residual, trapezoidal in the dissipation terms
      const LedgerEntry e0 = ledger_at(model, triple, phi, x);
      const LedgerEntry e1 = ledger_at(model, triple, phi, x_new);
      const double diss0 = e0.psi_term + e0.psi_star_term;
      const double diss1 = e1.psi_term + e1.psi_star_term;
      const double residual = std::fabs((e1.phi - e0.phi) / step + 0.5 * (diss0 + diss1));
      if (residual > opts.step_residual_tol && halvings < opts.max_halvings) {
        step *= 0.5;
        ++halvings;
        continue;
      }
      if (residual > opts.step_residual_tol)
        throw NumericalError("integrate_flow: step rejection cascade", residual);

      x = x_new;
      t += step;
      push(t, x);
      break;
    }

    if (distance(model, x0, x) > opts.blowup_radius) {
      traj.blowup = true;
      traj.stop_time = t;
      return traj;
    }
  }
  traj.stop_time = t;
  return traj;
}

// ---------------------------------------------------------------------------
// Audits.

namespace {

// Cumulative integral with a cubic fitted through neighbouring samples per
// cell (4th order on smooth integrands; works on nonuniform grids).
Vec cumulative_integral(const Vec& times, const Vec& values) {
  const int n = static_cast<int>(times.size());
  Vec prefix(n, 0.0);
  if (n < 2) return prefix;
  for (int cell = 0; cell + 1 < n; ++cell) {
    int base = std::clamp(cell - 1, 0, n - 4);
    double cell_integral = 0.0;
    if (n >= 4) {
      // exact integral over [t_cell, t_cell+1] of the Lagrange cubic through
      // samples base..base+3, via 2-point Gauss (exact for cubics)
      const double a = times[cell], b = times[cell + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      const double gauss = half / std::sqrt(3.0);
      for (double tq : {mid - gauss, mid + gauss}) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i) {
          double l = 1.0;
          for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            l *= (tq - times[base + j]) / (times[base + i] - times[base + j]);
          }
          s += l * values[base + i];
        }
        cell_integral += s * half;
      }
    } else {
      cell_integral =
          0.5 * (values[cell] + values[cell + 1]) * (times[cell + 1] - times[cell]);
    }
    prefix[cell + 1] = prefix[cell] + cell_integral;
  }
  return prefix;
}

}  // namespace

EnergyAuditReport energy_audit(const FlowTrajectory& traj, const MetricModel& model,
                               const DissipationTriple& triple, const Potential& phi) {
  if (traj.times.empty()) throw InputError("energy_audit: empty trajectory");
  const int n = static_cast<int>(traj.times.size());

  // recompute the ledger from the stored states so injected faults show up
  Vec phi_vals(n), diss(n), speed(n), grad_norm(n);
  for (int i = 0; i < n; ++i) {
    const Vec& x = traj.points[i];
    phi_vals[i] = phi.value(x);
    speed[i] = metric_value(model, x, traj.velocities[i]);
    const Vec g = gradient(model, x, -phi.differential(x));
    grad_norm[i] = metric_value(model, x, g);
    diss[i] = triple.psi(speed[i]) + triple.psi_star(grad_norm[i]);
  }

  EnergyAuditReport report;
  // phi(s) - phi(t) = integral of dissipation over [s, t]; with the prefix
  // integral the max over all pairs is the spread of phi + prefix
  const Vec prefix = cumulative_integral(traj.times, diss);
  double lo = phi_vals[0] + prefix[0], hi = lo;
  for (int i = 0; i < n; ++i) {
    const double a = phi_vals[i] + prefix[i];
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  report.max_residual = hi - lo;

  for (int i = 1; i + 1 < n; ++i) {
    const double dphi =
        (phi_vals[i + 1] - phi_vals[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
    report.max_chain_residual =
        std::max(report.max_chain_residual, std::fabs(dphi + speed[i] * grad_norm[i]));
  }
  for (int i = 0; i + 1 < n; ++i)
    report.phi_increase = std::max(report.phi_increase, phi_vals[i + 1] - phi_vals[i]);
  return report;
}

ChainRuleReport chain_rule_check(const MetricModel& model, const Potential& phi,
                                 const SampledCurve& curve, double tol) {
  curve.validate();
  if (!model.smooth()) throw ModelError("chain_rule_check requires a smooth model");
  ChainRuleReport report;
  report.min_margin = 1e300;
  const int n = static_cast<int>(curve.times.size());
  for (int i = 1; i + 1 < n; ++i) {
    const double dt = curve.times[i + 1] - curve.times[i - 1];
    const double lhs = (phi.value(curve.points[i + 1]) - phi.value(curve.points[i - 1])) / dt;
    const Vec vel = (1.0 / dt) * (curve.points[i + 1] - curve.points[i - 1]);
    const Vec g = gradient(model, curve.points[i], -phi.differential(curve.points[i]));
    const double rhs = -metric_value(model, curve.points[i], vel) *
                       metric_value(model, curve.points[i], g);
    const double margin = lhs - rhs;
    report.min_margin = std::min(report.min_margin, margin);
    report.max_equality_gap = std::max(report.max_equality_gap, std::fabs(margin));
    if (margin < -tol) ++report.violation_count;
  }
  report.ok = report.violation_count == 0;
  return report;
}

}  // namespace asymflow
