#include "asymflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asymflow/errors.hpp"

namespace asymflow {

DiscreteMeasure DiscreteMeasure::dirac(Vec point) {
  DiscreteMeasure m;
  m.support.push_back(std::move(point));
  m.weights = Vec{1.0};
  return m;
}

void DiscreteMeasure::validate(const MetricModel* model) const {
  if (support.size() != weights.size())
    throw InputError("discrete measure: support/weights length mismatch");
  if (weights.empty()) throw InputError("discrete measure: empty");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InputError("discrete measure: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw InputError("discrete measure: weights must sum to 1");
  if (model)
    for (const Vec& x : support) model->require_in_domain(x, "discrete measure");
}

Vec TransportPlan::row_sums() const {
  Vec r(rows, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) r[i] += (*this)(i, j);
  return r;
}

Vec TransportPlan::col_sums() const {
  Vec c(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) c[j] += (*this)(i, j);
  return c;
}

Mat cost_matrix(const MetricModel& model, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                double p, Direction direction) {
  if (p < 1.0) throw InputError("cost_matrix: p must be >= 1");
  mu.validate(&model);
  nu.validate(&model);
  Mat c(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      const double d = (direction == Direction::Forward)
                           ? distance(model, mu.support[i], nu.support[j])
                           : distance(model, nu.support[j], mu.support[i]);
      c(i, j) = std::pow(d, p);
    }
  return c;
}

// ---------------------------------------------------------------------------
// Transportation simplex.

namespace {

constexpr int kSupportCap = 512;

struct SimplexState {
  int n = 0, m = 0;
  const Mat* cost = nullptr;
  // basis arcs as a spanning tree over n row nodes and m col nodes
  std::vector<std::vector<int>> adj;  // node -> incident basic arc ids
  std::vector<double> flow;           // arc id = i * m + j
  std::vector<char> basic;

  int node_of_row(int i) const { return i; }
  int node_of_col(int j) const { return n + j; }
  int arc_id(int i, int j) const { return i * m + j; }
  int arc_row(int id) const { return id / m; }
  int arc_col(int id) const { return id % m; }

  void add_arc(int id, double f) {
    basic[id] = 1;
    flow[id] = f;
    adj[node_of_row(arc_row(id))].push_back(id);
    adj[node_of_col(arc_col(id))].push_back(id);
  }
  void remove_arc(int id) {
    basic[id] = 0;
    flow[id] = 0.0;
    auto strip = [&](int node) {
      auto& list = adj[node];
      list.erase(std::find(list.begin(), list.end(), id));
    };
    strip(node_of_row(arc_row(id)));
    strip(node_of_col(arc_col(id)));
  }

  // duals from the tree, root at node 0 with u_0 = 0
  void compute_duals(Vec& u, Vec& v) const {
    u.assign(n, 0.0);
    v.assign(m, 0.0);
    std::vector<char> seen(n + m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int id : adj[node]) {
        const int i = arc_row(id), j = arc_col(id);
        const int other = (node == node_of_row(i)) ? node_of_col(j) : node_of_row(i);
        if (seen[other]) continue;
        seen[other] = 1;
        if (other == node_of_col(j))
          v[j] = (*cost)(i, j) - u[i];
        else
          u[i] = (*cost)(i, j) - v[j];
        stack.push_back(other);
      }
    }
  }

  // node path between two tree nodes
  std::vector<int> tree_path(int from, int to) const {
    std::vector<int> parent(n + m, -1), parent_arc(n + m, -1);
    std::vector<int> stack{from};
    parent[from] = from;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == to) break;
      for (int id : adj[node]) {
        const int i = arc_row(id), j = arc_col(id);
        const int other = (node == node_of_row(i)) ? node_of_col(j) : node_of_row(i);
        if (parent[other] != -1) continue;
        parent[other] = node;
        parent_arc[other] = id;
        stack.push_back(other);
      }
    }
    std::vector<int> arcs;
    for (int node = to; node != from; node = parent[node]) arcs.push_back(parent_arc[node]);
    return arcs;  // ordered from `to` back to `from`
  }
};

// Recompute tree flows against the given exact marginals by leaf stripping.
void resolve_tree_flows(SimplexState& st, const Vec& a, const Vec& b) {
  const int total = st.n + st.m;
  std::vector<double> remaining(total);
  for (int i = 0; i < st.n; ++i) remaining[st.node_of_row(i)] = a[i];
  for (int j = 0; j < st.m; ++j) remaining[st.node_of_col(j)] = b[j];
  std::vector<int> degree(total);
  std::vector<std::vector<int>> adj = st.adj;
  for (int node = 0; node < total; ++node) degree[node] = static_cast<int>(adj[node].size());
  std::vector<int> leaves;
  for (int node = 0; node < total; ++node)
    if (degree[node] == 1) leaves.push_back(node);
  std::vector<char> done(st.flow.size(), 0);
  while (!leaves.empty()) {
    const int node = leaves.back();
    leaves.pop_back();
    int arc = -1;
    for (int id : adj[node])
      if (!done[id]) arc = id;
    if (arc < 0) continue;  // last node of the tree
    const int i = st.arc_row(arc), j = st.arc_col(arc);
    const int other = (node == st.node_of_row(i)) ? st.node_of_col(j) : st.node_of_row(i);
    st.flow[arc] = remaining[node];
    remaining[other] -= remaining[node];
    remaining[node] = 0.0;
    done[arc] = 1;
    if (--degree[other] == 1) leaves.push_back(other);
    degree[node] = 0;
  }
}

}  // namespace

OTResult solve_ot(const Mat& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  mu.validate();
  nu.validate();
  if (cost.rows != mu.size() || cost.cols != nu.size())
    throw InputError("solve_ot: cost shape does not match marginals");
  if (cost.rows > kSupportCap || cost.cols > kSupportCap)
    throw SizeError("solve_ot: support size exceeds the 512x512 exact-solver cap");
  for (double c : cost.a)
    if (!std::isfinite(c)) throw InputError("solve_ot: cost must be finite");

  // prune zero-weight atoms
  std::vector<int> rows_kept, cols_kept;
  for (int i = 0; i < mu.size(); ++i)
    if (mu.weights[i] > 0.0) rows_kept.push_back(i);
  for (int j = 0; j < nu.size(); ++j)
    if (nu.weights[j] > 0.0) cols_kept.push_back(j);
  const int n = static_cast<int>(rows_kept.size());
  const int m = static_cast<int>(cols_kept.size());

  Mat c(n, m);
  Vec a(n), b(m);
  double cost_scale = 1.0;
  for (int i = 0; i < n; ++i) a[i] = mu.weights[rows_kept[i]];
  for (int j = 0; j < m; ++j) b[j] = nu.weights[cols_kept[j]];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      c(i, j) = cost(rows_kept[i], cols_kept[j]);
      cost_scale = std::max(cost_scale, std::fabs(c(i, j)));
    }

  // deterministic anti-degeneracy perturbation, removed again after solving
  Vec ap = a, bp = b;
  double extra = 0.0;
  for (int i = 0; i < n; ++i) {
    ap[i] += 1e-13 * (i + 1);
    extra += 1e-13 * (i + 1);
  }
  const double col_unit = extra / (static_cast<double>(m) * (m + 1) / 2.0);
  for (int j = 0; j < m; ++j) bp[j] += col_unit * (j + 1);

  SimplexState st;
  st.n = n;
  st.m = m;
  st.cost = &c;
  st.adj.assign(n + m, {});
  st.flow.assign(static_cast<std::size_t>(n) * m, 0.0);
  st.basic.assign(static_cast<std::size_t>(n) * m, 0);

  // northwest-corner start
  {
    Vec ra = ap, rb = bp;
    int i = 0, j = 0;
    while (true) {
      const double f = std::min(ra[i], rb[j]);
      st.add_arc(st.arc_id(i, j), f);
      ra[i] -= f;
      rb[j] -= f;
      if (i == n - 1 && j == m - 1) break;
      if (j == m - 1 || (ra[i] <= rb[j] && i < n - 1))
        ++i;
      else
        ++j;
    }
  }

  Vec u, v;
  const double enter_tol = 1e-12 * (1.0 + cost_scale);
  const long max_iters = 2000L + 64L * static_cast<long>(n + m) * (n + m);
  long iter = 0;
  for (;; ++iter) {
    if (iter > max_iters)
      throw NumericalError("solve_ot: pivot iteration cap exceeded", 0.0);
    st.compute_duals(u, v);

    int enter = -1;
    double best = -enter_tol;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        if (st.basic[st.arc_id(i, j)]) continue;
        const double reduced = c(i, j) - u[i] - v[j];
        if (reduced < best) {
          best = reduced;
          enter = st.arc_id(i, j);
        }
      }
    if (enter < 0) break;  // optimal

    const int ei = st.arc_row(enter), ej = st.arc_col(enter);
    // cycle = entering arc + tree path from its column node back to its row
    const std::vector<int> path = st.tree_path(st.node_of_row(ei), st.node_of_col(ej));
    // path arcs alternate -,+,-,... when traversed from the column end
    double theta = 1e300;
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const int id = path[k];
      if (st.flow[id] < theta || (st.flow[id] == theta && id < leave)) {
        theta = st.flow[id];
        leave = id;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k)
      st.flow[path[k]] += (k % 2 == 0) ? -theta : theta;
    st.remove_arc(leave);
    st.add_arc(enter, theta);
  }

  // re-solve the optimal tree against the unperturbed marginals
  resolve_tree_flows(st, a, b);

  OTResult out;
  out.plan.rows = mu.size();
  out.plan.cols = nu.size();
  out.plan.entries.assign(static_cast<std::size_t>(mu.size()) * nu.size(), 0.0);
  out.value = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const int id = st.arc_id(i, j);
      if (!st.basic[id]) continue;
      double f = st.flow[id];
      if (f < 0.0) {
        if (f < -1e-10) throw NumericalError("solve_ot: negative flow after repair", f);
        f = 0.0;
      }
      out.plan.at(rows_kept[i], cols_kept[j]) = f;
      out.value += f * c(i, j);
    }

  // duals, with pruned atoms assigned feasible values
  out.row_potential.assign(mu.size(), 0.0);
  out.col_potential.assign(nu.size(), 0.0);
  for (int i = 0; i < n; ++i) out.row_potential[rows_kept[i]] = u[i];
  for (int j = 0; j < m; ++j) out.col_potential[cols_kept[j]] = v[j];
  for (int i = 0; i < mu.size(); ++i) {
    if (mu.weights[i] > 0.0) continue;
    double best_u = 1e300;
    for (int j = 0; j < m; ++j)
      best_u = std::min(best_u, cost(i, cols_kept[j]) - v[j]);
    out.row_potential[i] = best_u;
  }
  for (int j = 0; j < nu.size(); ++j) {
    if (nu.weights[j] > 0.0) continue;
    double best_v = 1e300;
    for (int i = 0; i < n; ++i)
      best_v = std::min(best_v, cost(rows_kept[i], j) - u[i]);
    out.col_potential[j] = best_v;
  }

  // certify before returning
  const Vec rs = out.plan.row_sums();
  const Vec cs = out.plan.col_sums();
  for (int i = 0; i < mu.size(); ++i)
    if (std::fabs(rs[i] - mu.weights[i]) > 1e-10)
      throw NumericalError("solve_ot: row marginal mismatch", rs[i] - mu.weights[i]);
  for (int j = 0; j < nu.size(); ++j)
    if (std::fabs(cs[j] - nu.weights[j]) > 1e-10)
      throw NumericalError("solve_ot: column marginal mismatch", cs[j] - nu.weights[j]);
  double dual_value = 0.0;
  for (int i = 0; i < mu.size(); ++i) dual_value += out.row_potential[i] * mu.weights[i];
  for (int j = 0; j < nu.size(); ++j) dual_value += out.col_potential[j] * nu.weights[j];
  if (std::fabs(dual_value - out.value) > 1e-9 * (1.0 + std::fabs(out.value)))
    throw NumericalError("solve_ot: duality gap", dual_value - out.value);
  return out;
}

double wasserstein(const MetricModel& model, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu, double p, Direction direction) {
  const Mat c = cost_matrix(model, mu, nu, p, direction);
  const OTResult r = solve_ot(c, mu, nu);
  return std::pow(std::max(r.value, 0.0), 1.0 / p);
}

KrReport kr_duality_check(const OTResult& result, const Mat& cost) {
  KrReport report;
  const int n = cost.rows, m = cost.cols;
  double primal = 0.0;
  const Vec rs = result.plan.row_sums();
  const Vec cs = result.plan.col_sums();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) primal += result.plan(i, j) * cost(i, j);
  double dual = 0.0;
  for (int i = 0; i < n; ++i) dual += result.row_potential[i] * rs[i];
  for (int j = 0; j < m; ++j) dual += result.col_potential[j] * cs[j];
  report.duality_gap = std::fabs(primal - dual);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double slack = result.row_potential[i] + result.col_potential[j] - cost(i, j);
      report.max_feasibility_violation = std::max(report.max_feasibility_violation, slack);
      if (result.plan(i, j) > 1e-12)
        report.max_slackness_violation =
            std::max(report.max_slackness_violation, std::fabs(slack));
    }

  // column potential against the cost-induced distance between columns
  for (int j = 0; j < m; ++j)
    for (int jp = 0; jp < m; ++jp) {
      if (j == jp) continue;
      double induced = -1e300;
      for (int i = 0; i < n; ++i) induced = std::max(induced, cost(i, j) - cost(i, jp));
      const double excess = (result.col_potential[j] - result.col_potential[jp]) - induced;
      report.max_lipschitz_excess = std::max(report.max_lipschitz_excess, excess);
    }

  report.ok = report.duality_gap <= 1e-9 && report.max_feasibility_violation <= 1e-9 &&
              report.max_slackness_violation <= 1e-9 && report.max_lipschitz_excess <= 1e-9;
  return report;
}

ThetaTransferReport theta_transfer_check(const MetricModel& model, const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu, double p, double q,
                                         const Vec& star) {
  if (!(1.0 <= q && q <= p)) throw InputError("theta_transfer_check: need 1 <= q <= p");
  ThetaTransferReport report;
  const DiscreteMeasure anchor = DiscreteMeasure::dirac(star);
  const double wp_star = wasserstein(model, anchor, mu, p, Direction::Forward);
  const double wp_mn = wasserstein(model, mu, nu, p, Direction::Forward);
  const double wq_nm = wasserstein(model, nu, mu, q, Direction::Forward);
  const double radius = wp_star + wp_mn;

  // analytic profile where available, sampled otherwise
  Vec grid(8);
  Vec theta_vals(8);
  const double r_hi = std::max(radius * 1.05, 1e-6);
  for (int k = 0; k < 8; ++k) grid[k] = r_hi * (k + 1) / 8.0;
  const double closed = ball_reversibility_bound(model, star, radius);
  if (!std::isnan(closed)) {
    report.theta = closed;
    for (int k = 0; k < 8; ++k) theta_vals[k] = ball_reversibility_bound(model, star, grid[k]);
  } else {
    const ReversibilityProfile prof =
        reversibility_profile(model, star, grid, 400, 0x7533d1u);
    report.theta = prof.at(radius);
    theta_vals = prof.values;
  }

  report.lhs = wq_nm;
  report.rhs = report.theta * wp_mn;
  report.bound_ok = report.lhs <= report.rhs + 1e-9 * (1.0 + report.rhs);

  if (q == p) {
    // convention: the sup of Theta stands in; finite on a sampled profile
    report.hypothesis_met = std::isfinite(theta_vals.back());
  } else {
    const double expo = q * p / (p - q);
    report.hypothesis_met = true;
    for (int k = 1; k + 1 < 8; ++k) {
      const double f0 = std::pow(theta_vals[k - 1], expo);
      const double f1 = std::pow(theta_vals[k], expo);
      const double f2 = std::pow(theta_vals[k + 1], expo);
      if (f0 - 2.0 * f1 + f2 > 1e-9 * (1.0 + std::fabs(f1))) report.hypothesis_met = false;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Funk divergence experiment.

namespace {

// Radial atoms carry their outward and inward potentials u = -log(1 - r),
// w = log(1 + r) instead of the raw radius: near the boundary 1 - r
// underflows while u stays exact. Forward distance along the ray is
// u(b) - u(a) outward and w(a) - w(b) inward.
struct LineMeasure {
  Vec u;  // sorted ascending
  Vec w;
  Vec weights;
};

double monotone_cost(const LineMeasure& mu, const LineMeasure& nu, double p) {
  // northwest-corner coupling of the sorted atom lists
  double total = 0.0;
  std::size_t i = 0, j = 0;
  double ra = mu.weights[0], rb = nu.weights[0];
  while (i < mu.weights.size() && j < nu.weights.size()) {
    const double f = std::min(ra, rb);
    const double d = nu.u[j] >= mu.u[i] ? nu.u[j] - mu.u[i] : mu.w[i] - nu.w[j];
    total += f * std::pow(d, p);
    ra -= f;
    rb -= f;
    if (ra <= 1e-18) {
      ++i;
      if (i < mu.weights.size()) ra = mu.weights[i];
    }
    if (rb <= 1e-18) {
      ++j;
      if (j < nu.weights.size()) rb = nu.weights[j];
    }
  }
  return total;
}

}  // namespace

std::vector<DivergenceRow> funk_divergence_experiment(int m, const std::vector<int>& ks,
                                                      double p) {
  if (m < 2) throw InputError("funk_divergence_experiment: m must be >= 2");
  if (p < 1.0) throw InputError("funk_divergence_experiment: p must be >= 1");

  // midpoint samples of the curve position r(t) = 1 - e^(1/(t-1)+1); the
  // outward potential u = -log(1 - r) = 1/(1-t) - 1 is kept in closed form
  Vec ts(m), us(m), ws(m);
  for (int j = 0; j < m; ++j) {
    ts[j] = (j + 0.5) / m;
    us[j] = 1.0 / (1.0 - ts[j]) - 1.0;
    const double r = 1.0 - std::exp(-us[j]);
    ws[j] = std::log(1.0 + r);
  }

  // anchor distance: the only coupling from a Dirac integrates d(0, x)^p
  double anchor_p = 0.0;
  for (int j = 0; j < m; ++j) anchor_p += std::pow(us[j], p) / m;
  const double anchor = std::pow(anchor_p, 1.0 / p);

  LineMeasure full;
  full.u = us;  // already ascending in t
  full.w = ws;
  full.weights.assign(m, 1.0 / m);

  std::vector<DivergenceRow> rows;
  for (int k : ks) {
    if (k < 1) throw InputError("funk_divergence_experiment: k must be >= 1");
    // collapse atoms with t >= 1 - 1/k onto the origin
    LineMeasure cut;
    double collapsed = 0.0;
    for (int j = 0; j < m; ++j) {
      if (ts[j] >= 1.0 - 1.0 / k)
        collapsed += 1.0 / m;
      else {
        cut.u.push_back(us[j]);
        cut.w.push_back(ws[j]);
        cut.weights.push_back(1.0 / m);
      }
    }
    if (collapsed > 0.0) {
      cut.u.insert(cut.u.begin(), 0.0);
      cut.w.insert(cut.w.begin(), 0.0);
      cut.weights.insert(cut.weights.begin(), collapsed);
    }

    const double forward = std::pow(monotone_cost(full, cut, p), 1.0 / p);
    rows.push_back({m, k, forward, anchor});
  }
  return rows;
}

double brute_force_assignment_value(const Mat& cost) {
  if (cost.rows != cost.cols) throw InputError("brute force oracle needs a square cost");
  const int n = cost.rows;
  if (n > 8) throw SizeError("brute force oracle capped at n = 8");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

double line_monotone_coupling_cost(const MetricModel& model,
                                   const std::vector<Vec>& mu_support, const Vec& mu_weights,
                                   const Vec& mu_positions,
                                   const std::vector<Vec>& nu_support, const Vec& nu_weights,
                                   const Vec& nu_positions, double p) {
  const auto sorted_order = [](const Vec& positions) {
    std::vector<int> order(positions.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&positions](int a, int b) { return positions[a] < positions[b]; });
    return order;
  };
  const std::vector<int> mo = sorted_order(mu_positions);
  const std::vector<int> no = sorted_order(nu_positions);

  double total = 0.0;
  std::size_t i = 0, j = 0;
  double ra = mu_weights[mo[0]], rb = nu_weights[no[0]];
  while (i < mo.size() && j < no.size()) {
    const double f = std::min(ra, rb);
    const double d = distance(model, mu_support[mo[i]], nu_support[no[j]]);
    total += f * std::pow(d, p);
    ra -= f;
    rb -= f;
    if (ra <= 1e-18) {
      ++i;
      if (i < mo.size()) ra = mu_weights[mo[i]];
    }
    if (rb <= 1e-18) {
      ++j;
      if (j < no.size()) rb = nu_weights[no[j]];
    }
  }
  return total;
}

}  // namespace asymflow
