#ifndef ASYMFLOW_TRANSPORT_HPP
#define ASYMFLOW_TRANSPORT_HPP

#include <string>
#include <vector>

#include "asymflow/metric_models.hpp"

namespace asymflow {

// Exact optimal transport between finitely supported measures under an
// asymmetric ground cost. The solver is a transportation simplex; optima are
// certified by dual feasibility, complementary slackness and a zero duality
// gap before anything is returned. No entropic smoothing: the divergence and
// asymmetry phenomena under study need unregularized values.

struct DiscreteMeasure {
  std::vector<Vec> support;
  Vec weights;

  static DiscreteMeasure dirac(Vec point);
  int size() const { return static_cast<int>(weights.size()); }
  void validate(const MetricModel* model = nullptr) const;
};

struct TransportPlan {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;  // dense row-major

  double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }
  double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
  Vec row_sums() const;
  Vec col_sums() const;
};

struct OTResult {
  TransportPlan plan;
  double value = 0.0;  // sum pi_ij cost_ij at the optimum
  Vec row_potential;   // u
  Vec col_potential;   // v
};

enum class Direction { Forward, Backward };

/// Entries d(x_i, y_j)^p (forward) or d(y_j, x_i)^p (backward).
Mat cost_matrix(const MetricModel& model, const DiscreteMeasure& mu,
                const DiscreteMeasure& nu, double p, Direction direction);

/// Exact transportation simplex. Degeneracy is broken by a deterministic
/// 1e-13-scale perturbation of the marginals; the final basis tree is then
/// re-solved against the unperturbed marginals, so returned plans satisfy the
/// true marginals to rounding error.
OTResult solve_ot(const Mat& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

double wasserstein(const MetricModel& model, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu, double p, Direction direction);

struct KrReport {
  double duality_gap = 0.0;
  double max_feasibility_violation = 0.0;  // over u_i + v_j <= c_ij
  double max_slackness_violation = 0.0;    // over cells with positive mass
  double max_lipschitz_excess = 0.0;       // column potential vs cost-induced distance
  bool ok = true;
};

/// Kantorovich-Rubinstein certificate for a p = 1 cost: primal equals dual
/// and the column potential is 1-Lipschitz against the cost-induced distance
/// between columns, max_i (c_ij - c_ij').
KrReport kr_duality_check(const OTResult& result, const Mat& cost);

struct ThetaTransferReport {
  double theta = 1.0;       // profile value at W_p(delta_star, mu) + W_p(mu, nu)
  double lhs = 0.0;         // W_q(nu, mu)
  double rhs = 0.0;         // theta * W_p(mu, nu)
  bool bound_ok = true;
  bool hypothesis_met = true;  // discrete concavity of Theta^(qp/(p-q))
};

/// Reversibility-transfer bound W_q(nu,mu) <= Theta(W_p(delta*,mu)+W_p(mu,nu)) W_p(mu,nu).
/// When the concavity hypothesis fails on the sampled profile the report says
/// "hypothesis unmet" instead of flagging the bound.
ThetaTransferReport theta_transfer_check(const MetricModel& model, const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu, double p, double q,
                                         const Vec& star);

struct DivergenceRow {
  int m = 0;
  int k = 0;
  double forward_dist = 0.0;  // W_p(mu^m, mu_k^m)
  double anchor_dist = 0.0;   // W_p(delta_0, mu^m)
};

/// Empirical measures on the curve t -> (1 - e^(1/(t-1)+1)) e1 in the Funk
/// ball and their k-cutoffs (tail atoms collapsed to 0). The forward column
/// vanishes as k grows while the anchor column grows without bound in m.
std::vector<DivergenceRow> funk_divergence_experiment(int m, const std::vector<int>& ks,
                                                      double p);

/// Reference value for uniform n x n marginals: minimum over permutations of
/// the mean assignment cost. Independent of the simplex path it checks.
double brute_force_assignment_value(const Mat& cost);

/// Exact optimal cost between measures supported on a common oriented line,
/// by the monotone (northwest-corner on sorted atoms) coupling. `positions`
/// order the atoms; costs come from the model distance. Used where supports
/// outgrow the simplex cap; validated against the simplex in tests.
double line_monotone_coupling_cost(const MetricModel& model,
                                   const std::vector<Vec>& mu_support, const Vec& mu_weights,
                                   const Vec& mu_positions,
                                   const std::vector<Vec>& nu_support, const Vec& nu_weights,
                                   const Vec& nu_positions, double p);

std::string measure_to_json(const DiscreteMeasure& measure);
DiscreteMeasure measure_from_json(const std::string& text);
std::string ot_result_to_json(const OTResult& result);
std::string divergence_table_to_csv(const std::vector<DivergenceRow>& rows);

}  // namespace asymflow

#endif
