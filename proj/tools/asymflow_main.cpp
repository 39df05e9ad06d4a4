// asymflow: command-line front end for the asymmetric-metric toolkit.
//
// Subcommands: dist, curve, flow, ot, interp, counterexample, audit.
// Exit codes: 0 success, 1 input error, 2 numerical error, 3 audit failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "asymflow/audit.hpp"
#include "asymflow/curves.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/gradient_flow.hpp"
#include "asymflow/io.hpp"
#include "asymflow/metric_models.hpp"
#include "asymflow/path_measures.hpp"
#include "asymflow/transport.hpp"

namespace {

using namespace asymflow;
using nlohmann::json;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("ASYMFLOW_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "error") return 0;
    if (v == "debug") return 2;
    return 1;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[asymflow] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[asymflow:debug] " << msg << "\n";
}

Vec parse_vec(const std::string& text) {
  Vec v;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      v.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw InputError("cannot parse vector component '" + field + "'");
    }
  }
  if (v.empty()) throw InputError("empty vector argument");
  return v;
}

MetricModel load_model(const std::string& path) {
  return metric_model_from_json(read_text_file(path));
}

Potential potential_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("potential: invalid json: ") + e.what());
  }
  const std::string variant = j.value("variant", "");
  if (variant == "quadratic") {
    const auto rows = j.at("A").get<std::vector<Vec>>();
    Mat a(static_cast<int>(rows.size()), static_cast<int>(rows.size()));
    for (int i = 0; i < a.rows; ++i)
      for (int jx = 0; jx < a.cols; ++jx) a(i, jx) = rows[i][jx];
    return Potential::quadratic(a, j.at("b").get<Vec>(), j.value("c", 0.0));
  }
  if (variant == "linear") return Potential::linear(j.at("b").get<Vec>(), j.value("c", 0.0));
  throw InputError("potential: variant must be 'quadratic' or 'linear'");
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------------------

int cmd_dist(const std::string& model_path, const std::string& xs, const std::string& ys,
             const std::string& out) {
  const MetricModel model = load_model(model_path);
  const Vec x = parse_vec(xs);
  const Vec y = parse_vec(ys);
  const double forward = distance(model, x, y);
  const double backward = distance(model, y, x);
  std::ostringstream csv;
  csv << "forward,backward\n" << format_double(forward) << "," << format_double(backward) << "\n";
  write_text_file(out_path(out, "dist.csv"), csv.str());
  log_info("dist: forward " + format_double(forward) + ", backward " + format_double(backward));
  return 0;
}

int cmd_curve(const std::string& model_path, const std::string& curve_path, double p,
              const std::string& out) {
  const MetricModel model = load_model(model_path);
  const SampledCurve curve = curve_from_csv(read_text_file(curve_path));

  CurveLength length;
  try {
    length = curve_length(model, curve);
  } catch (const ModelError&) {
    length.chord = pointwise_variation(model, curve, curve.times.front(), curve.times.back());
    length.quadrature = std::nan("");
  }
  const DerivativeProfile fwd = metric_derivative(model, curve, Side::Forward);
  const DerivativeProfile bwd = metric_derivative(model, curve, Side::Backward);
  const AcReport report = classify_ac(model, curve, p);
  const double variation =
      pointwise_variation(model, curve, curve.times.front(), curve.times.back());

  std::ostringstream summary;
  summary << "chord_length,quadrature_length,total_variation\n"
          << format_double(length.chord) << "," << format_double(length.quadrature) << ","
          << format_double(variation) << "\n";
  write_text_file(out_path(out, "length.csv"), summary.str());

  std::ostringstream deriv;
  deriv << "t,forward_quotient,backward_quotient\n";
  for (std::size_t i = 0; i < fwd.quotients.size(); ++i)
    deriv << format_double(fwd.seg_times[i]) << "," << format_double(fwd.quotients[i]) << ","
          << format_double(bwd.quotients[i]) << "\n";
  write_text_file(out_path(out, "derivatives.csv"), deriv.str());

  write_text_file(out_path(out, "classification.json"), ac_report_to_json(report, p));
  log_info("curve: chord length " + format_double(length.chord));
  return 0;
}

int cmd_flow(const std::string& model_path, const std::string& potential_path, double h_power,
             const std::string& h_table_path, const std::string& x0s, double T, double dt,
             const std::string& out) {
  const MetricModel model = load_model(model_path);
  const Potential phi = potential_from_json_text(read_text_file(potential_path));
  DissipationTriple triple = DissipationTriple::power_law(2.0);
  if (!h_table_path.empty()) {
    json j = json::parse(read_text_file(h_table_path));
    triple = DissipationTriple::monotone_table(j.at("xs").get<Vec>(), j.at("ys").get<Vec>());
  } else {
    triple = DissipationTriple::power_law(h_power);
  }
  const Vec x0 = parse_vec(x0s);

  const FlowTrajectory traj = integrate_flow(model, triple, phi, x0, T, dt);
  const EnergyAuditReport audit = energy_audit(traj, model, triple, phi);
  write_text_file(out_path(out, "trajectory.csv"), trajectory_to_csv(traj));
  write_text_file(out_path(out, "energy_audit.json"), energy_audit_to_json(audit));
  log_info("flow: " + std::to_string(traj.times.size()) + " states, max energy residual " +
           format_double(audit.max_residual));
  return 0;
}

int cmd_ot(const std::string& model_path, const std::string& mu_path,
           const std::string& nu_path, double p, const std::string& direction,
           const std::string& out) {
  const MetricModel model = load_model(model_path);
  const DiscreteMeasure mu = measure_from_json(read_text_file(mu_path));
  const DiscreteMeasure nu = measure_from_json(read_text_file(nu_path));
  Direction dir;
  if (direction == "forward")
    dir = Direction::Forward;
  else if (direction == "backward")
    dir = Direction::Backward;
  else
    throw InputError("direction must be 'forward' or 'backward'");

  const Mat cost = cost_matrix(model, mu, nu, p, dir);
  const OTResult result = solve_ot(cost, mu, nu);
  write_text_file(out_path(out, "ot_result.json"), ot_result_to_json(result));

  json duality;
  duality["wasserstein"] = std::pow(std::max(result.value, 0.0), 1.0 / p);
  duality["value"] = result.value;
  if (p == 1.0) {
    const KrReport kr = kr_duality_check(result, cost);
    duality["kr"] = {{"duality_gap", kr.duality_gap},
                     {"max_feasibility_violation", kr.max_feasibility_violation},
                     {"max_slackness_violation", kr.max_slackness_violation},
                     {"max_lipschitz_excess", kr.max_lipschitz_excess},
                     {"ok", kr.ok}};
  }
  write_text_file(out_path(out, "duality_report.json"), duality.dump());
  log_info("ot: value " + format_double(result.value));
  return 0;
}

int cmd_interp(const std::string& model_path, const std::string& measures_path, double p,
               const std::string& representative, const std::string& out) {
  const MetricModel model = load_model(model_path);
  json j = json::parse(read_text_file(measures_path));
  CurveOfMeasures curve;
  curve.schedule.levels = j.at("schedule_N").get<int>();
  for (const auto& jm : j.at("measures")) curve.measures.push_back(measure_from_json(jm.dump()));

  Representative rep;
  if (representative == "constant")
    rep = Representative::Constant;
  else if (representative == "geodesic")
    rep = Representative::Geodesic;
  else
    throw InputError("representative must be 'constant' or 'geodesic'");

  const JointPathMeasure joint = glue_plans(model, curve, p);
  const DiscretePathMeasure eta = path_measure(joint, rep);
  write_text_file(out_path(out, "path_measure.json"), path_measure_to_json(eta));

  const Step1Report step1 = step1_inequalities_check(joint, model);
  json step1_json;
  step1_json["ok"] = step1.ok;
  step1_json["max_excess"] = step1.max_excess;
  step1_json["moment_max_excess"] = step1.moment_max_excess;
  step1_json["checked_atoms"] = step1.checked_atoms;
  write_text_file(out_path(out, "step1_report.json"), step1_json.dump());

  if (rep == Representative::Geodesic) {
    std::ostringstream speeds;
    speeds << "t,forward_speed,backward_speed\n";
    std::vector<VelocityFieldSample> fields;
    for (int cell = 0; cell < curve.schedule.cells(); ++cell) {
      const double mid = curve.schedule.node_time(cell) + 0.5 * curve.schedule.cell_width();
      speeds << format_double(mid) << ","
             << format_double(speed_estimate(eta, model, p, mid, Side::Forward)) << ","
             << format_double(speed_estimate(eta, model, p, mid, Side::Backward)) << "\n";
      fields.push_back(velocity_field(eta, model, mid, p));
    }
    write_text_file(out_path(out, "speeds.csv"), speeds.str());

    const Potential coord0 = Potential::linear([&] {
      Vec b = zeros(model.dimension);
      b[0] = 1.0;
      return b;
    }(), 0.0);
    Mat a = Mat::identity(model.dimension);
    const Potential quad = Potential::quadratic(a, zeros(model.dimension), 0.0);
    const ContinuityReport report = continuity_residual(curve, fields, {coord0, quad});
    write_text_file(out_path(out, "continuity_residuals.csv"),
                    continuity_report_to_csv(report));
  }
  log_info("interp: " + std::to_string(eta.atoms.size()) + " path atoms");
  return 0;
}

int cmd_counterexample(int m, const std::string& ks_text, double p, const std::string& out) {
  std::vector<int> ks;
  for (double k : parse_vec(ks_text)) ks.push_back(static_cast<int>(k));
  const auto rows = funk_divergence_experiment(m, ks, p);
  write_text_file(out_path(out, "divergence.csv"), divergence_table_to_csv(rows));
  log_info("counterexample: " + std::to_string(rows.size()) + " rows");
  return 0;
}

int cmd_audit(std::uint64_t seed, const std::string& out) {
  const auto checks = run_acceptance_checks(seed);
  bool all_pass = true;
  std::ostringstream lines;
  for (const AuditCheck& check : checks) {
    const std::string line =
        std::string(check.pass ? "[PASS] " : "[FAIL] ") + check.name + ": " + check.detail;
    std::cout << line << "\n";
    lines << line << "\n";
    all_pass = all_pass && check.pass;
  }
  if (!out.empty()) write_text_file(out_path(out, "audit.txt"), lines.str());
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymflow: asymmetric metric geometry toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags like --seed may follow the subcommand

  std::string model_path, out_dir = "out";
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "PRNG seed");

  // dist
  auto* dist_cmd = app.add_subcommand("dist", "pairwise asymmetric distances");
  std::string dist_x, dist_y;
  dist_cmd->add_option("--model", model_path, "model json file")->required();
  dist_cmd->add_option("--x", dist_x, "source point, comma separated")->required();
  dist_cmd->add_option("--y", dist_y, "target point, comma separated")->required();
  dist_cmd->add_option("--out", out_dir, "output directory");

  // curve
  auto* curve_cmd = app.add_subcommand("curve", "length, derivatives, classification");
  std::string curve_path;
  double curve_p = 2.0;
  curve_cmd->add_option("--model", model_path, "model json file")->required();
  curve_cmd->add_option("--curve", curve_path, "curve csv (t,x1..xd)")->required();
  curve_cmd->add_option("--p", curve_p, "certificate exponent");
  curve_cmd->add_option("--out", out_dir, "output directory");

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "integrate a gradient flow and audit it");
  std::string potential_path, h_table_path, x0_text;
  double h_power = 2.0, flow_T = 1.0, flow_dt = 1e-3;
  flow_cmd->add_option("--model", model_path, "model json file")->required();
  flow_cmd->add_option("--potential", potential_path, "potential json file")->required();
  flow_cmd->add_option("--h-power", h_power, "power-law dissipation exponent");
  flow_cmd->add_option("--h-table", h_table_path, "monotone table json {xs, ys}");
  flow_cmd->add_option("--x0", x0_text, "initial point")->required();
  flow_cmd->add_option("--T", flow_T, "duration");
  flow_cmd->add_option("--dt", flow_dt, "base step");
  flow_cmd->add_option("--out", out_dir, "output directory");

  // ot
  auto* ot_cmd = app.add_subcommand("ot", "exact optimal transport with duality report");
  std::string mu_path, nu_path, direction = "forward";
  double ot_p = 1.0;
  ot_cmd->add_option("--model", model_path, "model json file")->required();
  ot_cmd->add_option("--mu", mu_path, "source measure json")->required();
  ot_cmd->add_option("--nu", nu_path, "target measure json")->required();
  ot_cmd->add_option("--p", ot_p, "cost exponent");
  ot_cmd->add_option("--direction", direction, "forward|backward");
  ot_cmd->add_option("--out", out_dir, "output directory");

  // interp
  auto* interp_cmd = app.add_subcommand("interp", "glue plans into a path measure");
  std::string measures_path, representative = "geodesic";
  double interp_p = 2.0;
  interp_cmd->add_option("--model", model_path, "model json file")->required();
  interp_cmd->add_option("--measures", measures_path, "curve-of-measures json")->required();
  interp_cmd->add_option("--p", interp_p, "transport exponent");
  interp_cmd->add_option("--representative", representative, "constant|geodesic");
  interp_cmd->add_option("--out", out_dir, "output directory");

  // counterexample
  auto* ce_cmd = app.add_subcommand("counterexample", "Funk divergence table");
  int ce_m = 1 << 10;
  std::string ce_ks = "256,512,1024";
  double ce_p = 2.0;
  ce_cmd->add_option("--m", ce_m, "sample count");
  ce_cmd->add_option("--ks", ce_ks, "cutoff list, comma separated");
  ce_cmd->add_option("--p", ce_p, "Wasserstein exponent");
  ce_cmd->add_option("--out", out_dir, "output directory");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "run the acceptance sweep");
  std::string audit_out;
  audit_cmd->add_option("--out", audit_out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (dist_cmd->parsed()) return cmd_dist(model_path, dist_x, dist_y, out_dir);
    if (curve_cmd->parsed()) return cmd_curve(model_path, curve_path, curve_p, out_dir);
    if (flow_cmd->parsed())
      return cmd_flow(model_path, potential_path, h_power, h_table_path, x0_text, flow_T,
                      flow_dt, out_dir);
    if (ot_cmd->parsed()) return cmd_ot(model_path, mu_path, nu_path, ot_p, direction, out_dir);
    if (interp_cmd->parsed())
      return cmd_interp(model_path, measures_path, interp_p, representative, out_dir);
    if (ce_cmd->parsed()) return cmd_counterexample(ce_m, ce_ks, ce_p, out_dir);
    if (audit_cmd->parsed()) return cmd_audit(seed, audit_out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (residual " << e.residual() << ")\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const ModelError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const SizeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  log_debug("no subcommand dispatched");
  return 1;
}
