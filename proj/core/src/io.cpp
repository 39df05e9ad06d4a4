#include "asymflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "asymflow/curves.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/gradient_flow.hpp"
#include "asymflow/metric_models.hpp"
#include "asymflow/norms.hpp"
#include "asymflow/path_measures.hpp"
#include "asymflow/transport.hpp"

namespace asymflow {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    out << content;
  }
  std::remove(path.c_str());
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw InputError("cannot write output file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Norm specs.

std::string norm_spec_to_json(const NormSpec& spec) {
  json j;
  j["dim"] = spec.dimension;
  switch (spec.variant) {
    case NormVariant::Euclidean:
      j["variant"] = "euclidean";
      break;
    case NormVariant::Randers:
      j["variant"] = "randers";
      j["drift"] = spec.drift;
      break;
    case NormVariant::L1Drift:
      j["variant"] = "l1drift";
      j["omega"] = spec.omega;
      break;
  }
  return j.dump();
}

NormSpec norm_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("norm spec: invalid json: ") + e.what());
  }
  try {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "euclidean") return NormSpec::euclidean(j.at("dim").get<int>());
    if (variant == "randers") return NormSpec::randers(j.at("drift").get<Vec>());
    if (variant == "l1drift")
      return NormSpec::l1_drift(j.at("dim").get<int>(), j.at("omega").get<double>());
    throw InputError("norm spec: unknown variant '" + variant + "'");
  } catch (const json::exception& e) {
    throw InputError(std::string("norm spec: missing field: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metric models.

std::string metric_model_to_json(const MetricModel& model) {
  json j;
  j["dim"] = model.dimension;
  switch (model.variant) {
    case ModelVariant::FunkBall:
      j["variant"] = "funk";
      break;
    case ModelVariant::MinkowskiSpace:
      j["variant"] = "minkowski";
      j["norm"] = json::parse(norm_spec_to_json(model.norm_spec));
      break;
    case ModelVariant::ToyHalfLine:
      j["variant"] = "toy_halfline";
      break;
    case ModelVariant::BlackBoxChart:
      throw InputError("black box charts are not serializable");
  }
  return j.dump();
}

MetricModel metric_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("metric model: invalid json: ") + e.what());
  }
  try {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "funk") return MetricModel::funk_ball(j.at("dim").get<int>());
    if (variant == "minkowski")
      return MetricModel::minkowski(norm_spec_from_json(j.at("norm").dump()));
    if (variant == "toy_halfline") return MetricModel::toy_half_line();
    throw InputError("metric model: unknown variant '" + variant + "'");
  } catch (const json::exception& e) {
    throw InputError(std::string("metric model: missing field: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Curves and reports.

std::string curve_to_csv(const SampledCurve& curve) {
  std::ostringstream out;
  const int d = curve.points.empty() ? 0 : static_cast<int>(curve.points[0].size());
  out << "t";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    out << format_double(curve.times[k]);
    for (double x : curve.points[k]) out << "," << format_double(x);
    out << "\n";
  }
  return out.str();
}

SampledCurve curve_from_csv(const std::string& text) {
  SampledCurve curve;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("curve csv: empty input");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    Vec values;
    while (std::getline(row, field, ',')) values.push_back(std::stod(field));
    if (values.empty()) continue;
    curve.times.push_back(values[0]);
    curve.points.emplace_back(values.begin() + 1, values.end());
  }
  curve.validate();
  return curve;
}

std::string ac_report_to_json(const AcReport& report, double p) {
  json j;
  j["forward_ok"] = report.forward_ok;
  j["backward_ok"] = report.backward_ok;
  j["p"] = p;
  j["lp_norms"] = {{"forward_l1", report.forward.l1_norm},
                   {"forward_lp", report.forward.lp_norm},
                   {"backward_l1", report.backward.l1_norm},
                   {"backward_lp", report.backward.lp_norm}};
  json violations = json::array();
  const auto add = [&violations](const char* side, const AcCertificate& cert) {
    for (const AcViolation& v : cert.violations)
      violations.push_back({{"side", side}, {"i", v.i}, {"j", v.j}, {"excess", v.excess}});
  };
  add("forward", report.forward);
  add("backward", report.backward);
  j["violations"] = violations;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Flow trajectories.

std::string trajectory_to_csv(const FlowTrajectory& traj) {
  std::ostringstream out;
  const int d = traj.points.empty() ? 0 : static_cast<int>(traj.points[0].size());
  out << "t";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << ",speed,phi,psi_term,psistar_term\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]);
    for (double x : traj.points[k]) out << "," << format_double(x);
    out << "," << format_double(traj.speed[k]);
    out << "," << format_double(traj.phi[k]);
    out << "," << format_double(traj.psi_term[k]);
    out << "," << format_double(traj.psi_star_term[k]);
    out << "\n";
  }
  return out.str();
}

std::string energy_audit_to_json(const EnergyAuditReport& report) {
  json j;
  j["max_residual"] = report.max_residual;
  j["max_chain_residual"] = report.max_chain_residual;
  j["phi_increase"] = report.phi_increase;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Measures, plans, experiments.

std::string measure_to_json(const DiscreteMeasure& measure) {
  json j;
  j["points"] = measure.support;
  j["weights"] = measure.weights;
  return j.dump();
}

DiscreteMeasure measure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("measure: invalid json: ") + e.what());
  }
  DiscreteMeasure m;
  try {
    m.support = j.at("points").get<std::vector<Vec>>();
    m.weights = j.at("weights").get<Vec>();
  } catch (const json::exception& e) {
    throw InputError(std::string("measure: missing field: ") + e.what());
  }
  m.validate();
  return m;
}

std::string ot_result_to_json(const OTResult& result) {
  json j;
  j["value"] = result.value;
  json plan = json::array();
  for (int i = 0; i < result.plan.rows; ++i)
    for (int jx = 0; jx < result.plan.cols; ++jx)
      if (result.plan(i, jx) > 0.0) plan.push_back({i, jx, result.plan(i, jx)});
  j["plan"] = plan;
  j["row_potential"] = result.row_potential;
  j["col_potential"] = result.col_potential;
  return j.dump();
}

std::string divergence_table_to_csv(const std::vector<DivergenceRow>& rows) {
  std::ostringstream out;
  out << "m,k,forward_dist,anchor_dist\n";
  for (const DivergenceRow& r : rows)
    out << r.m << "," << r.k << "," << format_double(r.forward_dist) << ","
        << format_double(r.anchor_dist) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Path measures.

std::string path_measure_to_json(const DiscretePathMeasure& eta) {
  json j;
  j["schedule_N"] = eta.schedule.levels;
  j["representative"] =
      eta.representative == Representative::Constant ? "constant" : "geodesic";
  json atoms = json::array();
  for (const PathAtom& atom : eta.atoms)
    atoms.push_back({{"nodes", atom.nodes}, {"weight", atom.weight}});
  j["atoms"] = atoms;
  return j.dump();
}

std::string continuity_report_to_csv(const ContinuityReport& report) {
  std::ostringstream out;
  out << "cell,test,residual\n";
  for (std::size_t cell = 0; cell < report.residuals.size(); ++cell)
    for (std::size_t q = 0; q < report.residuals[cell].size(); ++q)
      out << cell << "," << q << "," << format_double(report.residuals[cell][q]) << "\n";
  return out.str();
}

}  // namespace asymflow
