#include "ozlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ozlab::io {

using nlohmann::json;

std::string format_number(double v, int significant_digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
  return buf;
}

std::string join_point(const LatticePoint& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(x[i]);
  }
  return out;
}

Kernel parse_kernel_json(const std::string& text) {
  json spec = json::parse(text);
  if (spec.contains("name")) {
    const NamedKernel name = parse_kernel_name(spec.at("name").get<std::string>());
    const int d = spec.value("d", 0);
    VecD params;
    if (spec.contains("params")) params = spec.at("params").get<VecD>();
    return make_named_kernel(name, d, params);
  }
  if (!spec.contains("d") || !spec.contains("points") || !spec.contains("weights"))
    throw Error(errc::validation, "kernel spec needs either name or d/points/weights");
  const int d = spec.at("d").get<int>();
  auto points = spec.at("points").get<std::vector<LatticePoint>>();
  auto weights = spec.at("weights").get<VecD>();
  const bool closure = spec.value("symmetry_closure", true);
  const bool normalize = spec.value("normalize", false);
  const bool step = spec.value("step_distribution", true);
  return Kernel::from_orbit_representatives(d, std::move(points), std::move(weights), closure,
                                            step, normalize);
}

Kernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::validation, "cannot open kernel spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kernel_json(ss.str());
}

std::string kernel_to_json(const Kernel& kernel) {
  json out;
  out["d"] = kernel.dimension();
  if (kernel.has_tail()) {
    out["name"] = "saturation_1d";
    out["params"] = {kernel.tail().p};
  } else {
    out["points"] = kernel.points();
    out["weights"] = kernel.weights();
    out["symmetry_closure"] = false;
    out["step_distribution"] = kernel.is_step_distribution();
  }
  return out.dump();
}

std::string tilt_report_to_json(const wulff::TiltReport& report) {
  json out;
  out["direction"] = report.direction;
  out["mu"] = report.mu;
  out["lagrange_multiplier"] = report.lagrange_multiplier;
  out["mass"] = report.mass;
  out["norm_value"] = report.norm_value;
  out["iterations"] = report.iterations;
  out["boundary_residual"] = report.boundary_residual;
  out["alignment_sine"] = report.alignment_sine;
  out["hessian_min_eig"] = report.hessian_min_eig;
  if (!report.warning.empty()) out["warning"] = report.warning;
  return out.dump();
}

std::string qclass_report_to_json(const QClassReport& report) {
  json out;
  out["m_estimate"] = report.m_estimate;
  out["m_tail_bound"] = report.m_tail_bound;
  out["kir_estimate"] = report.kir_estimate;
  out["zeta"] = report.zeta;
  out["k_grid_size"] = report.k_grid_size;
  out["k_points_scanned"] = report.k_points_scanned;
  return out.dump();
}

std::string saturation_report_to_json(const lattice::SaturationReport& report) {
  json out;
  out["p"] = report.p;
  out["z"] = report.z;
  out["z_sat"] = report.z_sat;
  out["oz_regime"] = report.oz_regime;
  if (report.mass) out["mass"] = *report.mass;
  out["ratios"] = report.ratios;
  return out.dump();
}

std::string ncgl_report_to_json(const crossover::NcglReport& report) {
  json out;
  out["mu"] = report.mu;
  out["eta"] = report.eta;
  out["t_cap"] = report.t_cap;
  out["n_grid"] = report.n_grid;
  out["trend_slope"] = report.trend_slope;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["x"] = row.x;
    r["g_q"] = row.g_q;
    r["continuum"] = row.continuum;
    r["ratio"] = row.ratio;
    r["error_estimate"] = row.error_estimate;
    rows.push_back(r);
  }
  out["rows"] = rows;
  return out.dump();
}

std::string rate_report_to_json(const crossover::RateReport& report) {
  json out;
  out["x"] = report.x;
  out["n_values"] = report.n_values;
  out["rates"] = report.rates;
  out["extrapolated"] = report.extrapolated;
  out["reference"] = report.reference;
  return out.dump();
}

std::string error_to_json(const Error& error) {
  json out;
  out["error"] = error.code_name();
  out["message"] = error.what();
  if (!error.data().empty()) out["data"] = error.data();
  return out.dump();
}

void write_polyline_csv(std::ostream& os, const std::vector<wulff::PolylinePoint>& polyline,
                        bool wulff_shape) {
  os << (wulff_shape ? "theta,mu_1,mu_2\n" : "theta,x_1,x_2\n");
  for (const auto& p : polyline)
    os << format_number(p.theta, 17) << ',' << format_number(p.v1, 17) << ','
       << format_number(p.v2, 17) << '\n';
}

void write_green_csv(std::ostream& os, const std::vector<lattice::GreenEval>& rows) {
  if (rows.empty()) return;
  const std::size_t d = rows.front().x.size();
  for (std::size_t j = 1; j <= d; ++j) os << "x_" << j << ',';
  os << "value,method,error\n";
  for (const auto& row : rows) {
    for (int v : row.x) os << v << ',';
    os << format_number(row.value, 17) << ',' << lattice::method_name(row.method) << ','
       << format_number(row.error_estimate, 6) << '\n';
  }
}

void write_crossover_csv(std::ostream& os, const std::vector<crossover::CrossoverRow>& rows) {
  os << "x,oracle,prediction,ratio,m_norm_x\n";
  for (const auto& row : rows)
    os << join_point(row.x) << ',' << format_number(row.oracle, 17) << ','
       << format_number(row.prediction, 17) << ',' << format_number(row.ratio, 17) << ','
       << format_number(row.mass_times_norm, 17) << '\n';
}

void write_scan_csv(std::ostream& os, const wulff::MonotonicityScan& scan) {
  os << "z,norm,flag\n";
  for (const auto& [z, v] : scan.values)
    os << format_number(z, 17) << ',' << format_number(v, 17) << ','
       << (v > scan.threshold + 1e-9 ? 1 : 0) << '\n';
}

void write_envelope_csv(std::ostream& os, const crossover::EnvelopeReport& report) {
  os << "x,oracle_ratio\n";
  for (std::size_t i = 0; i < report.points.size(); ++i)
    os << join_point(report.points[i]) << ',' << format_number(report.ratios[i], 17) << '\n';
}

void write_decay_csv(std::ostream& os, const std::vector<crossover::CriticalDecayRow>& rows) {
  os << "z,n,s_actual,oracle,limit,ratio\n";
  for (const auto& row : rows)
    os << format_number(row.z, 17) << ',' << row.n << ',' << format_number(row.s_actual, 17)
       << ',' << format_number(row.oracle, 17) << ',' << format_number(row.limit_value, 17)
       << ',' << format_number(row.ratio, 17) << '\n';
}

void write_saturation_csv(std::ostream& os, const lattice::SaturationReport& report) {
  os << "x,ratio\n";
  for (std::size_t i = 0; i < report.ratios.size(); ++i)
    os << (i + 1) << ',' << format_number(report.ratios[i], 17) << '\n';
}

void write_ncgl_csv(std::ostream& os, const crossover::NcglReport& report) {
  os << "x,g_q,continuum,ratio,error\n";
  for (const auto& row : report.rows)
    os << join_point(row.x) << ',' << format_number(row.g_q, 17) << ','
       << format_number(row.continuum, 17) << ',' << format_number(row.ratio, 17) << ','
       << format_number(row.error_estimate, 6) << '\n';
}

std::string run_metadata_json(const Kernel& kernel, double z,
                              const std::vector<std::pair<std::string, double>>& settings) {
  json out;
  out["kernel"] = json::parse(kernel_to_json(kernel));
  out["z"] = z;
  for (const auto& [key, value] : settings) out[key] = value;
  return out.dump();
}

}  // namespace ozlab::io
