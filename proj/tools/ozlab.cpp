// ozlab: lattice Green functions, Wulff-shape geometry, and crossover tables
// from the command line.  Subcommands write CSV to stdout (or --out) and
// machine-readable JSON diagnostics to stderr on failure; exit codes are
// 0 = ok, 2 = validation error, 3 = solver/numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ozlab/brownian.hpp"
#include "ozlab/crossover.hpp"
#include "ozlab/io.hpp"
#include "ozlab/kernel.hpp"
#include "ozlab/lattice.hpp"
#include "ozlab/wulff.hpp"

namespace {

using namespace ozlab;

struct KernelArgs {
  std::string kernel = "nn";
  int d = 2;
  std::vector<double> params;
  double alpha = -1.0;
  double p = -1.0;

  Kernel build() const {
    if (kernel.find(".json") != std::string::npos || std::filesystem::exists(kernel))
      return io::load_kernel(kernel);
    VecD ps(params.begin(), params.end());
    if (alpha >= 0.0) ps.assign(1, alpha);
    if (p >= 0.0) ps.assign(1, p);
    const NamedKernel name = parse_kernel_name(kernel);
    int dim = d;
    if (name == NamedKernel::saturation_1d) dim = 1;
    return make_named_kernel(name, dim, ps);
  }
};

void add_kernel_flags(CLI::App* cmd, KernelArgs& args) {
  cmd->add_option("--kernel", args.kernel,
                  "named kernel (nn, linf_box, perturbed_nn, saturation_1d) or a JSON spec file");
  cmd->add_option("--d", args.d, "lattice dimension for named kernels");
  cmd->add_option("--params", args.params, "extra kernel parameters");
  cmd->add_option("--alpha", args.alpha, "perturbed_nn perturbation weight");
  cmd->add_option("--p", args.p, "saturation_1d tail exponent");
}

VecD parse_vec(const std::string& text) {
  VecD out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw Error(errc::validation, "empty vector argument");
  return out;
}

LatticePoint parse_point(const std::string& text) {
  LatticePoint out;
  for (double v : parse_vec(text)) {
    if (std::abs(v - std::llround(v)) > 1e-9)
      throw Error(errc::validation, "lattice point must have integer coordinates: " + text);
    out.push_back(static_cast<int>(std::llround(v)));
  }
  return out;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(errc::validation, "cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_meta(const std::string& path, const std::string& json) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw Error(errc::validation, "cannot open metadata file: " + path);
  out << json << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Ornstein-Zernike crossover laboratory"};
  app.require_subcommand(1);

  unsigned threads = 0;
  int digits = 7;
  std::string out_path;
  std::string meta_path;
  // applied up front: subcommand callbacks run before the main app callback
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--threads") {
      char* end = nullptr;
      const long v = std::strtol(argv[i + 1], &end, 10);
      if (end != argv[i + 1] && v >= 0) set_thread_cap(static_cast<unsigned>(v));
    }
  }
  app.add_option("--threads", threads, "cap worker threads (0 = hardware)");

  KernelArgs kargs;
  double z = 0.5;
  std::vector<std::string> x_args;
  std::string mu_arg, x_arg;

  auto add_common = [&](CLI::App* cmd, bool needs_kernel = true) {
    if (needs_kernel) add_kernel_flags(cmd, kargs);
    cmd->add_option("--out", out_path, "write output to a file instead of stdout");
    cmd->add_option("--digits", digits, "significant digits for scalar output");
  };

  // ------------------------------------------------------------------ mass
  auto* c_mass = app.add_subcommand("mass", "on-axis decay rate m_z");
  add_common(c_mass);
  c_mass->add_option("--z", z)->required();
  c_mass->callback([&] {
    Output out(out_path);
    out.stream() << io::format_number(wulff::mass(kargs.build(), z), digits) << '\n';
  });

  // ------------------------------------------------------------------ norm
  auto* c_norm = app.add_subcommand("norm", "direction-dependent norm |x|_z");
  add_common(c_norm);
  c_norm->add_option("--z", z)->required();
  c_norm->add_option("--x", x_arg, "vector, comma separated")->required();
  c_norm->callback([&] {
    Output out(out_path);
    out.stream() << io::format_number(wulff::norm(kargs.build(), z, parse_vec(x_arg)), digits)
                 << '\n';
  });

  // ------------------------------------------------------------------ tilt
  auto* c_tilt = app.add_subcommand("tilt", "optimal tilt report (JSON)");
  add_common(c_tilt);
  c_tilt->add_option("--z", z)->required();
  c_tilt->add_option("--x", x_arg)->required();
  c_tilt->callback([&] {
    Output out(out_path);
    out.stream() << io::tilt_report_to_json(
                        wulff::optimal_tilt(kargs.build(), z, parse_vec(x_arg)))
                 << '\n';
  });

  // ------------------------------------------------------------ wulff/ball
  int samples = 360;
  auto* c_wulff = app.add_subcommand("wulff", "Wulff-shape boundary polyline (d = 2)");
  add_common(c_wulff);
  c_wulff->add_option("--z", z)->required();
  c_wulff->add_option("--samples", samples);
  c_wulff->callback([&] {
    Output out(out_path);
    io::write_polyline_csv(out.stream(), wulff::wulff_boundary(kargs.build(), z, samples), true);
  });

  auto* c_ball = app.add_subcommand("ball", "unit ball of |.|_z as a polyline (d = 2)");
  add_common(c_ball);
  c_ball->add_option("--z", z)->required();
  c_ball->add_option("--samples", samples);
  c_ball->callback([&] {
    Output out(out_path);
    io::write_polyline_csv(out.stream(), wulff::norm_ball(kargs.build(), z, samples), false);
  });

  // ----------------------------------------------------------------- green
  double tol = 1e-10;
  int ngrid = 0;
  std::string method = "auto";
  auto* c_green = app.add_subcommand("green", "lattice Green function values");
  add_common(c_green);
  c_green->add_option("--z", z)->required();
  c_green->add_option("--x", x_args, "lattice point(s), comma separated")->required();
  c_green->add_option("--method", method, "auto | series | quadrature | exact");
  c_green->add_option("--tol", tol);
  c_green->add_option("--ngrid", ngrid, "quadrature grid per axis (power of two)");
  c_green->callback([&] {
    const Kernel kernel = kargs.build();
    std::vector<lattice::GreenEval> rows;
    for (const auto& arg : x_args) {
      const LatticePoint x = parse_point(arg);
      if (method == "series")
        rows.push_back(lattice::green_series(kernel, z, x, tol));
      else if (method == "quadrature")
        rows.push_back(lattice::green_quadrature(kernel, z, x, ngrid, tol));
      else if (method == "exact")
        rows.push_back(lattice::green_exact_1d_nn(z, x.at(0)));
      else if (method == "auto") {
        try {
          rows.push_back(lattice::green_series(kernel, z, x, tol));
        } catch (const Error&) {
          rows.push_back(lattice::green_quadrature(kernel, z, x, ngrid, tol));
        }
      } else {
        throw Error(errc::validation, "unknown method: " + method);
      }
    }
    Output out(out_path);
    io::write_green_csv(out.stream(), rows);
  });

  // ------------------------------------------------------------------- chi
  auto* c_chi = app.add_subcommand("chi", "tilted susceptibility");
  add_common(c_chi);
  c_chi->add_option("--z", z)->required();
  c_chi->add_option("--mu", mu_arg, "tilt vector (default 0)");
  c_chi->callback([&] {
    const Kernel kernel = kargs.build();
    const VecD mu = mu_arg.empty() ? VecD(static_cast<std::size_t>(kernel.dimension()), 0.0)
                                   : parse_vec(mu_arg);
    const lattice::Susceptibility chi = lattice::tilted_susceptibility(kernel, z, mu);
    Output out(out_path);
    out.stream() << (chi.finite ? io::format_number(chi.value, digits) : "infinite") << '\n';
  });

  // -------------------------------------------------------------------- xi
  double phi = 2.0;
  auto* c_xi = app.add_subcommand("xi", "correlation length of order phi");
  add_common(c_xi);
  c_xi->add_option("--z", z)->required();
  c_xi->add_option("--phi", phi);
  c_xi->add_option("--tol", tol, "relative tolerance (clamped to <= 1e-4)");
  c_xi->callback([&] {
    Output out(out_path);
    out.stream() << io::format_number(
                        lattice::xi_phi(kargs.build(), z, phi, std::min(tol, 1e-4)), digits)
                 << '\n';
  });

  // ------------------------------------------------------------- crossover
  double s0 = 0.5;
  auto* c_cross = app.add_subcommand("crossover", "prediction vs oracle table");
  add_common(c_cross);
  c_cross->add_option("--z", z)->required();
  c_cross->add_option("--x", x_args, "lattice points")->required();
  c_cross->add_option("--tol", tol);
  c_cross->add_option("--s0", s0);
  c_cross->add_option("--ngrid", ngrid, "quadrature fallback grid (0 = auto)");
  c_cross->add_option("--meta", meta_path, "write run metadata JSON to this path");
  c_cross->callback([&] {
    const Kernel kernel = kargs.build();
    std::vector<LatticePoint> pts;
    for (const auto& arg : x_args) pts.push_back(parse_point(arg));
    crossover::PredictOptions opt;
    opt.oracle_tol = tol;
    opt.s0 = s0;
    opt.n_grid = ngrid;
    const auto rows = crossover::crossover_table(kernel, z, pts, opt);
    Output out(out_path);
    io::write_crossover_csv(out.stream(), rows);
    double n_series = 0, n_quad = 0, n_exact = 0;
    for (const auto& row : rows) {
      if (row.oracle_method == lattice::Method::series) ++n_series;
      if (row.oracle_method == lattice::Method::quadrature) ++n_quad;
      if (row.oracle_method == lattice::Method::exact_1d) ++n_exact;
    }
    write_meta(meta_path, io::run_metadata_json(kernel, z,
                                                {{"oracle_tol", tol},
                                                 {"s0", s0},
                                                 {"n_grid", static_cast<double>(ngrid)},
                                                 {"series_rows", n_series},
                                                 {"quadrature_rows", n_quad},
                                                 {"exact_rows", n_exact}}));
  });

  // -------------------------------------------------------------------- oz
  auto* c_oz = app.add_subcommand("oz", "Ornstein-Zernike asymptote");
  add_common(c_oz);
  c_oz->add_option("--z", z)->required();
  c_oz->add_option("--x", x_args)->required();
  c_oz->callback([&] {
    const Kernel kernel = kargs.build();
    Output out(out_path);
    out.stream() << "x,oz\n";
    for (const auto& arg : x_args) {
      const LatticePoint x = parse_point(arg);
      out.stream() << io::join_point(x) << ','
                   << io::format_number(crossover::oz_asymptote(kernel, z, x), 17) << '\n';
    }
  });

  // -------------------------------------------------------------- envelope
  auto* c_env = app.add_subcommand("envelope", "crossover-envelope ratios");
  add_common(c_env);
  c_env->add_option("--z", z)->required();
  c_env->add_option("--x", x_args)->required();
  c_env->add_option("--meta", meta_path);
  c_env->callback([&] {
    const Kernel kernel = kargs.build();
    std::vector<LatticePoint> pts;
    for (const auto& arg : x_args) pts.push_back(parse_point(arg));
    const auto report = crossover::envelope_check(kernel, z, pts);
    Output out(out_path);
    io::write_envelope_csv(out.stream(), report);
    write_meta(meta_path, io::run_metadata_json(kernel, z,
                                                {{"min_ratio", report.min_ratio},
                                                 {"max_ratio", report.max_ratio},
                                                 {"spread", report.spread}}));
  });

  // -------------------------------------------------------- critical-decay
  std::string zlist_arg;
  double s_target = 1.0;
  auto* c_decay = app.add_subcommand("critical-decay", "massive-critical limit check");
  add_common(c_decay);
  c_decay->add_option("--zlist", zlist_arg, "comma-separated z values")->required();
  c_decay->add_option("--s", s_target, "target crossover coordinate m_z |x|_z");
  c_decay->callback([&] {
    const Kernel kernel = kargs.build();
    const VecD zs = parse_vec(zlist_arg);
    const auto rows = crossover::critical_decay_check(
        kernel, std::vector<double>(zs.begin(), zs.end()), s_target);
    Output out(out_path);
    io::write_decay_csv(out.stream(), rows);
  });

  // ------------------------------------------------------------------ ncgl
  std::string xdir_arg;
  double boundary_scale = 1.0;
  auto* c_ncgl = app.add_subcommand("ncgl", "noncentred Gaussian Lemma verification");
  add_common(c_ncgl);
  c_ncgl->add_option("--z", z)->required();
  c_ncgl->add_option("--x", x_args, "lattice points (parallel to the drift)")->required();
  c_ncgl->add_option("--mu", mu_arg, "explicit tilt vector");
  c_ncgl->add_option("--x-dir", xdir_arg, "direction whose optimal tilt to use");
  c_ncgl->add_option("--scale", boundary_scale, "scale applied to the optimal tilt");
  c_ncgl->add_option("--ngrid", ngrid);
  c_ncgl->add_option("--meta", meta_path);
  c_ncgl->callback([&] {
    const Kernel kernel = kargs.build();
    VecD mu;
    if (!mu_arg.empty()) {
      mu = parse_vec(mu_arg);
    } else {
      const std::string dir = xdir_arg.empty() ? x_args.front() : xdir_arg;
      mu = wulff::optimal_tilt(kernel, z, parse_vec(dir)).mu;
      for (double& v : mu) v *= boundary_scale;
    }
    std::vector<LatticePoint> pts;
    for (const auto& arg : x_args) pts.push_back(parse_point(arg));
    crossover::NcglOptions opt;
    opt.n_grid = ngrid;
    const auto report = crossover::ncgl_verify(kernel, z, mu, pts, opt);
    Output out(out_path);
    io::write_ncgl_csv(out.stream(), report);
    write_meta(meta_path, io::ncgl_report_to_json(report));
  });

  // ------------------------------------------------------------ saturation
  double p_exp = 2.0;
  int x_max = 30;
  auto* c_sat = app.add_subcommand("saturation", "saturation-regime probe (d = 1)");
  c_sat->add_option("--p", p_exp, "tail exponent (> 1)")->required();
  c_sat->add_option("--z", z)->required();
  c_sat->add_option("--xmax", x_max);
  c_sat->add_option("--out", out_path);
  c_sat->add_option("--meta", meta_path);
  c_sat->callback([&] {
    const auto report = lattice::saturation_probe(p_exp, z, x_max);
    Output out(out_path);
    io::write_saturation_csv(out.stream(), report);
    write_meta(meta_path, io::saturation_report_to_json(report));
  });

  // --------------------------------------------------------- scan-monotone
  double zmin = 0.01, zmax = 0.99;
  int steps = 98;
  auto* c_scan = app.add_subcommand("scan-monotone", "norm monotonicity scan over z");
  add_common(c_scan);
  c_scan->add_option("--x", x_arg)->required();
  c_scan->add_option("--zmin", zmin);
  c_scan->add_option("--zmax", zmax);
  c_scan->add_option("--steps", steps);
  c_scan->callback([&] {
    if (steps < 1 || !(zmin > 0.0) || !(zmax < 1.0) || !(zmin <= zmax))
      throw Error(errc::validation, "scan requires 0 < zmin <= zmax < 1 and steps >= 1");
    VecD grid;
    for (int i = 0; i < steps; ++i)
      grid.push_back(steps == 1 ? zmin : zmin + (zmax - zmin) * i / (steps - 1));
    const auto scan = wulff::monotonicity_scan(kargs.build(), parse_vec(x_arg), grid);
    Output out(out_path);
    io::write_scan_csv(out.stream(), scan);
  });

  // ---------------------------------------------------------------- qcheck
  double zeta = 1.0;
  int kgrid = 64;
  auto* c_q = app.add_subcommand("qcheck", "Q-class moment/infrared diagnostics (JSON)");
  add_common(c_q);
  c_q->add_option("--z", z)->required();
  c_q->add_option("--mu", mu_arg);
  c_q->add_option("--zeta", zeta);
  c_q->add_option("--kgrid", kgrid);
  c_q->callback([&] {
    const Kernel kernel = kargs.build();
    const VecD mu = mu_arg.empty() ? VecD(static_cast<std::size_t>(kernel.dimension()), 0.0)
                                   : parse_vec(mu_arg);
    Output out(out_path);
    out.stream() << io::qclass_report_to_json(q_class_check(kernel, z, mu, zeta, kgrid)) << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << R"({"error":"validation","message":")" << e.what() << R"("})" << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ozlab::Error& e) {
    std::cerr << ozlab::io::error_to_json(e) << '\n';
    return e.code() == ozlab::errc::validation ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"internal","message":")" << e.what() << R"("})" << '\n';
    return 3;
  }
}
