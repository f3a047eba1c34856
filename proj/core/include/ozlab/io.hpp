#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ozlab/crossover.hpp"
#include "ozlab/kernel.hpp"
#include "ozlab/lattice.hpp"
#include "ozlab/wulff.hpp"

namespace ozlab::io {

// Kernel spec files (JSON): either
//   {"name": "nn", "d": 2, "params": []}
// or
//   {"d": 2, "points": [[1,0],[1,1]], "weights": [0.2375, 0.0125],
//    "symmetry_closure": true, "normalize": false, "step_distribution": true}
Kernel load_kernel(const std::string& path);
Kernel parse_kernel_json(const std::string& text);
std::string kernel_to_json(const Kernel& kernel);

std::string tilt_report_to_json(const wulff::TiltReport& report);
std::string qclass_report_to_json(const QClassReport& report);
std::string saturation_report_to_json(const lattice::SaturationReport& report);
std::string ncgl_report_to_json(const crossover::NcglReport& report);
std::string rate_report_to_json(const crossover::RateReport& report);
std::string error_to_json(const Error& error);

// CSV schemas (headers included, unix newlines, deterministic formatting):
//   polyline:  theta,mu_1,mu_2   (wulff)  /  theta,x_1,x_2  (ball)
//   green:     x_1,...,x_d,value,method,error
//   crossover: x,oracle,prediction,ratio,m_norm_x   (x joined with ';')
//   scan:      z,norm,flag
//   envelope:  x,oracle_ratio
//   decay:     z,n,s_actual,oracle,limit,ratio
//   saturation: x,ratio
//   ncgl:      x,g_q,continuum,ratio,error
void write_polyline_csv(std::ostream& os, const std::vector<wulff::PolylinePoint>& polyline,
                        bool wulff_shape);
void write_green_csv(std::ostream& os, const std::vector<lattice::GreenEval>& rows);
void write_crossover_csv(std::ostream& os, const std::vector<crossover::CrossoverRow>& rows);
void write_scan_csv(std::ostream& os, const wulff::MonotonicityScan& scan);
void write_envelope_csv(std::ostream& os, const crossover::EnvelopeReport& report);
void write_decay_csv(std::ostream& os, const std::vector<crossover::CriticalDecayRow>& rows);
void write_saturation_csv(std::ostream& os, const lattice::SaturationReport& report);
void write_ncgl_csv(std::ostream& os, const crossover::NcglReport& report);

// Run metadata for table-producing commands.
std::string run_metadata_json(const Kernel& kernel, double z,
                              const std::vector<std::pair<std::string, double>>& settings);

std::string format_number(double v, int significant_digits = 7);
std::string join_point(const LatticePoint& x);  // "10;0;0"

}  // namespace ozlab::io
