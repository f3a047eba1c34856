#pragma once

#include <vector>

#include "ozlab/lattice.hpp"
#include "ozlab/wulff.hpp"

namespace ozlab::crossover {

struct PredictOptions {
  double oracle_tol = 1e-10;   // series absolute tolerance target
  double oracle_rel_cap = 0.02;  // series value accepted when err <= cap*|value|
  double s0 = 0.5;             // d <= 2 cutoff: require m_z * ||x||_2 >= s0
  int n_grid = 0;              // quadrature fallback grid (0 = auto)
};

struct CrossoverRow {
  LatticePoint x;
  double oracle = 0;           // S_z(x) from the lattice side
  double prediction = 0;       // C(x; eta, Lambda) e^{-m_z |x|_z} g^(mu)(0)
  double ratio = 0;            // oracle / prediction
  double mass_times_norm = 0;  // m_z |x|_z, the crossover coordinate
  lattice::Method oracle_method = lattice::Method::series;
  double oracle_error = 0;
};

CrossoverRow predict(const Kernel& kernel, double z, const LatticePoint& x,
                     const PredictOptions& options = {});

// Shared-oracle batch: one series box covers every row it can certify, the
// rest fall back to quadrature, and the two oracles are cross-checked on the
// overlap (a mismatch beyond combined tolerances aborts with a diagnostic).
// Tilt solves are cached per gcd-reduced direction.
std::vector<CrossoverRow> crossover_table(const Kernel& kernel, double z,
                                          const std::vector<LatticePoint>& points,
                                          const PredictOptions& options = {});

// Explicit Ornstein-Zernike prefactor times the exponential:
//   (2pi)^{-(d-1)/2} det(L)^{-1/2} (xhat.L^{-1}xhat)^{-1/2}
//     |eta|^{(d-3)/2} / ||x||^{(d-1)/2} e^{-m_z |x|_z}
double oz_asymptote(const Kernel& kernel, double z, const LatticePoint& x);

struct EnvelopeReport {
  std::vector<LatticePoint> points;
  std::vector<double> ratios;    // oracle / envelope
  double min_ratio = 0;
  double max_ratio = 0;
  double spread = 0;             // max/min; bounded by a constant per the theorem
};

EnvelopeReport envelope_check(const Kernel& kernel, double z,
                              const std::vector<LatticePoint>& points,
                              const PredictOptions& options = {});

struct CriticalDecayRow {
  double z = 0;
  long long n = 0;        // on-axis point x = n e_1
  double s_actual = 0;    // m_z |x|_z
  double oracle = 0;
  double limit_value = 0;  // d/(sigma_z^2 ||x||^{d-2}) G_s(xhat)
  double ratio = 0;
};

std::vector<CriticalDecayRow> critical_decay_check(const Kernel& kernel,
                                                   const std::vector<double>& z_list, double s,
                                                   const PredictOptions& options = {});

struct NcglOptions {
  int n_grid = 0;       // torus grid per axis (0 = dimension default)
  // constant-\hat{g} hook: scales the integral and its completion uniformly;
  // the library ships g = delta_0 (\hat g == 1)
  double g_hat0 = 1.0;
  double s0 = 0.5;
};

struct NcglRow {
  LatticePoint x;
  double g_q = 0;            // torus value of the noncentred Gaussian integral
  double continuum = 0;      // C(x; eta, Lambda) \hat g(0)
  double ratio = 0;
  double error_estimate = 0; // image pollution + tail completion residual + noise
  double tail_completion = 0;
};

struct NcglReport {
  TiltVector mu;
  VecD eta;
  double t_cap = 0;
  int n_grid = 0;
  std::vector<NcglRow> rows;
  double trend_slope = 0;  // LS slope of log|ratio-1| vs log|x| (< 0 expected)
};

// Noncentred Gaussian Lemma check: G_Q(x) for the tilted kernel evaluated by
// torus quadrature.  The time integral is carried out in closed form per
// Fourier mode on [0, T] ((1 - e^{-T Delta})/Delta, entire in Delta), which
// keeps the integrand smooth at k = 0 and caps the periodic-image error; the
// [T, inf) remainder is completed with the continuum drift Gaussian.
NcglReport ncgl_verify(const Kernel& kernel, double z, const TiltVector& mu,
                       const std::vector<LatticePoint>& points, const NcglOptions& options = {});

struct RateReport {
  LatticePoint x;
  std::vector<long long> n_values;
  std::vector<double> rates;       // -log S_z(n x) / n
  double extrapolated = 0;         // 3-point fit r + (a log n + b)/n
  double reference = 0;            // mu_xhat . x = m_z |x|_z
};

// Exponential-rate check via a tilted series (S(x) = e^{-theta mu.x} S^(theta mu)(x));
// the tilt moves the numerical range, not the measured rate.
RateReport exponential_rate(const Kernel& kernel, double z, const LatticePoint& x,
                            const std::vector<long long>& n_values = {10, 20, 40},
                            double theta = 0.9);

// Least-squares slope of log|ratio - 1| against log||x||.
double log_trend_slope(const std::vector<double>& radii, const std::vector<double>& ratios);

}  // namespace ozlab::crossover
