#pragma once

#include <optional>
#include <vector>

#include "ozlab/kernel.hpp"

namespace ozlab::lattice {

enum class Method { series, quadrature, exact_1d };

const char* method_name(Method m);

struct GreenEval {
  LatticePoint x;
  double z = 0;
  double value = 0;
  Method method = Method::series;
  double error_estimate = 0;
};

struct SeriesOptions {
  double tol = 1e-10;                    // absolute geometric tail target
  std::optional<TiltVector> tilt;        // evaluate the tilted Green function S^(tilt)
  std::optional<long long> steps;        // override the step count n_max
  std::optional<int> box_radius;         // override the box radius
  std::size_t memory_cap = 0;            // bytes; 0 = global cap
};

// One dense-box convolution run S = sum_n (z D)^{*n}; values for every x with
// ||x||_inf <= query_radius come out of a single run.  The box radius R
// defaults to (n_max*range + query_radius)/2: any walk that leaves the box
// and returns needs >= (2R - ||x||_inf)/range steps, so the absorbing
// boundary adds at most the same geometric tail as the step cutoff.
class GreenTable {
 public:
  double at(const LatticePoint& x) const;
  GreenEval eval(const LatticePoint& x) const;
  double total_sum() const;               // sum over the box (susceptibility)
  double moment_sum(double phi) const;    // sum ||x||_2^phi S(x) over the box
  double error_estimate() const { return error_estimate_; }
  int query_radius() const { return query_radius_; }
  long long steps() const { return steps_; }
  double z() const { return z_; }

 private:
  friend GreenTable green_series_box(const Kernel&, double, int, const SeriesOptions&);
  int d_ = 0;
  int query_radius_ = 0;
  int box_radius_ = 0;
  int side_ = 0;        // padded side length
  long long center_ = 0;
  double z_ = 0;
  long long steps_ = 0;
  double error_estimate_ = 0;
  std::vector<long long> strides_;
  std::vector<double> acc_;
};

GreenTable green_series_box(const Kernel& kernel, double z, int query_radius,
                            const SeriesOptions& options = {});

GreenEval green_series(const Kernel& kernel, double z, const LatticePoint& x, double tol);

// Tensor-product trapezoid rule for int_{T^d} e^{ik.x} / (1 - z D(k)) dk/(2pi)^d.
// Spectrally accurate for z strictly inside (0,1): the discrete sum equals the
// periodized Green function, so the error decays like e^{-m(n - ||x||)}.
// Accumulation in long double with exact integer phase indexing.
// n_grid = 0 picks the dimension default and doubles until the Richardson
// estimate (n vs n/2) is below tol, or throws errc::quadrature with a
// suggested grid size.
GreenEval green_quadrature(const Kernel& kernel, double z, const LatticePoint& x, int n_grid = 0,
                           double tol = 1e-10);

// One shared grid pass for many points (phases accumulate incrementally, so
// the marginal cost per extra point is one multiply-add per grid node).
std::vector<GreenEval> green_quadrature_batch(const Kernel& kernel, double z,
                                              const std::vector<LatticePoint>& points,
                                              int n_grid);

// d=1 nearest-neighbour closed form S_z(x) = e^{-m|x|} / sqrt(1-z^2),
// cosh m = 1/z.
GreenEval green_exact_1d_nn(double z, long long x);

struct Susceptibility {
  bool finite = false;
  double value = 0;  // +inf when not finite
};

// chi^(mu)(z) = 1/(1 - z J^(mu)(0)) for the random-walk case g = delta_0;
// infinite (mu outside Omega_z) unless z J^(mu)(0) < 1 - 1e-12.
Susceptibility tilted_susceptibility(const Kernel& kernel, double z, const TiltVector& mu);

// Correlation length of order phi: (sum ||x||^phi S_z / sum S_z)^{1/phi},
// box truncated where the e^{-m ||x||_inf} envelope drops below tol.
double xi_phi(const Kernel& kernel, double z, double phi, double tol);

struct SaturationReport {
  double p = 0;
  double z = 0;
  double z_sat = 0;
  bool oz_regime = false;         // z >= z_sat
  std::optional<double> mass;     // present in the OZ regime
  std::vector<double> ratios;     // S_z(x) / (z D(x)) for x = 1..x_max
};

SaturationReport saturation_probe(double p, double z, int x_max);

}  // namespace ozlab::lattice
