#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ozlab/kernel.hpp"

namespace ozlab::wulff {

// Solution of the constrained stationarity system
//   z J^(mu)(0) = 1,   z grad J^(mu)(0) = lambda x
// for one direction.  mu lies on the Wulff-shape boundary and the norm is
// |x|_z = mu.x / m_z.
struct TiltReport {
  VecD direction;                  // x / ||x||_2
  TiltVector mu;                   // optimal tilt on the boundary
  double lagrange_multiplier = 0;  // > 0
  double mass = 0;                 // m_z
  double norm_value = 0;           // |x|_z for the queried x
  int iterations = 0;
  double boundary_residual = 0;    // z J^(mu)(0) - 1 at the solution
  double alignment_sine = 0;       // sine of the angle between eta(mu) and x-hat
  double hessian_min_eig = 0;      // conditioning of the Lagrange Jacobian block
  std::string warning;             // nonempty near-degenerate z -> 1 limit
};

struct DriftCov {
  VecD eta;          // first moments of z D^(mu), parallel to x-hat
  SpdMatrix lambda;  // second moments, positive-definite
  double a2 = 0;     // eta . lambda^{-1} eta
  double b2 = 0;     // x . lambda^{-1} x
  double w2 = 0;     // x-hat . lambda^{-1} x-hat
};

// On-axis decay rate: the positive root of z J^(m e_1)(0) = 1 (bracketing
// plus safeguarded Newton, |f| < 1e-13).  For power-law-tail kernels with
// z < z_sat there is no root; a structured errc::saturated error carrying
// the tail rate m = 1 is thrown.
double mass(const Kernel& kernel, double z);

TiltReport optimal_tilt(const Kernel& kernel, double z, const VecD& x);

// |x|_z; 0 for x = 0.
double norm(const Kernel& kernel, double z, const VecD& x);

DriftCov drift_cov(const Kernel& kernel, double z, const VecD& x);

// Radius of the Wulff boundary along `direction` (level set z J^(r u)(0) = 1),
// by bisection plus Newton.  Exposed because it seeds the Lagrange solver and
// doubles as an independent route for duality checks.
double boundary_radius(const Kernel& kernel, double z, const VecD& direction);

struct PolylinePoint {
  double theta = 0;
  double v1 = 0, v2 = 0;  // mu- or x-coordinates depending on the curve
};

// d = 2 only; n_samples >= 8; closed polylines (first point repeated).
std::vector<PolylinePoint> wulff_boundary(const Kernel& kernel, double z, int n_samples);
std::vector<PolylinePoint> norm_ball(const Kernel& kernel, double z, int n_samples);

// Closed-form norms for the two exactly solvable kernels (scalar implicit
// equation solved by bisection, then the arcsinh / arccosh sums).  Dimension
// is taken from x.
double closed_form_norm_nn(double z, const VecD& x);
double closed_form_norm_linf(double z, const VecD& x);

struct MonotonicityScan {
  std::vector<std::pair<double, double>> values;  // (z, |x|_z)
  double threshold = 0;                           // max(||x||_inf, ||x||_2)
  std::vector<double> flagged_z;                  // grid points with |x|_z > threshold
  bool flagged = false;
};

MonotonicityScan monotonicity_scan(const Kernel& kernel, const VecD& x, const VecD& z_grid);

}  // namespace ozlab::wulff
