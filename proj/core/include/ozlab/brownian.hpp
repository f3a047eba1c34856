#pragma once

#include "ozlab/common.hpp"

namespace ozlab::brownian {

enum class BesselMethod { closed_form_half_integer, integral };

struct BesselEval {
  double nu = 0.0;
  double x = 0.0;
  double value = 0.0;
  BesselMethod method = BesselMethod::integral;
};

// Modified Bessel function of the second kind K_nu(x), x > 0.
// nu = +-1/2 uses K_{+-1/2}(x) = sqrt(pi/2x) e^{-x}; other orders integrate
// (1/2)(x/2)^nu int_0^inf u^{-nu-1} e^{-u - x^2/(4u)} du after u = e^s
// (double-exponential decay, trapezoid in s).
BesselEval bessel_k(double nu, double x);

// The quadrature route unconditionally (any real nu); used by bessel_k for
// non-half-integer orders and exposed so the closed forms can be checked
// against it.
BesselEval bessel_k_integral(double nu, double x);

// Heat kernel of Brownian motion with drift eta and covariance lambda,
// rho_t(x) = exp{-(x-t eta).lambda^{-1}(x-t eta)/(2t)} / ((2 pi t)^{d/2} sqrt(det lambda)).
double heat_kernel(double t, const VecD& x, const VecD& eta, const SpdMatrix& lambda);

// Green function C(x; eta, lambda) = int_0^inf rho_t dt, evaluated as
//   2 (2pi)^{-d/2} (det)^{-1/2} (a/b)^nu K_nu(ab) e^{x.lambda^{-1} eta},
// nu = (d-2)/2, a^2 = eta.lambda^{-1} eta, b^2 = x.lambda^{-1} x.
// Requires x != 0, and eta != 0 when d <= 2.  For ab < 1e-8 with d > 2 the
// small-argument branch Gamma(nu)/(2 pi^{d/2} sqrt(det)) (x.lambda^{-1}x)^{-nu}
// is used (exact critical limit).
double brownian_green(const VecD& x, const VecD& eta, const SpdMatrix& lambda);

// Massive continuum Green function G_a(x) = int_0^inf rho_t(x;0,Id) e^{-a^2 t/2} dt.
// Requires a > 0 when d <= 2, a >= 0 when d > 2, x != 0.
double massive_green(double a, const VecD& x);

// A_phi = int ||y||^phi G_1(y) dy = 2^{phi+1} Gamma((phi+2)/2) Gamma((phi+d)/2) / Gamma(d/2).
double a_phi(double phi, int d);

// Crossover envelope B(x; eta) = (|eta| v |x|^{-1})^{(d-3)/2} / |x|^{(d-1)/2}.
double envelope(const VecD& x, const VecD& eta);

}  // namespace ozlab::brownian
