#include "ozlab/brownian.hpp"

#include <cmath>

namespace ozlab::brownian {

namespace {

void require_spd_dims(const VecD& x, const VecD& eta, const SpdMatrix& lambda) {
  if (x.size() != eta.size() || static_cast<int>(x.size()) != lambda.dim())
    throw Error(errc::validation, "x, eta, lambda dimension mismatch");
}

}  // namespace

BesselEval bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw Error(errc::validation, "bessel_k requires x > 0", {{"x", x}});
  if (std::abs(std::abs(nu) - 0.5) < 1e-15) {
    BesselEval out;
    out.nu = nu;
    out.x = x;
    out.method = BesselMethod::closed_form_half_integer;
    out.value = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x);
    return out;
  }
  return bessel_k_integral(nu, x);
}

BesselEval bessel_k_integral(double nu, double x) {
  if (!(x > 0.0)) throw Error(errc::validation, "bessel_k requires x > 0", {{"x", x}});
  BesselEval out;
  out.nu = nu;
  out.x = x;
  out.method = BesselMethod::integral;
  // integrand after u = e^s:  exp(phi(s)),  phi(s) = -e^s - q e^{-s} - nu s
  const double q = 0.25 * x * x;
  const double es_peak = 0.5 * (-nu + std::sqrt(nu * nu + 4.0 * q));
  const double s_peak = std::log(std::max(es_peak, 1e-300));
  auto log_integrand = [&](double s) { return -std::exp(s) - q * std::exp(-s) - nu * s; };
  const double lg_peak = log_integrand(s_peak);
  const double h = 0.125;
  const double cutoff = lg_peak - 52.0;  // e^{-52} ~ 2.6e-23 below the peak
  KahanSum<long double> sum;
  sum.add(std::exp(lg_peak - lg_peak));
  for (int dir = -1; dir <= 1; dir += 2) {
    for (int i = 1; i < 40000; ++i) {
      const double s = s_peak + dir * h * i;
      const double lg = log_integrand(s);
      if (lg < cutoff) break;
      sum.add(std::exp(static_cast<long double>(lg - lg_peak)));
    }
  }
  const long double integral = sum.value() * static_cast<long double>(h);
  // value = (1/2) (x/2)^nu * integral; assemble in logs to dodge under/overflow
  const long double lg_value = static_cast<long double>(std::log(0.5) + nu * std::log(0.5 * x) + lg_peak) +
                               std::log(integral);
  out.value = static_cast<double>(std::exp(lg_value));
  return out;
}

double heat_kernel(double t, const VecD& x, const VecD& eta, const SpdMatrix& lambda) {
  if (!(t > 0.0)) throw Error(errc::validation, "heat_kernel requires t > 0", {{"t", t}});
  require_spd_dims(x, eta, lambda);
  const int d = lambda.dim();
  VecD shifted(x);
  for (std::size_t j = 0; j < shifted.size(); ++j) shifted[j] -= t * eta[j];
  const double quad = lambda.quad_form(shifted);  // throws if not SPD
  const double det = lambda.determinant();
  return std::exp(-0.5 * quad / t) / (std::pow(2.0 * M_PI * t, 0.5 * d) * std::sqrt(det));
}

double brownian_green(const VecD& x, const VecD& eta, const SpdMatrix& lambda) {
  require_spd_dims(x, eta, lambda);
  const int d = lambda.dim();
  if (norm2(x) == 0.0) throw Error(errc::validation, "brownian_green requires x != 0");
  const double a2 = lambda.quad_form(eta);
  const double b2 = lambda.quad_form(x);
  if (d <= 2 && a2 == 0.0)
    throw Error(errc::validation, "brownian_green requires eta != 0 when d <= 2",
                {{"d", static_cast<double>(d)}});
  const double a = std::sqrt(a2);
  const double b = std::sqrt(b2);
  const double det = lambda.determinant();
  const double tilt = dot(x, lambda.solve(eta));
  const double nu = 0.5 * (d - 2);
  if (a * b < 1e-8 && d > 2) {
    // critical branch: (a/b)^nu K_nu(ab) -> Gamma(nu) 2^{nu-1} b^{-2nu}
    return std::tgamma(nu) / (2.0 * std::pow(M_PI, 0.5 * d) * std::sqrt(det)) *
           std::pow(b2, -nu) * std::exp(tilt);
  }
  const double k = bessel_k(nu, a * b).value;
  return 2.0 / (std::pow(2.0 * M_PI, 0.5 * d) * std::sqrt(det)) * std::pow(a / b, nu) * k *
         std::exp(tilt);
}

double massive_green(double a, const VecD& x) {
  const int d = static_cast<int>(x.size());
  const double b = norm2(x);
  if (!(b > 0.0)) throw Error(errc::validation, "massive_green requires x != 0");
  if (d <= 2 && !(a > 0.0))
    throw Error(errc::validation, "massive_green requires a > 0 when d <= 2",
                {{"a", a}, {"d", static_cast<double>(d)}});
  if (a < 0.0) throw Error(errc::validation, "massive_green requires a >= 0", {{"a", a}});
  const double nu = 0.5 * (d - 2);
  if (a * b < 1e-8 && d > 2)
    return std::tgamma(nu) / (2.0 * std::pow(M_PI, 0.5 * d)) * std::pow(b, -(d - 2));
  const double k = bessel_k(nu, a * b).value;
  return 2.0 / std::pow(2.0 * M_PI, 0.5 * d) * std::pow(a / b, nu) * k;
}

double a_phi(double phi, int d) {
  if (!(phi >= 0.0)) throw Error(errc::validation, "a_phi requires phi >= 0", {{"phi", phi}});
  if (d < 1) throw Error(errc::validation, "a_phi requires d >= 1", {{"d", static_cast<double>(d)}});
  if (phi == 0.0) return 2.0;  // 2 Gamma(1) Gamma(d/2) / Gamma(d/2)
  return std::exp((phi + 1.0) * std::log(2.0) + std::lgamma(0.5 * (phi + 2.0)) +
                  std::lgamma(0.5 * (phi + d)) - std::lgamma(0.5 * d));
}

double envelope(const VecD& x, const VecD& eta) {
  const int d = static_cast<int>(x.size());
  const double r = norm2(x);
  if (!(r > 0.0)) throw Error(errc::validation, "envelope requires x != 0");
  const double drift = norm2(eta);
  return std::pow(std::max(drift, 1.0 / r), 0.5 * (d - 3)) / std::pow(r, 0.5 * (d - 1));
}

}  // namespace ozlab::brownian
