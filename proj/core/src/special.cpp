#include "ozlab/special.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ozlab/common.hpp"

namespace ozlab::special {

namespace {

constexpr double kLn2 = 0.6931471805599453;

bool is_integer(double s, long long& n) {
  double r = std::nearbyint(s);
  if (std::abs(s - r) < 1e-12) {
    n = static_cast<long long>(r);
    return true;
  }
  return false;
}

}  // namespace

double riemann_zeta(double s) {
  if (s == 1.0) return std::numeric_limits<double>::infinity();
  if (s == 0.0) return -0.5;
  if (s < 0.5) {
    // reflect to the convergent half-plane; Hasse cancels catastrophically
    // for very negative arguments
    return std::pow(2.0, s) * std::pow(M_PI, s - 1.0) * std::sin(0.5 * M_PI * s) *
           std::tgamma(1.0 - s) * riemann_zeta(1.0 - s);
  }
  // Hasse (1930): zeta(s) = 1/(1-2^{1-s}) sum_n 2^{-(n+1)} sum_k (-1)^k C(n,k) (k+1)^{-s}
  const int kMaxRows = 96;
  KahanSum<> total;
  std::vector<double> binom(1, 1.0);
  for (int n = 0; n < kMaxRows; ++n) {
    KahanSum<> row;
    for (int k = 0; k <= n; ++k) {
      double term = binom[static_cast<std::size_t>(k)] * std::pow(static_cast<double>(k + 1), -s);
      row.add((k % 2 == 0) ? term : -term);
    }
    double contrib = std::ldexp(row.value(), -(n + 1));
    total.add(contrib);
    if (n > 24 && std::abs(contrib) < 1e-18 * (1.0 + std::abs(total.value()))) break;
    // next binomial row
    binom.push_back(0.0);
    for (int k = n + 1; k > 0; --k) binom[static_cast<std::size_t>(k)] += binom[static_cast<std::size_t>(k - 1)];
  }
  return total.value() / (1.0 - std::pow(2.0, 1.0 - s));
}

double polylog_exp_neg(double s, double delta) {
  if (delta < 0.0)
    throw Error(errc::validation, "polylog_exp_neg requires delta >= 0", {{"delta", delta}});
  if (delta == 0.0) {
    if (s > 1.0) return riemann_zeta(s);
    return std::numeric_limits<double>::infinity();
  }

  long long n = 0;
  if (is_integer(s, n) && n == 1) return -std::log1p(-std::exp(-delta));

  if (delta >= kLn2) {
    // direct series, ratio e^{-delta} <= 1/2
    const double w = std::exp(-delta);
    KahanSum<> sum;
    double wk = 1.0;
    for (int k = 1; k < 8192; ++k) {
      wk *= w;
      double term = wk * std::pow(static_cast<double>(k), -s);
      sum.add(term);
      if (k > 8 && std::abs(term) < 1e-18 * (1.0 + std::abs(sum.value()))) break;
    }
    return sum.value();
  }

  // Expansion about delta = 0 (valid since delta < ln 2 < 2*pi).
  const int kTerms = 72;
  KahanSum<> sum;
  if (is_integer(s, n) && n >= 2) {
    // Li_n(e^{-d}) = (-d)^{n-1}/(n-1)! (H_{n-1} - ln d) + sum_{k != n-1} zeta(n-k)(-d)^k/k!
    double harmonic = 0.0;
    double fact = 1.0;
    for (long long j = 1; j <= n - 1; ++j) {
      harmonic += 1.0 / static_cast<double>(j);
      fact *= static_cast<double>(j);
    }
    sum.add(std::pow(-delta, static_cast<double>(n - 1)) / fact * (harmonic - std::log(delta)));
    double dk = 1.0;  // (-delta)^k / k!
    int small_run = 0;
    for (int k = 0; k < kTerms && small_run < 2; ++k) {
      if (k != n - 1) {
        double term = riemann_zeta(static_cast<double>(n - k)) * dk;
        sum.add(term);
        // zeta vanishes at negative even integers; require two consecutive
        // negligible terms before stopping
        small_run = (k > 8 && std::abs(term) < 1e-18 * (1.0 + std::abs(sum.value())))
                        ? small_run + 1
                        : 0;
      }
      dk *= -delta / (k + 1);
    }
    return sum.value();
  }

  sum.add(std::tgamma(1.0 - s) * std::pow(delta, s - 1.0));
  double dk = 1.0;
  int small_run = 0;
  for (int k = 0; k < kTerms && small_run < 2; ++k) {
    double term = riemann_zeta(s - k) * dk;
    sum.add(term);
    small_run = (k > 8 && std::abs(term) < 1e-18 * (1.0 + std::abs(sum.value()))) ? small_run + 1
                                                                                  : 0;
    dk *= -delta / (k + 1);
  }
  return sum.value();
}

double polylog(double s, double w) {
  if (!(w > 0.0) || w > 1.0)
    throw Error(errc::validation, "polylog requires w in (0,1]", {{"w", w}});
  return polylog_exp_neg(s, -std::log(w));
}

}  // namespace ozlab::special
