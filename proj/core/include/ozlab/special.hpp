#pragma once

// Small in-repo special-function layer: Riemann zeta for real arguments and
// the polylogarithm Li_s(e^{-delta}) needed by the power-law-tail kernels.
// No external special-function dependency is assumed anywhere in the library.

namespace ozlab::special {

// Riemann zeta for real s != 1, via Hasse's globally convergent double sum.
double riemann_zeta(double s);

// Li_s(e^{-delta}) for delta >= 0.
//
//   delta >= ln 2       direct series sum_k e^{-k delta} / k^s
//   delta <  ln 2       Erdelyi expansion about delta = 0:
//                         Gamma(1-s) delta^{s-1} + sum_k zeta(s-k)(-delta)^k/k!
//                       with the usual log-term replacement when s is a
//                       positive integer (the Gamma pole cancels zeta(1)).
//
// At delta = 0 the value is zeta(s) for s > 1 and +infinity otherwise.
double polylog_exp_neg(double s, double delta);

// Li_s(w) for w in (0,1]; thin wrapper over polylog_exp_neg.
double polylog(double s, double w);

}  // namespace ozlab::special
