#include "ozlab/wulff.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

namespace ozlab::wulff {

namespace {

// Per-direction solves are independent; split the index range over the
// thread cap and write results by index, so the output order is fixed.
template <typename Fn>
void parallel_for_index(int n, Fn&& fn) {
  const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (int i = static_cast<int>(w); i < n; i += static_cast<int>(workers)) fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

double boundary_value(const Kernel& kernel, double z, const TiltVector& mu) {
  return tilted_transform(kernel, z, mu, VecD(mu.size(), 0.0)).real();
}

// Canonicalization: map x into the closed positive orthant with coordinates
// sorted decreasingly.  One solve then serves the whole symmetry orbit and
// outputs are exactly symmetric.
struct Canon {
  std::vector<int> perm;  // canonical[j] = |x[perm[j]]|, sorted decreasing
  std::vector<int> sign;
  VecD x;

  explicit Canon(const VecD& x_in) {
    const int d = static_cast<int>(x_in.size());
    perm.resize(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
      return std::abs(x_in[static_cast<std::size_t>(a)]) > std::abs(x_in[static_cast<std::size_t>(b)]);
    });
    sign.resize(static_cast<std::size_t>(d));
    x.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const double v = x_in[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
      sign[static_cast<std::size_t>(j)] = v < 0.0 ? -1 : 1;
      x[static_cast<std::size_t>(j)] = std::abs(v);
    }
  }

  VecD restore(const VecD& canonical) const {
    VecD out(canonical.size());
    for (std::size_t j = 0; j < canonical.size(); ++j)
      out[static_cast<std::size_t>(perm[j])] = sign[j] * canonical[j];
    return out;
  }
};

}  // namespace

double mass(const Kernel& kernel, double z) {
  if (!(z > 0.0) || z >= 1.0)
    throw Error(errc::validation, "mass requires z in (0,1)", {{"z", z}});
  const int d = kernel.dimension();
  auto f = [&](double m) {
    TiltVector mu(static_cast<std::size_t>(d), 0.0);
    mu[0] = m;
    return boundary_value(kernel, z, mu) - 1.0;
  };
  auto fprime = [&](double m) {
    TiltVector mu(static_cast<std::size_t>(d), 0.0);
    mu[0] = m;
    return moments(kernel, z, mu).eta[0];
  };

  double lo = 0.0, hi;
  if (kernel.has_tail()) {
    // Omega = (-m, m) with m <= 1; no root when z < z_sat = 1/J^(e_1)(0).
    const double f1 = f(1.0);
    if (f1 < -1e-12)
      throw Error(errc::saturated, "z below z_sat: mass saturates at the tail rate",
                  {{"z", z}, {"mass", 1.0}, {"boundary_value", f1 + 1.0}});
    if (f1 < 0.0) return 1.0;  // grazing the boundary within the root tolerance
    hi = 1.0;
  } else {
    hi = 1.0;
    while (f(hi) <= 0.0) {
      hi *= 2.0;
      if (hi > 1e4)
        throw Error(errc::solver_failure, "mass bracket not found", {{"z", z}, {"hi", hi}});
    }
  }

  // safeguarded Newton within [lo, hi]
  double m = 0.5 * (lo + hi);
  double fm = f(m);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fm) < 1e-13) return m;
    if (fm > 0.0)
      hi = m;
    else
      lo = m;
    const double df = fprime(m);
    double next = df > 0.0 ? m - fm / df : lo;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    m = next;
    fm = f(m);
  }
  if (std::abs(fm) < 1e-11) return m;  // tail kernels near m = 1 have a vertical tangent
  throw Error(errc::solver_failure, "mass Newton did not converge", {{"z", z}, {"residual", fm}});
}

double boundary_radius(const Kernel& kernel, double z, const VecD& direction) {
  const double m = mass(kernel, z);
  const double n1 = norm1(direction), ninf = norm_inf(direction);
  if (!(ninf > 0.0)) throw Error(errc::validation, "boundary_radius requires a nonzero direction");
  // the l1/linf inclusions bracket the radius
  double lo = m / n1 * (1.0 - 1e-12), hi = m / ninf * (1.0 + 1e-12);
  auto f = [&](double r) {
    TiltVector mu(direction.size());
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] = r * direction[j];
    return boundary_value(kernel, z, mu) - 1.0;
  };
  double flo = f(lo);
  if (flo > 0.0) return lo;  // direction along an axis: lo is already the root
  double r = 0.5 * (lo + hi);
  double fr = f(r);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fr) < 1e-14) break;
    if (fr > 0.0)
      hi = r;
    else
      lo = r;
    // Newton using the directional derivative of the level function
    TiltVector mu(direction.size());
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] = r * direction[j];
    const Moments mom = moments(kernel, z, mu);
    const double df = dot(mom.eta, direction);
    double next = df > 0.0 ? r - fr / df : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    r = next;
    fr = f(r);
  }
  return r;
}

TiltReport optimal_tilt(const Kernel& kernel, double z, const VecD& x) {
  const int d = kernel.dimension();
  if (static_cast<int>(x.size()) != d)
    throw Error(errc::validation, "optimal_tilt: x dimension mismatch");
  const double xnorm = norm2(x);
  if (!(xnorm > 0.0)) throw Error(errc::validation, "optimal_tilt requires x != 0");

  TiltReport report;
  report.mass = mass(kernel, z);
  report.direction.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) report.direction[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] / xnorm;

  // z -> 1 limit: the Lagrange system degenerates (mu -> 0, lambda -> 0);
  // the norm limit is Euclidean, return it with a quality warning.
  if (!kernel.has_tail() && 1.0 - z < 1e-8) {
    report.warning = "z within 1e-8 of the critical point: returning the Euclidean-norm limit";
    report.mu.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      report.mu[static_cast<std::size_t>(j)] = report.mass * report.direction[static_cast<std::size_t>(j)];
    report.norm_value = xnorm;
    const Moments mom = moments(kernel, z, report.mu);
    report.lagrange_multiplier = norm2(mom.eta) / xnorm;
    report.boundary_residual = mom.value - 1.0;
    report.hessian_min_eig = mom.lambda.min_eigenvalue_bound();
    return report;
  }

  Canon canon(x);
  VecD unit(canon.x);
  for (double& v : unit) v /= xnorm;

  // initial tilt: radial projection of the direction onto the boundary
  const double r0 = boundary_radius(kernel, z, unit);
  VecD mu(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) mu[static_cast<std::size_t>(j)] = r0 * unit[static_cast<std::size_t>(j)];
  Moments mom = moments(kernel, z, mu);
  double lambda = norm2(mom.eta) / norm2(canon.x);

  auto residual = [&](const Moments& m, double lam) {
    VecD r(static_cast<std::size_t>(d) + 1);
    r[0] = m.value - 1.0;
    for (int j = 0; j < d; ++j)
      r[static_cast<std::size_t>(j) + 1] =
          m.eta[static_cast<std::size_t>(j)] - lam * canon.x[static_cast<std::size_t>(j)];
    return r;
  };

  VecD res = residual(mom, lambda);
  double res_norm = norm2(res);
  int iterations = 0;
  for (; iterations < 200 && res_norm >= 1e-12; ++iterations) {
    // assemble the (d+1)x(d+1) Jacobian:  [ eta^T  0 ; Lambda  -x ]
    const int n = d + 1;
    std::vector<double> jac(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < d; ++j) jac[static_cast<std::size_t>(j)] = mom.eta[static_cast<std::size_t>(j)];
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j)
        jac[static_cast<std::size_t>(i + 1) * n + j] = mom.lambda(i, j);
      jac[static_cast<std::size_t>(i + 1) * n + d] = -canon.x[static_cast<std::size_t>(i)];
    }
    // uniqueness relies on strict convexity; assert the Hessian block is SPD
    mom.lambda.cholesky();

    VecD rhs(res);
    for (double& v : rhs) v = -v;
    VecD step = solve_dense(jac, rhs);

    double t = 1.0;
    while (t > 1e-12) {
      VecD mu_try(mu);
      for (int j = 0; j < d; ++j) mu_try[static_cast<std::size_t>(j)] += t * step[static_cast<std::size_t>(j)];
      const double lambda_try = lambda + t * step[static_cast<std::size_t>(d)];
      Moments mom_try;
      bool ok = true;
      try {
        mom_try = moments(kernel, z, mu_try);
      } catch (const Error&) {
        ok = false;  // stepped past a tail-kernel domain wall; damp harder
      }
      if (ok) {
        VecD res_try = residual(mom_try, lambda_try);
        const double rn = norm2(res_try);
        if (rn < res_norm) {
          mu = std::move(mu_try);
          lambda = lambda_try;
          mom = std::move(mom_try);
          res = std::move(res_try);
          res_norm = rn;
          break;
        }
      }
      t *= 0.5;
    }
    if (t <= 1e-12)
      throw Error(errc::solver_failure, "optimal_tilt: damped Newton stalled",
                  {{"residual", res_norm}, {"iterations", static_cast<double>(iterations)}});
  }
  if (res_norm >= 1e-12)
    throw Error(errc::solver_failure, "optimal_tilt: Newton did not converge in 200 steps",
                {{"residual", res_norm}});

  report.mu = canon.restore(mu);
  report.lagrange_multiplier = lambda;
  report.iterations = iterations;
  report.boundary_residual = mom.value - 1.0;
  report.hessian_min_eig = mom.lambda.min_eigenvalue_bound();
  report.norm_value = dot(report.mu, x) / report.mass;

  // gradient alignment: eta(mu) must point along x-hat
  const Moments check = moments(kernel, z, report.mu);
  const double eta_norm = norm2(check.eta);
  double ortho2 = 0.0;
  const double proj = dot(check.eta, report.direction);
  for (int j = 0; j < d; ++j) {
    const double r = check.eta[static_cast<std::size_t>(j)] - proj * report.direction[static_cast<std::size_t>(j)];
    ortho2 += r * r;
  }
  report.alignment_sine = eta_norm > 0.0 ? std::sqrt(ortho2) / eta_norm : 0.0;
  return report;
}

double norm(const Kernel& kernel, double z, const VecD& x) {
  if (norm2(x) == 0.0) return 0.0;
  return optimal_tilt(kernel, z, x).norm_value;
}

DriftCov drift_cov(const Kernel& kernel, double z, const VecD& x) {
  const TiltReport tilt = optimal_tilt(kernel, z, x);
  const Moments mom = moments(kernel, z, tilt.mu);
  DriftCov out;
  out.eta = mom.eta;
  out.lambda = mom.lambda;
  out.a2 = mom.lambda.quad_form(mom.eta);
  out.b2 = mom.lambda.quad_form(x);
  out.w2 = mom.lambda.quad_form(tilt.direction);
  return out;
}

std::vector<PolylinePoint> wulff_boundary(const Kernel& kernel, double z, int n_samples) {
  if (kernel.dimension() != 2)
    throw Error(errc::validation, "wulff_boundary is d = 2 only",
                {{"d", static_cast<double>(kernel.dimension())}});
  if (n_samples < 8) throw Error(errc::validation, "wulff_boundary requires n_samples >= 8");
  mass(kernel, z);  // surface infeasible z before the parallel section
  std::vector<PolylinePoint> out(static_cast<std::size_t>(n_samples) + 1);
  parallel_for_index(n_samples, [&](int i) {
    const double theta = 2.0 * M_PI * i / n_samples;
    const VecD u{std::cos(theta), std::sin(theta)};
    const double r = boundary_radius(kernel, z, u);
    out[static_cast<std::size_t>(i)] = {theta, r * u[0], r * u[1]};
  });
  out.back() = {2.0 * M_PI, out.front().v1, out.front().v2};
  return out;
}

std::vector<PolylinePoint> norm_ball(const Kernel& kernel, double z, int n_samples) {
  if (kernel.dimension() != 2)
    throw Error(errc::validation, "norm_ball is d = 2 only",
                {{"d", static_cast<double>(kernel.dimension())}});
  if (n_samples < 8) throw Error(errc::validation, "norm_ball requires n_samples >= 8");
  mass(kernel, z);
  std::vector<PolylinePoint> out(static_cast<std::size_t>(n_samples) + 1);
  parallel_for_index(n_samples, [&](int i) {
    const double theta = 2.0 * M_PI * i / n_samples;
    const VecD u{std::cos(theta), std::sin(theta)};
    const double r = 1.0 / norm(kernel, z, u);
    out[static_cast<std::size_t>(i)] = {theta, r * u[0], r * u[1]};
  });
  out.back() = {2.0 * M_PI, out.front().v1, out.front().v2};
  return out;
}

double closed_form_norm_nn(double z, const VecD& x) {
  const int d = static_cast<int>(x.size());
  if (!(z > 0.0) || z >= 1.0) throw Error(errc::validation, "closed_form_norm_nn requires z in (0,1)");
  const double xmax = norm_inf(x);
  if (!(xmax > 0.0)) return 0.0;
  // sum_j sqrt(1 + (d lam x_j / z)^2) = d/z, strictly increasing in lam
  auto lhs = [&](double lam) {
    KahanSum<> s;
    for (double xj : x) {
      const double t = d * lam * xj / z;
      s.add(std::sqrt(1.0 + t * t));
    }
    return s.value();
  };
  const double target = d / z;
  double lo = 0.0, hi = 1.0 / xmax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-17 * hi) break;
  }
  const double lam = 0.5 * (lo + hi);
  const double m = std::acosh(1.0 + (d / z) * (1.0 - z));
  KahanSum<> s;
  for (double xj : x) s.add(xj * std::asinh(d * lam * xj / z));
  return s.value() / m;
}

double closed_form_norm_linf(double z, const VecD& x) {
  const int d = static_cast<int>(x.size());
  if (!(z > 0.0) || z >= 1.0) throw Error(errc::validation, "closed_form_norm_linf requires z in (0,1)");
  const double xmax = norm_inf(x);
  if (!(xmax > 0.0)) return 0.0;
  // prod_j (1 + sqrt(4 - 3 u_j^2)) / (1 - u_j^2) = 3^d / z with u_j = lam x_j
  const double log_target = d * std::log(3.0) - std::log(z);
  auto log_lhs = [&](double lam) {
    KahanSum<> s;
    for (double xj : x) {
      const double u2 = lam * lam * xj * xj;
      s.add(std::log1p(std::sqrt(4.0 - 3.0 * u2)) - std::log1p(-u2));
    }
    return s.value();
  };
  double lo = 0.0, hi = (1.0 - 1e-16) / xmax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_lhs(mid) < log_target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-17 * hi) break;
  }
  const double lam = 0.5 * (lo + hi);
  const double m = std::acosh((3.0 - z) / (2.0 * z));
  KahanSum<> s;
  for (double xj : x) {
    const double u2 = lam * lam * xj * xj;
    const double c = (u2 + std::sqrt(4.0 - 3.0 * u2)) / (2.0 * (1.0 - u2));
    // mu_j carries the sign of x_j, so x_j mu_j = |x_j| arccosh(...)
    s.add(std::abs(xj) * std::acosh(std::max(1.0, c)));
  }
  return s.value() / m;
}

MonotonicityScan monotonicity_scan(const Kernel& kernel, const VecD& x, const VecD& z_grid) {
  MonotonicityScan scan;
  scan.values.reserve(z_grid.size());
  for (double z : z_grid) scan.values.emplace_back(z, norm(kernel, z, x));
  // witness: a monotone map keeps every interior value between the endpoint
  // values; the l2/linf floors cover the exact z -> 1 and box-hull z -> 0
  // limits of the endpoints
  scan.threshold = std::max(norm_inf(x), norm2(x));
  if (!scan.values.empty())
    scan.threshold =
        std::max({scan.threshold, scan.values.front().second, scan.values.back().second});
  for (std::size_t i = 1; i + 1 < scan.values.size(); ++i) {
    if (scan.values[i].second > scan.threshold + 1e-9) {
      scan.flagged = true;
      scan.flagged_z.push_back(scan.values[i].first);
    }
  }
  return scan;
}

}  // namespace ozlab::wulff
