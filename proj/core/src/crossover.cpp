#include "ozlab/crossover.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <map>
#include <numeric>

#include "ozlab/brownian.hpp"

namespace ozlab::crossover {

namespace {

bool is_nn_1d(const Kernel& kernel) {
  return kernel.dimension() == 1 && !kernel.has_tail() && kernel.pairs().size() == 1 &&
         kernel.pairs()[0].y == LatticePoint{1} && std::abs(kernel.pairs()[0].w - 0.5) < 1e-15 &&
         kernel.origin_weight() == 0.0;
}

LatticePoint reduced_direction(const LatticePoint& x) {
  long long g = 0;
  for (int v : x) g = std::gcd(g, static_cast<long long>(std::abs(v)));
  LatticePoint out(x);
  if (g > 1)
    for (int& v : out) v = static_cast<int>(v / g);
  return out;
}

struct OracleContext {
  const Kernel& kernel;
  double z;
  PredictOptions options;
  const lattice::GreenTable* table = nullptr;  // may be null (memory cap)
  bool exact = false;

  lattice::GreenEval value(const LatticePoint& x) const {
    if (exact) return lattice::green_exact_1d_nn(z, x[0]);
    if (table) {
      lattice::GreenEval eval = table->eval(x);
      if (eval.error_estimate <= options.oracle_rel_cap * std::abs(eval.value)) return eval;
    }
    // quadrature fallback; refine toward a relative target from its own value
    lattice::GreenEval q = lattice::green_quadrature(kernel, z, x, options.n_grid);
    const double target = std::max(1e-15, options.oracle_rel_cap * std::abs(q.value));
    if (q.error_estimate > target && options.n_grid == 0)
      q = lattice::green_quadrature(kernel, z, x, 0, target);
    if (!(q.error_estimate <= options.oracle_rel_cap * std::abs(q.value)))
      throw Error(errc::quadrature,
                  "no oracle can certify S_z(x) at this point (value below numerical noise)",
                  {{"value", q.value}, {"error", q.error_estimate}});
    return q;
  }
};

OracleContext make_oracle(const Kernel& kernel, double z, const std::vector<LatticePoint>& points,
                          const PredictOptions& options, lattice::GreenTable& storage,
                          bool& have_table) {
  OracleContext ctx{kernel, z, options, nullptr, false};
  ctx.exact = is_nn_1d(kernel);
  have_table = false;
  if (ctx.exact) return ctx;
  int radius = 0;
  for (const auto& x : points) radius = std::max(radius, norm_inf_int(x));
  try {
    lattice::SeriesOptions series;
    series.tol = options.oracle_tol;
    storage = lattice::green_series_box(kernel, z, radius, series);
    have_table = true;
    ctx.table = &storage;
  } catch (const Error& e) {
    if (e.code() != errc::memory_cap) throw;
  }
  return ctx;
}

struct TiltCache {
  const Kernel& kernel;
  double z;
  std::map<LatticePoint, wulff::TiltReport> memo;

  const wulff::TiltReport& get(const LatticePoint& x) {
    const LatticePoint key = reduced_direction(x);
    auto it = memo.find(key);
    if (it == memo.end())
      it = memo.emplace(key, wulff::optimal_tilt(kernel, z, to_vecd(key))).first;
    return it->second;
  }
};

CrossoverRow predict_with(const Kernel& kernel, double z, const LatticePoint& x,
                          const PredictOptions& options, const wulff::TiltReport& tilt,
                          const lattice::GreenEval& oracle) {
  const int d = kernel.dimension();
  const VecD xv = to_vecd(x);
  const double norm_x = dot(tilt.mu, xv) / tilt.mass;
  if (d <= 2 && tilt.mass * norm2(xv) < options.s0)
    throw Error(errc::validation, "d <= 2 requires m_z ||x|| >= s0",
                {{"m_x", tilt.mass * norm2(xv)}, {"s0", options.s0}});
  const Moments mom = moments(kernel, z, tilt.mu);
  const double c = brownian::brownian_green(xv, mom.eta, mom.lambda);
  CrossoverRow row;
  row.x = x;
  row.oracle = oracle.value;
  row.oracle_method = oracle.method;
  row.oracle_error = oracle.error_estimate;
  row.mass_times_norm = tilt.mass * norm_x;
  row.prediction = c * std::exp(-row.mass_times_norm);  // g^(mu)(0) = 1 for random walk
  row.ratio = row.oracle / row.prediction;
  return row;
}

}  // namespace

CrossoverRow predict(const Kernel& kernel, double z, const LatticePoint& x,
                     const PredictOptions& options) {
  return crossover_table(kernel, z, {x}, options).front();
}

std::vector<CrossoverRow> crossover_table(const Kernel& kernel, double z,
                                          const std::vector<LatticePoint>& points,
                                          const PredictOptions& options) {
  if (points.empty()) return {};
  for (const auto& x : points)
    if (norm_inf_int(x) == 0)
      throw Error(errc::validation, "crossover prediction requires x != 0");

  // resolve tilts and check the d <= 2 cutoff before any oracle work
  TiltCache tilts{kernel, z, {}};
  if (kernel.dimension() <= 2) {
    for (const auto& x : points) {
      const wulff::TiltReport& tilt = tilts.get(x);
      if (tilt.mass * norm2(to_vecd(x)) < options.s0)
        throw Error(errc::validation, "d <= 2 requires m_z ||x|| >= s0",
                    {{"m_x", tilt.mass * norm2(to_vecd(x))}, {"s0", options.s0}});
    }
  }

  lattice::GreenTable storage;
  bool have_table = false;
  OracleContext oracle = make_oracle(kernel, z, points, options, storage, have_table);

  // dual-oracle consistency on the overlap (up to 3 certified points)
  if (have_table) {
    int checked = 0;
    for (const auto& x : points) {
      if (checked >= 3) break;
      lattice::GreenEval s = storage.eval(x);
      if (s.error_estimate > options.oracle_rel_cap * std::abs(s.value)) continue;
      lattice::GreenEval q = lattice::green_quadrature(
          kernel, z, x, options.n_grid, std::max(1e-14, 0.1 * s.error_estimate));
      if (std::abs(s.value - q.value) > s.error_estimate + q.error_estimate)
        throw Error(errc::solver_failure, "oracle mismatch: series vs quadrature disagree",
                    {{"series", s.value},
                     {"quadrature", q.value},
                     {"combined_tolerance", s.error_estimate + q.error_estimate}});
      ++checked;
    }
  }

  // rows are independent; prefill the direction memo so workers only read it
  for (const auto& x : points) tilts.get(x);
  std::vector<CrossoverRow> rows(points.size());
  const unsigned workers =
      std::min<unsigned>(thread_cap(), static_cast<unsigned>(points.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i)
      rows[i] = predict_with(kernel, z, points[i], options, tilts.get(points[i]),
                             oracle.value(points[i]));
  } else {
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < points.size(); i += workers)
          rows[i] = predict_with(kernel, z, points[i], options, tilts.get(points[i]),
                                 oracle.value(points[i]));
      }));
    }
    for (auto& f : futures) f.get();  // worker exceptions rethrow here
  }
  return rows;
}

double oz_asymptote(const Kernel& kernel, double z, const LatticePoint& x) {
  const int d = kernel.dimension();
  const VecD xv = to_vecd(x);
  const wulff::TiltReport tilt = wulff::optimal_tilt(kernel, z, xv);
  const Moments mom = moments(kernel, z, tilt.mu);
  const double det = mom.lambda.determinant();
  const double w2 = mom.lambda.quad_form(tilt.direction);
  const double eta_norm = norm2(mom.eta);
  const double r = norm2(xv);
  const double prefactor = 1.0 / (std::pow(2.0 * M_PI, 0.5 * (d - 1)) * std::sqrt(det)) /
                           std::sqrt(w2) * std::pow(eta_norm, 0.5 * (d - 3)) /
                           std::pow(r, 0.5 * (d - 1));
  return prefactor * std::exp(-tilt.mass * tilt.norm_value);
}

EnvelopeReport envelope_check(const Kernel& kernel, double z,
                              const std::vector<LatticePoint>& points,
                              const PredictOptions& options) {
  const int d = kernel.dimension();
  lattice::GreenTable storage;
  bool have_table = false;
  OracleContext oracle = make_oracle(kernel, z, points, options, storage, have_table);
  TiltCache tilts{kernel, z, {}};

  EnvelopeReport report;
  report.points = points;
  for (const auto& x : points) {
    const wulff::TiltReport& tilt = tilts.get(x);
    const VecD xv = to_vecd(x);
    const double nx = dot(tilt.mu, xv) / tilt.mass;  // |x|_z
    const double mx = tilt.mass * nx;
    double env;
    if (d > 2)
      env = std::pow(std::max(1.0, mx), 0.5 * (d - 3)) / std::pow(nx, d - 2) * std::exp(-mx);
    else
      env = std::exp(-mx) / (std::pow(tilt.mass, 0.5 * (3 - d)) * std::pow(nx, 0.5 * (d - 1)));
    report.ratios.push_back(oracle.value(x).value / env);
  }
  auto [mn, mx] = std::minmax_element(report.ratios.begin(), report.ratios.end());
  report.min_ratio = *mn;
  report.max_ratio = *mx;
  report.spread = *mx / *mn;
  return report;
}

std::vector<CriticalDecayRow> critical_decay_check(const Kernel& kernel,
                                                   const std::vector<double>& z_list, double s,
                                                   const PredictOptions& options) {
  const int d = kernel.dimension();
  if (d <= 2)
    throw Error(errc::validation, "critical_decay_check requires d > 2",
                {{"d", static_cast<double>(d)}});
  if (!(s > 0.0)) throw Error(errc::validation, "critical_decay_check requires s > 0");
  std::vector<CriticalDecayRow> rows;
  for (double z : z_list) {
    const double m = wulff::mass(kernel, z);
    const long long n = std::max<long long>(1, std::llround(s / m));
    LatticePoint x(static_cast<std::size_t>(d), 0);
    x[0] = static_cast<int>(n);
    CriticalDecayRow row;
    row.z = z;
    row.n = n;
    row.s_actual = m * static_cast<double>(n);  // |n e_1|_z = n on the axis
    // oracle: quadrature handles z near 1 effortlessly (error ~ e^{-m(n_grid-n)})
    lattice::GreenEval oracle = lattice::green_quadrature(kernel, z, x, options.n_grid);
    const double target = std::max(1e-15, options.oracle_rel_cap * std::abs(oracle.value));
    if (oracle.error_estimate > target && options.n_grid == 0)
      oracle = lattice::green_quadrature(kernel, z, x, 0, target);
    row.oracle = oracle.value;
    const Moments mom = moments(kernel, z, VecD(static_cast<std::size_t>(d), 0.0));
    double sigma2 = 0.0;
    for (int j = 0; j < d; ++j) sigma2 += mom.lambda(j, j);
    VecD xhat(static_cast<std::size_t>(d), 0.0);
    xhat[0] = 1.0;
    row.limit_value = d / (sigma2 * std::pow(static_cast<double>(n), d - 2)) *
                      brownian::massive_green(row.s_actual, xhat);
    row.ratio = row.oracle / row.limit_value;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Noncentred Gaussian Lemma verification
// ---------------------------------------------------------------------------

namespace {

int ncgl_default_grid(int d) {
  switch (d) {
    case 1: return 1 << 14;
    case 2: return 512;
    case 3: return 128;
    default: return 48;
  }
}

// continuum completion int_T^inf rho_t(x; eta, Lambda) dt by log-substituted
// trapezoid (integrand decays at both ends after t = T e^u)
double green_time_tail(const VecD& x, const VecD& eta, const SpdMatrix& lambda, double t0) {
  KahanSum<> sum;
  const double h = 0.03125;
  double peak = -1.0;
  for (int i = 0;; ++i) {
    const double u = h * i;
    const double t = t0 * std::exp(u);
    const double v = brownian::heat_kernel(t, x, eta, lambda) * t;  // du-measure
    sum.add(v);
    peak = std::max(peak, v);
    if (i > 16 && v < 1e-22 * peak) break;
    if (i > 200000) break;
  }
  return sum.value() * h;
}

}  // namespace

NcglReport ncgl_verify(const Kernel& kernel, double z, const TiltVector& mu,
                       const std::vector<LatticePoint>& points, const NcglOptions& options) {
  const int d = kernel.dimension();
  if (points.empty()) throw Error(errc::validation, "ncgl_verify requires at least one point");
  const Moments mom = moments(kernel, z, mu);
  const VecD& eta = mom.eta;
  const double eta_norm = norm2(eta);

  // x must be aligned with eta (eta = 0 permitted); d <= 2 needs |x||eta| >= s0
  for (const auto& x : points) {
    const VecD xv = to_vecd(x);
    const double r = norm2(xv);
    if (!(r > 0.0)) throw Error(errc::validation, "ncgl_verify requires x != 0");
    if (eta_norm > 0.0) {
      const double cosine = dot(eta, xv) / (eta_norm * r);
      if (cosine < 1.0 - 1e-9)
        throw Error(errc::validation, "ncgl_verify requires x parallel to eta(mu)",
                    {{"cosine", cosine}});
    }
    if (d <= 2 && r * eta_norm < options.s0)
      throw Error(errc::validation, "d <= 2 requires |x||eta| >= s0",
                  {{"x_eta", r * eta_norm}, {"s0", options.s0}});
  }

  int n = options.n_grid ? options.n_grid : ncgl_default_grid(d);
  if ((n & (n - 1)) != 0 || n < 8)
    throw Error(errc::validation, "ncgl n_grid must be a power of two >= 8");

  const double lam_max = [&] {
    double m = 0.0;
    for (int j = 0; j < d; ++j) m = std::max(m, mom.lambda(j, j));
    return m;
  }();

  // time cap: stop before any periodic image of the drift Gaussian focuses.
  int max_xinf = 0;
  for (const auto& x : points) max_xinf = std::max(max_xinf, norm_inf_int(x));
  const double image_dist = static_cast<double>(n - max_xinf);
  double t_cap;
  if (eta_norm > 1e-12) {
    const double t_img = image_dist / eta_norm;
    const double sigma_img = std::sqrt(t_img * lam_max) / eta_norm;
    t_cap = t_img - 5.0 * sigma_img;
    if (!(t_cap > 0.0))
      throw Error(errc::quadrature, "ncgl grid too small for the drift and |x|",
                  {{"n_grid", static_cast<double>(n)}, {"image_distance", image_dist}});
  } else {
    // diffusive case: images suppressed while (dist)^2/(2 t lambda) >= 12
    t_cap = image_dist * image_dist / (24.0 * lam_max);
  }

  // one torus pass: per mode, int_0^T e^{-t D(k)} dt = (1 - e^{-T D})/D exactly
  std::vector<long double> c2(static_cast<std::size_t>(2 * n)), s2(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < 2 * n; ++i) {
    const long double a = static_cast<long double>(M_PI) * i / n;
    c2[static_cast<std::size_t>(i)] = cosl(a);
    s2[static_cast<std::size_t>(i)] = sinl(a);
  }
  const Kernel snapshot = kernel.materialized(1e-15);  // finite support for tail kernels
  const auto& pairs = snapshot.pairs();
  const int np = static_cast<int>(pairs.size());
  // J^(mu)(0) from the same finite snapshot so the k = 0 mode is consistent
  KahanSum<long double> j0sum;
  j0sum.add(snapshot.origin_weight());
  std::vector<double> pair_cosh(static_cast<std::size_t>(np)), pair_sinh(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) {
    double a = 0.0;
    for (int j = 0; j < d; ++j) a += mu[static_cast<std::size_t>(j)] * pairs[static_cast<std::size_t>(p)].y[static_cast<std::size_t>(j)];
    pair_cosh[static_cast<std::size_t>(p)] = 2.0 * pairs[static_cast<std::size_t>(p)].w * std::cosh(a);
    pair_sinh[static_cast<std::size_t>(p)] = 2.0 * pairs[static_cast<std::size_t>(p)].w * std::sinh(a);
    j0sum.add(pair_cosh[static_cast<std::size_t>(p)]);
  }
  const long double j_mu_0 = static_cast<long double>(z) * j0sum.value();

  const std::size_t n_points = points.size();
  std::vector<KahanSum<long double>> acc(n_points);
  // midpoint grid k_j = -pi + (i_j + 1/2) 2pi/n avoids k = 0 exactly;
  // phases index the 2n-table: k.y = pi * [sum (2 i_j + 1) y_j] / n  (mod 2pi)
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  const long double T = t_cap;
  while (true) {
    long double re = j_mu_0, im = 0.0;  // D(k)-part: J^mu(0) - J^mu(k)
    for (int p = 0; p < np; ++p) {
      long long dotv = 0;
      for (int j = 0; j < d; ++j)
        dotv += static_cast<long long>(2 * idx[static_cast<std::size_t>(j)] + 1) *
                pairs[static_cast<std::size_t>(p)].y[static_cast<std::size_t>(j)];
      long long m2 = dotv % (2 * n);
      if (m2 < 0) m2 += 2 * n;
      re -= static_cast<long double>(z) * pair_cosh[static_cast<std::size_t>(p)] * c2[static_cast<std::size_t>(m2)];
      im += static_cast<long double>(z) * pair_sinh[static_cast<std::size_t>(p)] * s2[static_cast<std::size_t>(m2)];
    }
    // F = (1 - e^{-T D}) / D, entire in D
    const std::complex<long double> D(re, im);
    std::complex<long double> F;
    const long double wmag = std::abs(D) * T;
    if (wmag < 1e-6L) {
      F = T * (1.0L - 0.5L * T * D + T * T * D * D / 6.0L);
    } else {
      const std::complex<long double> w = T * D;
      F = (1.0L - std::exp(-w)) / D;
    }
    for (std::size_t q = 0; q < n_points; ++q) {
      long long dotx = 0;
      for (int j = 0; j < d; ++j)
        dotx += static_cast<long long>(2 * idx[static_cast<std::size_t>(j)] + 1) *
                points[q][static_cast<std::size_t>(j)];
      long long m2 = dotx % (2 * n);
      if (m2 < 0) m2 += 2 * n;
      // e^{i k.x} (midpoint grid) -- g(k) = 1 for the shipped g = delta_0
      acc[q].add(c2[static_cast<std::size_t>(m2)] * F.real() - s2[static_cast<std::size_t>(m2)] * F.imag());
    }
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < n) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
    if (j < 0) break;
  }

  const double cells = std::pow(static_cast<double>(n), d);
  NcglReport report;
  report.mu = mu;
  report.eta = eta;
  report.t_cap = t_cap;
  report.n_grid = n;

  std::vector<double> radii, ratio_list;
  for (std::size_t q = 0; q < n_points; ++q) {
    NcglRow row;
    row.x = points[q];
    const VecD xv = to_vecd(points[q]);
    row.tail_completion = options.g_hat0 * green_time_tail(xv, eta, mom.lambda, t_cap);
    row.g_q = options.g_hat0 *
                  static_cast<double>(acc[q].value() / static_cast<long double>(cells)) +
              row.tail_completion;
    row.continuum = options.g_hat0 * brownian::brownian_green(xv, eta, mom.lambda);
    row.ratio = row.g_q / row.continuum;

    // error budget: dominant periodic image + completion residual + float noise
    const double r = norm2(xv);
    double image_bound;
    const double dist = static_cast<double>(n) - norm_inf(xv);
    if (eta_norm > 1e-12) {
      const double t_img = dist / eta_norm;
      const double sig = std::sqrt(t_img * lam_max) / eta_norm;
      const double zscore = (t_img - t_cap) / sig;
      image_bound = 2.0 * d * brownian::envelope(VecD{dist}, VecD{eta_norm}) *
                    0.5 * std::erfc(zscore / std::sqrt(2.0));
    } else {
      image_bound = 2.0 * d * std::exp(-dist * dist / (2.0 * t_cap * lam_max)) /
                    std::max(1.0, std::pow(dist, d - 2));
    }
    const double completion_residual =
        row.tail_completion * std::min(1.0, (1.0 + r * r / lam_max) / t_cap);
    const double noise = 1e-18 + 8.0 * 2.3e-16 * std::abs(row.g_q);
    row.error_estimate = image_bound + completion_residual + noise;
    report.rows.push_back(row);
    radii.push_back(r);
    ratio_list.push_back(row.ratio);
  }
  report.trend_slope = log_trend_slope(radii, ratio_list);
  return report;
}

RateReport exponential_rate(const Kernel& kernel, double z, const LatticePoint& x,
                            const std::vector<long long>& n_values, double theta) {
  if (n_values.size() < 3)
    throw Error(errc::validation, "exponential_rate needs at least three n values");
  const VecD xv = to_vecd(x);
  const wulff::TiltReport tilt = wulff::optimal_tilt(kernel, z, xv);
  TiltVector tilt_mu(tilt.mu);
  for (double& v : tilt_mu) v *= theta;

  const long long n_max = *std::max_element(n_values.begin(), n_values.end());
  const int radius = static_cast<int>(n_max) * norm_inf_int(x);

  lattice::SeriesOptions series;
  series.tilt = tilt_mu;
  series.tol = 1e-12;
  const lattice::GreenTable table = lattice::green_series_box(kernel, z, radius, series);

  RateReport report;
  report.x = x;
  report.reference = dot(tilt.mu, xv);
  for (long long n : n_values) {
    LatticePoint p(x);
    for (int& v : p) v = static_cast<int>(v * n);
    const double tilted = table.at(p);  // S^(theta mu)(n x) = S(n x) e^{theta mu . n x}
    const double log_s = std::log(tilted) - theta * static_cast<double>(n) * report.reference;
    report.n_values.push_back(n);
    report.rates.push_back(-log_s / static_cast<double>(n));
  }
  // fit r(n) = r_inf + (a log n + b)/n through the three largest n
  const std::size_t k = report.n_values.size();
  std::vector<double> jac(9), rhs(3);
  for (int i = 0; i < 3; ++i) {
    const double n = static_cast<double>(report.n_values[k - 3 + static_cast<std::size_t>(i)]);
    jac[static_cast<std::size_t>(3 * i)] = 1.0;
    jac[static_cast<std::size_t>(3 * i + 1)] = std::log(n) / n;
    jac[static_cast<std::size_t>(3 * i + 2)] = 1.0 / n;
    rhs[static_cast<std::size_t>(i)] = report.rates[k - 3 + static_cast<std::size_t>(i)];
  }
  report.extrapolated = solve_dense(jac, rhs)[0];
  return report;
}

double log_trend_slope(const std::vector<double>& radii, const std::vector<double>& ratios) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double dev = std::abs(ratios[i] - 1.0);
    if (dev > 0.0 && radii[i] > 0.0) {
      lx.push_back(std::log(radii[i]));
      ly.push_back(std::log(dev));
    }
  }
  if (lx.size() < 2) return 0.0;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ozlab::crossover
