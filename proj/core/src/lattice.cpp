#include "ozlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <future>

#include "ozlab/wulff.hpp"

namespace ozlab::lattice {

const char* method_name(Method m) {
  switch (m) {
    case Method::series: return "series";
    case Method::quadrature: return "quadrature";
    case Method::exact_1d: return "exact_1d";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Series oracle: dense-box iterated convolution
// ---------------------------------------------------------------------------

namespace {

struct SeriesPlan {
  long long steps = 0;
  int box_radius = 0;
  double rho = 0;        // per-step mass z * J^(tilt)(0)
  double tol = 0;
};

SeriesPlan plan_series(const Kernel& kernel, double z, int query_radius,
                       const SeriesOptions& options, int range) {
  SeriesPlan plan;
  plan.tol = options.tol;
  TiltVector tilt(static_cast<std::size_t>(kernel.dimension()), 0.0);
  if (options.tilt) tilt = *options.tilt;
  plan.rho = tilted_transform(kernel, z, tilt, VecD(tilt.size(), 0.0)).real();
  if (!(plan.rho < 1.0 - 1e-12))
    throw Error(errc::validation, "series requires z J^(tilt)(0) < 1",
                {{"rho", plan.rho}, {"z", z}});
  if (options.steps) {
    plan.steps = *options.steps;
  } else {
    plan.steps = static_cast<long long>(
        std::ceil(std::log(options.tol * (1.0 - plan.rho)) / std::log(plan.rho)));
    plan.steps = std::max<long long>(plan.steps, 1);
  }
  if (options.box_radius) {
    plan.box_radius = std::max(*options.box_radius, query_radius);
  } else {
    // exit-path bound: leaving radius R and returning to ||x|| <= q needs
    // >= (2R - q)/range steps, so R = (steps*range + q)/2 matches the tail.
    const long long r =
        (plan.steps * range + query_radius + 1) / 2;
    plan.box_radius = static_cast<int>(std::max<long long>(r, query_radius));
  }
  return plan;
}

}  // namespace

GreenTable green_series_box(const Kernel& kernel_in, double z, int query_radius,
                            const SeriesOptions& options) {
  if (query_radius < 0) throw Error(errc::validation, "query_radius must be >= 0");
  if (!(z >= 0.0) || z >= 1.0)
    throw Error(errc::validation, "green_series requires z in [0,1)", {{"z", z}});
  const Kernel kernel =
      kernel_in.materialized(std::min(1e-15, 0.01 * options.tol), query_radius + 1);
  if (z == 0.0) {
    // only the n = 0 term: S = delta_0
    GreenTable table;
    table.d_ = kernel.dimension();
    table.query_radius_ = query_radius;
    table.box_radius_ = query_radius;
    table.side_ = 2 * query_radius + 1;
    table.z_ = 0.0;
    table.steps_ = 0;
    table.strides_.assign(static_cast<std::size_t>(table.d_), 1);
    for (int j = table.d_ - 2; j >= 0; --j)
      table.strides_[static_cast<std::size_t>(j)] =
          table.strides_[static_cast<std::size_t>(j) + 1] * table.side_;
    table.center_ = 0;
    for (int j = 0; j < table.d_; ++j)
      table.center_ += query_radius * table.strides_[static_cast<std::size_t>(j)];
    std::size_t cells = 1;
    for (int j = 0; j < table.d_; ++j) cells *= static_cast<std::size_t>(table.side_);
    table.acc_.assign(cells, 0.0);
    table.acc_[static_cast<std::size_t>(table.center_)] = 1.0;
    return table;
  }
  const int d = kernel.dimension();
  const int range = std::max(kernel.range(), 1);
  const SeriesPlan plan = plan_series(kernel, z, query_radius, options, range);

  const int padded = plan.box_radius + range;
  const long long side = 2LL * padded + 1;
  double cells = 1.0;
  for (int j = 0; j < d; ++j) cells *= static_cast<double>(side);
  const std::size_t cap = options.memory_cap ? options.memory_cap : memory_cap_bytes();
  if (cells * sizeof(double) * 3.0 > static_cast<double>(cap)) {
    // report the tolerance that would fit under the cap
    const double side_max = std::floor(std::pow(static_cast<double>(cap) / (3.0 * sizeof(double)),
                                                1.0 / d));
    const double r_max = std::max(1.0, (side_max - 1.0) / 2.0 - range);
    const double n_max = std::max(1.0, (2.0 * r_max - query_radius) / range);
    const double tol_max = std::pow(plan.rho, n_max) / (1.0 - plan.rho);
    throw Error(errc::memory_cap, "series box exceeds the memory cap; loosen tol or raise the cap",
                {{"requested_bytes", cells * sizeof(double) * 3.0},
                 {"cap_bytes", static_cast<double>(cap)},
                 {"achievable_tol", tol_max}});
  }

  GreenTable table;
  table.d_ = d;
  table.query_radius_ = query_radius;
  table.box_radius_ = plan.box_radius;
  table.side_ = static_cast<int>(side);
  table.z_ = z;
  table.steps_ = plan.steps;
  table.strides_.assign(static_cast<std::size_t>(d), 1);
  for (int j = d - 2; j >= 0; --j)
    table.strides_[static_cast<std::size_t>(j)] =
        table.strides_[static_cast<std::size_t>(j) + 1] * side;
  table.center_ = 0;
  for (int j = 0; j < d; ++j) table.center_ += padded * table.strides_[static_cast<std::size_t>(j)];

  const std::size_t total = static_cast<std::size_t>(cells);
  std::vector<double> cur(total, 0.0), next(total, 0.0);
  table.acc_.assign(total, 0.0);

  // kernel offsets with z folded into the (possibly tilted) weights
  std::vector<long long> offsets;
  VecD weights;
  offsets.reserve(kernel.points().size());
  for (std::size_t i = 0; i < kernel.points().size(); ++i) {
    const auto& y = kernel.points()[i];
    long long off = 0;
    double tilt_factor = 1.0;
    for (int j = 0; j < d; ++j) {
      off += static_cast<long long>(y[static_cast<std::size_t>(j)]) * table.strides_[static_cast<std::size_t>(j)];
      if (options.tilt)
        tilt_factor *= std::exp((*options.tilt)[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)]);
    }
    offsets.push_back(off);
    weights.push_back(z * kernel.weights()[i] * tilt_factor);
  }
  const int n_off = static_cast<int>(offsets.size());

  cur[static_cast<std::size_t>(table.center_)] = 1.0;
  table.acc_[static_cast<std::size_t>(table.center_)] = 1.0;

  // odometer over the outer d-1 coordinates, contiguous inner loop
  std::vector<int> coord(static_cast<std::size_t>(std::max(d - 1, 1)), 0);
  for (long long n = 1; n <= plan.steps; ++n) {
    const int r = static_cast<int>(std::min<long long>(n * range, plan.box_radius));
    if (d == 1) {
      for (int x0 = -r; x0 <= r; ++x0) {
        const long long i = table.center_ + x0;
        double s = 0.0;
        for (int k = 0; k < n_off; ++k)
          s += weights[static_cast<std::size_t>(k)] * cur[static_cast<std::size_t>(i - offsets[static_cast<std::size_t>(k)])];
        next[static_cast<std::size_t>(i)] = s;
      }
    } else {
      for (std::size_t j = 0; j < coord.size(); ++j) coord[j] = -r;
      while (true) {
        long long base = table.center_;
        for (int j = 0; j < d - 1; ++j)
          base += static_cast<long long>(coord[static_cast<std::size_t>(j)]) * table.strides_[static_cast<std::size_t>(j)];
        double* out = next.data() + base - r;
        const double* src = cur.data();
        for (int x = -r; x <= r; ++x) {
          const long long i = base + x;
          double s = 0.0;
          for (int k = 0; k < n_off; ++k)
            s += weights[static_cast<std::size_t>(k)] * src[i - offsets[static_cast<std::size_t>(k)]];
          out[x + r] = s;
        }
        int j = d - 2;
        for (; j >= 0; --j) {
          if (++coord[static_cast<std::size_t>(j)] <= r) break;
          coord[static_cast<std::size_t>(j)] = -r;
        }
        if (j < 0) break;
      }
    }
    std::swap(cur, next);
    // accumulate S += (zD)^{*n}; zero `next` lazily by overwriting next pass
    if (d == 1) {
      for (int x0 = -r; x0 <= r; ++x0)
        table.acc_[static_cast<std::size_t>(table.center_ + x0)] += cur[static_cast<std::size_t>(table.center_ + x0)];
    } else {
      for (std::size_t j = 0; j < coord.size(); ++j) coord[j] = -r;
      while (true) {
        long long base = table.center_;
        for (int j = 0; j < d - 1; ++j)
          base += static_cast<long long>(coord[static_cast<std::size_t>(j)]) * table.strides_[static_cast<std::size_t>(j)];
        for (int x = -r; x <= r; ++x)
          table.acc_[static_cast<std::size_t>(base + x)] += cur[static_cast<std::size_t>(base + x)];
        int j = d - 2;
        for (; j >= 0; --j) {
          if (++coord[static_cast<std::size_t>(j)] <= r) break;
          coord[static_cast<std::size_t>(j)] = -r;
        }
        if (j < 0) break;
      }
    }
  }

  const double step_tail = std::pow(plan.rho, static_cast<double>(plan.steps)) / (1.0 - plan.rho);
  const double exit_steps = std::max(1.0, (2.0 * plan.box_radius - query_radius) / range);
  const double exit_tail = std::pow(plan.rho, exit_steps) / (1.0 - plan.rho);
  table.error_estimate_ = step_tail + exit_tail;
  return table;
}

double GreenTable::at(const LatticePoint& x) const {
  if (static_cast<int>(x.size()) != d_)
    throw Error(errc::validation, "GreenTable::at dimension mismatch");
  if (norm_inf_int(x) > query_radius_)
    throw Error(errc::validation, "GreenTable::at point outside the query radius",
                {{"radius", static_cast<double>(query_radius_)}});
  long long i = center_;
  for (int j = 0; j < d_; ++j)
    i += static_cast<long long>(x[static_cast<std::size_t>(j)]) * strides_[static_cast<std::size_t>(j)];
  return acc_[static_cast<std::size_t>(i)];
}

GreenEval GreenTable::eval(const LatticePoint& x) const {
  return GreenEval{x, z_, at(x), Method::series, error_estimate_};
}

double GreenTable::total_sum() const {
  KahanSum<> s;
  for (double v : acc_) s.add(v);
  return s.value();
}

double GreenTable::moment_sum(double phi) const {
  // odometer over the full padded cube, weight ||x||_2^phi
  KahanSum<> s;
  const int padded = (side_ - 1) / 2;
  std::vector<int> c(static_cast<std::size_t>(d_), -padded);
  for (std::size_t i = 0; i < acc_.size(); ++i) {
    if (acc_[i] != 0.0) {
      double r2 = 0.0;
      for (int j = 0; j < d_; ++j) r2 += static_cast<double>(c[static_cast<std::size_t>(j)]) * c[static_cast<std::size_t>(j)];
      s.add(std::pow(r2, 0.5 * phi) * acc_[i]);
    }
    int j = d_ - 1;
    for (; j >= 0; --j) {
      if (++c[static_cast<std::size_t>(j)] <= padded) break;
      c[static_cast<std::size_t>(j)] = -padded;
    }
    if (j < 0) break;
  }
  return s.value();
}

GreenEval green_series(const Kernel& kernel, double z, const LatticePoint& x, double tol) {
  SeriesOptions options;
  options.tol = tol;
  const GreenTable table = green_series_box(kernel, z, norm_inf_int(x), options);
  return table.eval(x);
}

// ---------------------------------------------------------------------------
// Torus quadrature
// ---------------------------------------------------------------------------

namespace {

int default_grid(int d) {
  switch (d) {
    case 1: return 512;
    case 2: return 256;
    case 3: return 64;
    default: return 32;
  }
}

int grid_cap(int d) {
  switch (d) {
    case 1: return 1 << 20;
    case 2: return 4096;
    case 3: return 512;
    default: return 128;
  }
}

struct QuadResult {
  std::vector<double> full;
  std::vector<double> half;
  double abs_sum = 0;  // average of |1/(1 - z D)|, noise floor for every x
};

struct SlicePartial {
  std::vector<long double> full, half;
  long double abs_sum = 0;
};

// one slice = one value of the leading index k_1; partial sums per slice are
// combined in fixed slice order, so results are bit-identical for any
// worker count
SlicePartial quadrature_slice(const Kernel& kernel, double z,
                              const std::vector<LatticePoint>& xs, int n, int i1,
                              const std::vector<long double>& ct) {
  const int d = kernel.dimension();
  const std::size_t nx = xs.size();
  const auto& pairs = kernel.pairs();
  const int np = static_cast<int>(pairs.size());
  std::vector<long long> pair_dot(static_cast<std::size_t>(np));
  std::vector<long long> x_dot(nx);
  for (int p = 0; p < np; ++p)
    pair_dot[static_cast<std::size_t>(p)] =
        static_cast<long long>(i1) * pairs[static_cast<std::size_t>(p)].y[0];
  for (std::size_t q = 0; q < nx; ++q) x_dot[q] = static_cast<long long>(i1) * xs[q][0];

  std::vector<KahanSum<long double>> full(nx), half(nx);
  KahanSum<long double> abs_sum;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  idx[0] = i1;
  const long double origin = static_cast<long double>(kernel.origin_weight());
  const bool lead_even = i1 % 2 == 0;
  while (true) {
    // D(k) = origin + sum 2 w cos(k.y);  integrand_x = cos(k.x) / (1 - z D(k))
    long double dk = origin;
    for (int p = 0; p < np; ++p) {
      const long long m = pair_dot[static_cast<std::size_t>(p)] % n;
      dk += 2.0L * static_cast<long double>(pairs[static_cast<std::size_t>(p)].w) *
            ct[static_cast<std::size_t>(m < 0 ? m + n : m)];
    }
    const long double g = 1.0L / (1.0L - static_cast<long double>(z) * dk);
    abs_sum.add(g < 0 ? -g : g);
    bool even = lead_even;
    for (int j = 1; j < d; ++j) even = even && (idx[static_cast<std::size_t>(j)] % 2 == 0);
    for (std::size_t q = 0; q < nx; ++q) {
      const long long mx = ((x_dot[q] % n) + n) % n;
      const long double f = ct[static_cast<std::size_t>(mx)] * g;
      full[q].add(f);
      if (even) half[q].add(f);
    }

    int j = d - 1;
    for (; j >= 1; --j) {
      const std::size_t ju = static_cast<std::size_t>(j);
      if (++idx[ju] < n) {
        for (int p = 0; p < np; ++p)
          pair_dot[static_cast<std::size_t>(p)] += pairs[static_cast<std::size_t>(p)].y[ju];
        for (std::size_t q = 0; q < nx; ++q) x_dot[q] += xs[q][ju];
        break;
      }
      idx[ju] = 0;
      for (int p = 0; p < np; ++p)
        pair_dot[static_cast<std::size_t>(p)] -=
            static_cast<long long>(n - 1) * pairs[static_cast<std::size_t>(p)].y[ju];
      for (std::size_t q = 0; q < nx; ++q)
        x_dot[q] -= static_cast<long long>(n - 1) * xs[q][ju];
    }
    if (j < 1) break;
  }
  SlicePartial out;
  out.full.resize(nx);
  out.half.resize(nx);
  for (std::size_t q = 0; q < nx; ++q) {
    out.full[q] = full[q].value();
    out.half[q] = half[q].value();
  }
  out.abs_sum = abs_sum.value();
  return out;
}

QuadResult quadrature_pass(const Kernel& kernel, double z, const std::vector<LatticePoint>& xs,
                           int n) {
  const int d = kernel.dimension();
  const std::size_t nx = xs.size();
  // phase table U[i] = exp(2 pi i I / n); k.y indexes it exactly
  std::vector<long double> ct(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ct[static_cast<std::size_t>(i)] = cosl(2.0L * static_cast<long double>(M_PI) * i / n);

  std::vector<SlicePartial> slices(static_cast<std::size_t>(n));
  const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(n));
  if (workers <= 1 || d == 1) {
    for (int i = 0; i < n; ++i)
      slices[static_cast<std::size_t>(i)] = quadrature_slice(kernel, z, xs, n, i, ct);
  } else {
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&, w] {
        for (int i = static_cast<int>(w); i < n; i += static_cast<int>(workers))
          slices[static_cast<std::size_t>(i)] = quadrature_slice(kernel, z, xs, n, i, ct);
      }));
    }
    for (auto& f : futures) f.get();
  }

  std::vector<KahanSum<long double>> full(nx), half(nx);
  KahanSum<long double> abs_sum;
  for (int i = 0; i < n; ++i) {
    const SlicePartial& s = slices[static_cast<std::size_t>(i)];
    for (std::size_t q = 0; q < nx; ++q) {
      full[q].add(s.full[q]);
      if (i % 2 == 0) half[q].add(s.half[q]);
    }
    abs_sum.add(s.abs_sum);
  }
  const double cells = std::pow(static_cast<double>(n), d);
  const double cells_half = std::pow(static_cast<double>(n) / 2.0, d);
  QuadResult out;
  out.full.resize(nx);
  out.half.resize(nx);
  for (std::size_t q = 0; q < nx; ++q) {
    out.full[q] = static_cast<double>(full[q].value() / static_cast<long double>(cells));
    out.half[q] = static_cast<double>(half[q].value() / static_cast<long double>(cells_half));
  }
  out.abs_sum = static_cast<double>(abs_sum.value() / static_cast<long double>(cells));
  return out;
}

double quad_noise(double abs_sum, double value) {
  return 8.0 * 1.1e-19 * abs_sum + 4.0 * 2.3e-16 * std::abs(value);
}

}  // namespace

GreenEval green_quadrature(const Kernel& kernel_in, double z, const LatticePoint& x, int n_grid,
                           double tol) {
  const Kernel kernel = kernel_in.materialized(1e-15);
  const int d = kernel.dimension();
  if (static_cast<int>(x.size()) != d)
    throw Error(errc::validation, "green_quadrature: x dimension mismatch");
  if (!(z > 0.0) || z >= 1.0 - 1e-12)
    throw Error(errc::validation, "green_quadrature requires z strictly inside (0,1)", {{"z", z}});
  const bool automatic = n_grid == 0;
  int n = automatic ? default_grid(d) : n_grid;
  if ((n & (n - 1)) != 0 || n < 4)
    throw Error(errc::validation, "n_grid must be a power of two >= 4",
                {{"n_grid", static_cast<double>(n)}});
  while (true) {
    const QuadResult q = quadrature_pass(kernel, z, {x}, n);
    const double err = std::abs(q.full[0] - q.half[0]) + quad_noise(q.abs_sum, q.full[0]);
    if (!automatic || err < tol)
      return GreenEval{x, z, q.full[0], Method::quadrature, err};
    if (2 * n > grid_cap(d)) {
      // peak width ~ sqrt(1-z); suggest resolving it with a few dozen cells
      const double suggested = 64.0 * M_PI / std::sqrt(1.0 - z);
      throw Error(errc::quadrature,
                  "requested tolerance unreachable on the torus grid (z too close to 1)",
                  {{"z", z}, {"n_grid", static_cast<double>(n)}, {"error", err},
                   {"suggested_n_grid", suggested}});
    }
    n *= 2;
  }
}

std::vector<GreenEval> green_quadrature_batch(const Kernel& kernel_in, double z,
                                              const std::vector<LatticePoint>& points,
                                              int n_grid) {
  const Kernel kernel = kernel_in.materialized(1e-15);
  const int d = kernel.dimension();
  for (const auto& x : points)
    if (static_cast<int>(x.size()) != d)
      throw Error(errc::validation, "green_quadrature_batch: x dimension mismatch");
  if (!(z > 0.0) || z >= 1.0 - 1e-12)
    throw Error(errc::validation, "green_quadrature requires z strictly inside (0,1)", {{"z", z}});
  if ((n_grid & (n_grid - 1)) != 0 || n_grid < 4)
    throw Error(errc::validation, "n_grid must be a power of two >= 4",
                {{"n_grid", static_cast<double>(n_grid)}});
  const QuadResult q = quadrature_pass(kernel, z, points, n_grid);
  std::vector<GreenEval> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out.push_back({points[i], z, q.full[i], Method::quadrature,
                   std::abs(q.full[i] - q.half[i]) + quad_noise(q.abs_sum, q.full[i])});
  return out;
}

GreenEval green_exact_1d_nn(double z, long long x) {
  if (!(z > 0.0) || z >= 1.0)
    throw Error(errc::validation, "green_exact_1d_nn requires z in (0,1)", {{"z", z}});
  const double m = std::acosh(1.0 / z);
  const double value = std::exp(-m * static_cast<double>(std::llabs(x))) / std::sqrt(1.0 - z * z);
  return GreenEval{{static_cast<int>(x)}, z, value, Method::exact_1d, 4.0 * 2.3e-16 * value};
}

// ---------------------------------------------------------------------------
// Susceptibilities and correlation lengths
// ---------------------------------------------------------------------------

Susceptibility tilted_susceptibility(const Kernel& kernel, double z, const TiltVector& mu) {
  const double j0 = tilted_transform(kernel, z, mu, VecD(mu.size(), 0.0)).real();
  if (j0 < 1.0 - 1e-12) return {true, 1.0 / (1.0 - j0)};
  return {false, std::numeric_limits<double>::infinity()};
}

double xi_phi(const Kernel& kernel, double z, double phi, double tol) {
  if (!(phi > 0.0))
    throw Error(errc::validation, "xi_phi requires phi > 0 (moment-ratio order)", {{"phi", phi}});
  if (!(tol > 0.0) || tol >= 1.0) throw Error(errc::validation, "xi_phi requires tol in (0,1)");
  const int d = kernel.dimension();
  const double m = wulff::mass(kernel, z);
  // box radius from the exponential envelope: (mR)^{phi+d} e^{-mR} < tol/4
  double s = phi + d + 2.0;
  for (int it = 0; it < 64; ++it) s = std::log(4.0 / tol) + (phi + d) * std::log(std::max(s, 2.0));
  const int radius = static_cast<int>(std::ceil(s / m)) + 1;
  // step count from the unit total mass of D^{*n}: sum error <= z^N / (1-z)
  SeriesOptions options;
  options.tol = tol;
  options.steps = static_cast<long long>(std::ceil(std::log(0.25 * tol) / std::log(z)));
  options.box_radius = radius;
  const GreenTable table = green_series_box(kernel, z, radius, options);
  const double chi = table.total_sum();
  const double weighted = table.moment_sum(phi);
  return std::pow(weighted / chi, 1.0 / phi);
}

SaturationReport saturation_probe(double p, double z, int x_max) {
  if (!(p > 1.0)) throw Error(errc::validation, "saturation_probe requires p > 1", {{"p", p}});
  if (!(z > 0.0) || z >= 1.0) throw Error(errc::validation, "saturation_probe requires z in (0,1)");
  if (x_max < 1) throw Error(errc::validation, "saturation_probe requires x_max >= 1");
  const Kernel kernel = make_named_kernel(NamedKernel::saturation_1d, 1, {p});
  SaturationReport report;
  report.p = p;
  report.z = z;
  report.z_sat = 1.0 / tilted_transform(kernel, 1.0, {1.0}, {0.0}).real();
  report.oz_regime = z >= report.z_sat;
  if (report.oz_regime) report.mass = wulff::mass(kernel, z);

  const auto& tail = kernel.tail();
  const double d_xmax = tail.c * std::pow(static_cast<double>(x_max), -tail.p) *
                        std::exp(-static_cast<double>(x_max));
  SeriesOptions options;
  options.tol = std::max(1e-300, 1e-8 * z * d_xmax);
  const GreenTable table = green_series_box(kernel, z, x_max, options);
  report.ratios.reserve(static_cast<std::size_t>(x_max));
  for (int x = 1; x <= x_max; ++x) {
    const double dv = tail.c * std::pow(static_cast<double>(x), -tail.p) *
                      std::exp(-static_cast<double>(x));
    report.ratios.push_back(table.at({x}) / (z * dv));
  }
  return report;
}

}  // namespace ozlab::lattice
