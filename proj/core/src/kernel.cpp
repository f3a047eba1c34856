#include "ozlab/kernel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "ozlab/special.hpp"

namespace ozlab {

// ---------------------------------------------------------------------------
// common.hpp out-of-line pieces
// ---------------------------------------------------------------------------

VecD solve_dense(std::vector<double> a, VecD b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
          std::abs(a[static_cast<std::size_t>(piv) * n + col]))
        piv = r;
    if (a[static_cast<std::size_t>(piv) * n + col] == 0.0)
      throw Error(errc::solver_failure, "singular linear system",
                  {{"column", static_cast<double>(col)}});
    if (piv != col) {
      for (int c = col; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(piv) * n + c], a[static_cast<std::size_t>(col) * n + c]);
      std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
    }
    const double d = a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r) * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * b[static_cast<std::size_t>(c)];
    b[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r) * n + r];
  }
  return b;
}

namespace {
std::atomic<unsigned> g_thread_cap{0};
std::atomic<std::size_t> g_mem_cap{0};
}  // namespace

void set_thread_cap(unsigned n) { g_thread_cap.store(n); }

unsigned thread_cap() {
  unsigned n = g_thread_cap.load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

std::size_t memory_cap_bytes() {
  std::size_t cap = g_mem_cap.load();
  if (cap != 0) return cap;
  std::size_t mb = 2048;
  if (const char* env = std::getenv("OZLAB_MEM_CAP_MB")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) mb = static_cast<std::size_t>(v);
  }
  cap = mb * 1024 * 1024;
  g_mem_cap.store(cap);
  return cap;
}

void set_memory_cap_bytes(std::size_t bytes) { g_mem_cap.store(bytes); }

// ---------------------------------------------------------------------------
// Kernel construction
// ---------------------------------------------------------------------------

namespace {

// Full orbit of y under coordinate permutations and per-coordinate sign flips.
std::set<LatticePoint> symmetry_orbit(const LatticePoint& y) {
  std::set<LatticePoint> orbit;
  LatticePoint perm(y);
  std::sort(perm.begin(), perm.end());
  do {
    const int d = static_cast<int>(perm.size());
    std::vector<int> nonzero;
    for (int i = 0; i < d; ++i)
      if (perm[static_cast<std::size_t>(i)] != 0) nonzero.push_back(i);
    const int m = static_cast<int>(nonzero.size());
    for (long long mask = 0; mask < (1LL << m); ++mask) {
      LatticePoint q = perm;
      for (int b = 0; b < m; ++b)
        if (mask & (1LL << b)) q[static_cast<std::size_t>(nonzero[static_cast<std::size_t>(b)])] *= -1;
      orbit.insert(q);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return orbit;
}

// Lattice index of the integer span of `pts` in Z^d (1 = full lattice),
// via integer row reduction; 0 means rank-deficient.
long long lattice_index(const std::vector<LatticePoint>& pts, int d) {
  std::vector<std::vector<long long>> rows;
  for (const auto& p : pts) {
    bool zero = true;
    for (int v : p) zero = zero && v == 0;
    if (!zero) rows.emplace_back(p.begin(), p.end());
  }
  if (rows.empty()) return 0;
  int rank = 0;
  for (int col = 0; col < d && rank < static_cast<int>(rows.size()); ++col) {
    // reduce column below `rank` to a single nonzero pivot by gcd steps
    while (true) {
      int piv = -1;
      for (int r = rank; r < static_cast<int>(rows.size()); ++r)
        if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != 0 &&
            (piv < 0 || std::llabs(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) <
                            std::llabs(rows[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)])))
          piv = r;
      if (piv < 0) break;
      std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(piv)]);
      bool done = true;
      const long long pv = rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(col)];
      for (int r = rank + 1; r < static_cast<int>(rows.size()); ++r) {
        long long v = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
        if (v == 0) continue;
        const long long q = v / pv;
        for (int c = 0; c < d; ++c)
          rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
              q * rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)];
        if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != 0) done = false;
      }
      if (done) break;
    }
    if (rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(col)] != 0) ++rank;
  }
  if (rank < d) return 0;
  long long idx = 1;
  for (int i = 0; i < d; ++i) idx *= std::llabs(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]);
  return idx;
}

}  // namespace

void Kernel::finalize(bool named, bool check_symmetry) {
  // canonical order
  std::vector<std::size_t> idx(points_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return points_[a] < points_[b]; });
  std::vector<LatticePoint> pts;
  VecD wts;
  pts.reserve(points_.size());
  wts.reserve(points_.size());
  for (std::size_t i : idx) {
    pts.push_back(points_[i]);
    wts.push_back(weights_[i]);
  }
  points_ = std::move(pts);
  weights_ = std::move(wts);

  if (check_symmetry) {
    std::map<LatticePoint, double> table;
    for (std::size_t i = 0; i < points_.size(); ++i) table[points_[i]] = weights_[i];
    for (std::size_t i = 0; i < points_.size(); ++i) {
      for (const auto& q : symmetry_orbit(points_[i])) {
        auto it = table.find(q);
        if (it == table.end() || std::abs(it->second - weights_[i]) > 1e-12 * (1.0 + std::abs(weights_[i])))
          throw Error(errc::validation,
                      "kernel is not Z^d-symmetric (use symmetry_closure or fix the point set)");
      }
    }
  }

  KahanSum<> total;
  range_ = 0;
  origin_weight_ = 0.0;
  pairs_.clear();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    total.add(weights_[i]);
    range_ = std::max(range_, norm_inf_int(points_[i]));
    bool zero = true, positive = false;
    for (int v : points_[i]) {
      if (v != 0) {
        zero = false;
        positive = v > 0;
        break;
      }
    }
    if (zero)
      origin_weight_ = weights_[i];
    else if (positive)
      pairs_.push_back({points_[i], weights_[i]});
  }
  total_weight_ = total.value();

  if (step_) {
    for (double w : weights_)
      if (w < 0.0) throw Error(errc::validation, "step distribution has a negative weight");
    if (!tail_ && std::abs(total_weight_ - 1.0) > 1e-12)
      throw Error(errc::validation, "step distribution does not sum to 1",
                  {{"total", total_weight_}});
  }

  full_support_ = lattice_index(points_, d_) == 1;
  if (!full_support_ && !tail_) {
    if (named)
      throw Error(errc::validation, "named kernel support lies in a proper sublattice");
    warnings_.push_back("support lies in a proper sublattice of Z^d");
  }
}

Kernel Kernel::from_orbit_representatives(int d, std::vector<LatticePoint> reps, VecD weights,
                                          bool symmetry_closure, bool step_distribution,
                                          bool normalize, bool named) {
  if (d < 1) throw Error(errc::validation, "dimension must be >= 1", {{"d", static_cast<double>(d)}});
  if (reps.size() != weights.size())
    throw Error(errc::validation, "points/weights size mismatch");
  for (const auto& p : reps)
    if (static_cast<int>(p.size()) != d)
      throw Error(errc::validation, "point dimension mismatch");

  Kernel k;
  k.d_ = d;
  k.step_ = step_distribution;
  if (symmetry_closure) {
    std::map<LatticePoint, double> table;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (const auto& q : symmetry_orbit(reps[i])) {
        auto [it, inserted] = table.emplace(q, weights[i]);
        if (!inserted && std::abs(it->second - weights[i]) > 1e-12 * (1.0 + std::abs(weights[i])))
          throw Error(errc::validation, "conflicting weights for one symmetry orbit");
      }
    }
    for (const auto& [p, w] : table) {
      k.points_.push_back(p);
      k.weights_.push_back(w);
    }
  } else {
    k.points_ = std::move(reps);
    k.weights_ = std::move(weights);
  }

  if (normalize) {
    KahanSum<> total;
    for (double w : k.weights_) total.add(w);
    if (total.value() <= 0.0)
      throw Error(errc::validation, "cannot normalize: nonpositive total weight");
    for (double& w : k.weights_) w /= total.value();
  }

  k.finalize(named, /*check_symmetry=*/!symmetry_closure);
  return k;
}

Kernel Kernel::power_law_tail(double p) {
  if (!(p > 1.0))
    throw Error(errc::validation, "power-law tail requires p > 1", {{"p", p}});
  Kernel k;
  k.d_ = 1;
  k.step_ = true;
  const double cp = 1.0 / (2.0 * special::polylog_exp_neg(p, 1.0));
  k.tail_ = TailProfile{p, cp};
  k.total_weight_ = 1.0;
  k.full_support_ = true;
  return k;
}

Kernel Kernel::materialized(double tol, int min_radius) const {
  if (!tail_) return *this;
  const long long radius =
      std::max<long long>(tail_truncation_radius(*tail_, 0.0, tol), min_radius);
  Kernel k;
  k.d_ = 1;
  k.step_ = false;  // truncation breaks exact normalization; callers know
  for (long long x = 1; x <= radius; ++x) {
    const double w = tail_->c * std::pow(static_cast<double>(x), -tail_->p) *
                     std::exp(-static_cast<double>(x));
    k.points_.push_back({static_cast<int>(-x)});
    k.weights_.push_back(w);
    k.points_.push_back({static_cast<int>(x)});
    k.weights_.push_back(w);
  }
  k.finalize(false, false);
  return k;
}

NamedKernel parse_kernel_name(const std::string& name) {
  if (name == "nn") return NamedKernel::nn;
  if (name == "linf_box") return NamedKernel::linf_box;
  if (name == "perturbed_nn") return NamedKernel::perturbed_nn;
  if (name == "saturation_1d") return NamedKernel::saturation_1d;
  throw Error(errc::validation, "unknown kernel name: " + name);
}

std::string kernel_name(NamedKernel name) {
  switch (name) {
    case NamedKernel::nn: return "nn";
    case NamedKernel::linf_box: return "linf_box";
    case NamedKernel::perturbed_nn: return "perturbed_nn";
    case NamedKernel::saturation_1d: return "saturation_1d";
  }
  return "?";
}

Kernel make_named_kernel(NamedKernel name, int d, const VecD& params) {
  switch (name) {
    case NamedKernel::nn: {
      if (d < 1) throw Error(errc::validation, "nn requires d >= 1");
      LatticePoint e1(static_cast<std::size_t>(d), 0);
      e1[0] = 1;
      return Kernel::from_orbit_representatives(d, {e1}, {1.0 / (2.0 * d)}, true, true, false, true);
    }
    case NamedKernel::linf_box: {
      if (d < 1) throw Error(errc::validation, "linf_box requires d >= 1");
      std::vector<LatticePoint> reps;
      VecD wts;
      const double w = std::pow(3.0, -d);
      for (int ones = 0; ones <= d; ++ones) {
        LatticePoint rep(static_cast<std::size_t>(d), 0);
        for (int i = 0; i < ones; ++i) rep[static_cast<std::size_t>(i)] = 1;
        reps.push_back(rep);
        wts.push_back(w);
      }
      return Kernel::from_orbit_representatives(d, reps, wts, true, true, false, true);
    }
    case NamedKernel::perturbed_nn: {
      if (d != 2) throw Error(errc::validation, "perturbed_nn requires d = 2");
      if (params.empty() || !(params[0] > 0.0) || params[0] > 1.0)
        throw Error(errc::validation, "perturbed_nn requires alpha in (0,1]",
                    {{"alpha", params.empty() ? -1.0 : params[0]}});
      const double alpha = params[0];
      return Kernel::from_orbit_representatives(2, {{1, 0}, {1, 1}},
                                                {(1.0 - alpha) / 4.0, alpha / 4.0}, true, true,
                                                false, true);
    }
    case NamedKernel::saturation_1d: {
      if (d != 1) throw Error(errc::validation, "saturation_1d requires d = 1");
      if (params.empty() || !(params[0] > 1.0))
        throw Error(errc::validation, "saturation_1d requires p > 1",
                    {{"p", params.empty() ? 0.0 : params[0]}});
      return Kernel::power_law_tail(params[0]);
    }
  }
  throw Error(errc::validation, "unknown kernel name");
}

// ---------------------------------------------------------------------------
// Transforms and moments
// ---------------------------------------------------------------------------

long long tail_truncation_radius(const TailProfile& tail, double tilt_inf, double tol) {
  const double rate = 1.0 - std::abs(tilt_inf);
  if (rate <= 1e-12)
    throw Error(errc::tail_truncation, "tilt reaches the tail decay rate; truncated sum diverges",
                {{"tilt", tilt_inf}, {"rate", 1.0}});
  const double log_denom = std::log1p(-std::exp(-rate));
  // bound(R) = c R^{-p} e^{-rate (R+1)} / (1 - e^{-rate})
  const long long cap = 50'000'000;
  long long lo = 1, hi = 1;
  auto log_bound = [&](long long r) {
    return std::log(tail.c) - tail.p * std::log(static_cast<double>(r)) -
           rate * static_cast<double>(r + 1) - log_denom;
  };
  const double target = std::log(tol);
  while (log_bound(hi) > target) {
    hi *= 2;
    if (hi > cap)
      throw Error(errc::tail_truncation, "tail truncation radius exceeds cap for this tilt",
                  {{"tilt", tilt_inf}, {"cap", static_cast<double>(cap)}});
  }
  while (lo < hi) {
    long long mid = lo + (hi - lo) / 2;
    if (log_bound(mid) > target)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

namespace {

double mu_dot(const TiltVector& mu, const LatticePoint& y) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) s += mu[j] * y[j];
  return s;
}

void require_dim(const Kernel& kernel, const VecD& v, const char* what) {
  if (static_cast<int>(v.size()) != kernel.dimension())
    throw Error(errc::validation, std::string(what) + ": dimension mismatch",
                {{"expected", static_cast<double>(kernel.dimension())},
                 {"got", static_cast<double>(v.size())}});
  for (double x : v)
    if (!std::isfinite(x)) throw Error(errc::validation, std::string(what) + ": non-finite entry");
}

}  // namespace

std::complex<double> tilted_transform(const Kernel& kernel, double z, const TiltVector& mu,
                                      const VecD& k) {
  require_dim(kernel, mu, "tilted_transform mu");
  require_dim(kernel, k, "tilted_transform k");
  KahanSum<> re, im;
  re.add(kernel.origin_weight());
  for (const auto& [y, w] : kernel.pairs()) {
    const double a = mu_dot(mu, y);
    const double b = mu_dot(k, y);
    // w e^{a - ib} + w e^{-a + ib}
    re.add(2.0 * w * std::cosh(a) * std::cos(b));
    im.add(-2.0 * w * std::sinh(a) * std::sin(b));
  }
  if (kernel.has_tail()) {
    const auto& tail = kernel.tail();
    const double m = mu[0], kk = k[0];
    if (kk == 0.0 && std::abs(std::abs(m) - 1.0) <= 1e-12) {
      // exactly at the tail rate: polylog closed form (finite iff p > 1)
      re.add(tail.c * (special::polylog_exp_neg(tail.p, 0.0) +
                       special::polylog_exp_neg(tail.p, 2.0)));
    } else if (kk == 0.0) {
      if (std::abs(m) > 1.0)
        throw Error(errc::tail_truncation, "tilt exceeds the tail decay rate",
                    {{"mu", m}, {"rate", 1.0}});
      re.add(tail.c * (special::polylog_exp_neg(tail.p, 1.0 - m) +
                       special::polylog_exp_neg(tail.p, 1.0 + m)));
    } else {
      const long long radius = tail_truncation_radius(tail, std::abs(m), 1e-14);
      for (long long x = 1; x <= radius; ++x) {
        // combine the exponents first: e^{-x} cosh(mx) overflows near |m| = 1
        const double amp = tail.c * std::pow(static_cast<double>(x), -tail.p);
        const double up = amp * std::exp((m - 1.0) * static_cast<double>(x));
        const double dn = amp * std::exp(-(m + 1.0) * static_cast<double>(x));
        const double b = kk * static_cast<double>(x);
        re.add((up + dn) * std::cos(b));
        im.add(-(up - dn) * std::sin(b));
      }
    }
  }
  return z * std::complex<double>(re.value(), im.value());
}

Moments moments(const Kernel& kernel, double z, const TiltVector& mu) {
  require_dim(kernel, mu, "moments mu");
  const int d = kernel.dimension();
  Moments m;
  m.eta.assign(static_cast<std::size_t>(d), 0.0);
  m.lambda = SpdMatrix(d);
  KahanSum<> value;
  std::vector<KahanSum<>> eta(static_cast<std::size_t>(d));
  std::vector<KahanSum<>> lam(static_cast<std::size_t>(d) * d);
  value.add(kernel.origin_weight());
  for (const auto& [y, w] : kernel.pairs()) {
    const double a = mu_dot(mu, y);
    const double c = 2.0 * w * std::cosh(a);
    const double s = 2.0 * w * std::sinh(a);
    value.add(c);
    for (int j = 0; j < d; ++j) {
      eta[static_cast<std::size_t>(j)].add(y[static_cast<std::size_t>(j)] * s);
      for (int l = j; l < d; ++l)
        lam[static_cast<std::size_t>(j) * d + l].add(
            y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(l)] * c);
    }
  }
  if (kernel.has_tail()) {
    const auto& tail = kernel.tail();
    const double t = mu[0];
    if (std::abs(t) > 1.0 + 1e-12)
      throw Error(errc::tail_truncation, "tilt exceeds the tail decay rate",
                  {{"mu", t}, {"rate", 1.0}});
    const double dm = std::max(0.0, 1.0 - t), dp = 1.0 + t;
    value.add(tail.c * (special::polylog_exp_neg(tail.p, dm) +
                        special::polylog_exp_neg(tail.p, dp)));
    eta[0].add(tail.c * (special::polylog_exp_neg(tail.p - 1.0, dm) -
                         special::polylog_exp_neg(tail.p - 1.0, dp)));
    lam[0].add(tail.c * (special::polylog_exp_neg(tail.p - 2.0, dm) +
                         special::polylog_exp_neg(tail.p - 2.0, dp)));
  }
  m.value = z * value.value();
  for (int j = 0; j < d; ++j) m.eta[static_cast<std::size_t>(j)] = z * eta[static_cast<std::size_t>(j)].value();
  for (int j = 0; j < d; ++j)
    for (int l = j; l < d; ++l) {
      const double v = z * lam[static_cast<std::size_t>(j) * d + l].value();
      m.lambda(j, l) = v;
      m.lambda(l, j) = v;
    }
  return m;
}

QClassReport q_class_check(const Kernel& kernel, double z, const TiltVector& mu, double zeta,
                           int k_grid_size) {
  require_dim(kernel, mu, "q_class_check mu");
  if (!(zeta > 0.0)) throw Error(errc::validation, "q_class_check requires zeta > 0", {{"zeta", zeta}});
  if (!(z > 0.0) || z > 1.0)
    throw Error(errc::validation, "q_class_check requires z in (0,1]", {{"z", z}});
  if (k_grid_size < 2) throw Error(errc::validation, "k_grid_size must be >= 2");

  const int d = kernel.dimension();
  QClassReport report;
  report.zeta = zeta;
  report.k_grid_size = k_grid_size;

  // moment norms ||J^mu||_1 and || |y|^{2+zeta} J^mu ||_1
  KahanSum<> m1, m2;
  m1.add(std::abs(kernel.origin_weight()));
  for (const auto& [y, w] : kernel.pairs()) {
    const double a = mu_dot(mu, y);
    double y2 = 0.0;
    for (int v : y) y2 += static_cast<double>(v) * v;
    const double c = 2.0 * std::abs(w) * std::cosh(a);
    m1.add(c);
    m2.add(std::pow(y2, 0.5 * (2.0 + zeta)) * c);
  }
  if (kernel.has_tail()) {
    const auto& tail = kernel.tail();
    const double t = mu[0];
    if (std::abs(t) > 1.0 - 1e-12)
      throw Error(errc::tail_truncation,
                  "moment norms require a tilt strictly inside the tail rate", {{"mu", t}});
    m1.add(tail.c * (special::polylog_exp_neg(tail.p, 1.0 - t) +
                     special::polylog_exp_neg(tail.p, 1.0 + t)));
    m2.add(tail.c * (special::polylog_exp_neg(tail.p - 2.0 - zeta, 1.0 - t) +
                     special::polylog_exp_neg(tail.p - 2.0 - zeta, 1.0 + t)));
    report.m_tail_bound = 1e-14;
  }
  report.m_estimate = z * std::max(m1.value(), m2.value());

  // infrared constant: grid scan of Re[J^(mu)(0) - J^(mu)(k)] / |k|^2
  const double j0 = tilted_transform(kernel, z, mu, VecD(static_cast<std::size_t>(d), 0.0)).real();
  double kir = std::numeric_limits<double>::infinity();
  long long scanned = 0;
  auto probe = [&](const VecD& k) {
    double k2 = 0.0;
    for (double v : k) k2 += v * v;
    if (k2 < 1e-24) return;
    const double jk = tilted_transform(kernel, z, mu, k).real();
    kir = std::min(kir, (j0 - jk) / k2);
    ++scanned;
  };
  if (d <= 2) {
    const int n = k_grid_size;
    VecD k(static_cast<std::size_t>(d));
    if (d == 1) {
      for (int i = 0; i < n; ++i) {
        k[0] = -M_PI + 2.0 * M_PI * i / n;
        probe(k);
      }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          k[0] = -M_PI + 2.0 * M_PI * i / n;
          k[1] = -M_PI + 2.0 * M_PI * j / n;
          probe(k);
        }
    }
  } else {
    // rays: axes, the full diagonal (worst case for nn-type kernels), pairwise
    // diagonals, and a fixed deterministic set of mixed directions
    std::vector<VecD> dirs;
    for (int j = 0; j < d; ++j) {
      VecD u(static_cast<std::size_t>(d), 0.0);
      u[static_cast<std::size_t>(j)] = 1.0;
      dirs.push_back(u);
    }
    dirs.emplace_back(static_cast<std::size_t>(d), 1.0);
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        VecD u(static_cast<std::size_t>(d), 0.0);
        u[static_cast<std::size_t>(a)] = 1.0;
        u[static_cast<std::size_t>(b)] = 1.0;
        dirs.push_back(u);
        u[static_cast<std::size_t>(b)] = -1.0;
        dirs.push_back(u);
      }
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (int extra = 0; extra < 2 * d; ++extra) {
      VecD u(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        u[static_cast<std::size_t>(j)] = 2.0 * (static_cast<double>(state >> 11) / 9007199254740992.0) - 1.0;
      }
      dirs.push_back(u);
    }
    for (auto& u : dirs) {
      const double s = norm_inf(u);
      for (double& v : u) v /= s;  // scale so the ray reaches the torus face
      VecD k(static_cast<std::size_t>(d));
      for (int i = 1; i <= k_grid_size; ++i) {
        const double t = M_PI * i / k_grid_size;
        for (int j = 0; j < d; ++j) k[static_cast<std::size_t>(j)] = t * u[static_cast<std::size_t>(j)];
        probe(k);
      }
    }
  }
  report.kir_estimate = kir;
  report.k_points_scanned = scanned;
  return report;
}

}  // namespace ozlab
