#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ozlab {

using VecD = std::vector<double>;
using LatticePoint = std::vector<int>;

// Error taxonomy shared by all modules.  The CLI maps `validation` to exit
// code 2 and everything else to 3, and serializes `data` into the JSON
// diagnostic printed on stderr.
enum class errc {
  validation,        // bad arguments / preconditions
  solver_failure,    // Newton / bracketing did not converge
  saturated,         // mass solve hit the saturation regime (z < z_sat)
  tail_truncation,   // infinite-range tail bound unmeetable under the tilt
  memory_cap,        // series box exceeds the configured memory cap
  quadrature,        // requested accuracy unreachable on the torus grid
};

class Error : public std::runtime_error {
 public:
  Error(errc code, std::string msg, std::map<std::string, double> data = {})
      : std::runtime_error(std::move(msg)), code_(code), data_(std::move(data)) {}
  errc code() const noexcept { return code_; }
  const std::map<std::string, double>& data() const noexcept { return data_; }
  const char* code_name() const noexcept {
    switch (code_) {
      case errc::validation: return "validation";
      case errc::solver_failure: return "solver_failure";
      case errc::saturated: return "saturated";
      case errc::tail_truncation: return "tail_truncation";
      case errc::memory_cap: return "memory_cap";
      case errc::quadrature: return "quadrature";
    }
    return "unknown";
  }

 private:
  errc code_;
  std::map<std::string, double> data_;
};

// Kahan–Neumaier compensated accumulator.  All lattice sums run through this
// in a fixed canonical point order so results are reproducible bit-for-bit.
template <typename T = double>
class KahanSum {
 public:
  void add(T value) {
    T t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
      comp_ += (sum_ - t) + value;
    else
      comp_ += (value - t) + sum_;
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_ = 0;
  T comp_ = 0;
};

inline double dot(const VecD& a, const VecD& b) {
  KahanSum<> s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

inline double norm2(const VecD& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const VecD& a) {
  double s = 0;
  for (double v : a) s += std::abs(v);
  return s;
}

inline double norm_inf(const VecD& a) {
  double s = 0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

inline VecD to_vecd(const LatticePoint& x) { return VecD(x.begin(), x.end()); }

inline int norm_inf_int(const LatticePoint& x) {
  int s = 0;
  for (int v : x) s = std::max(s, std::abs(v));
  return s;
}

// Dense symmetric positive-definite d×d matrix, row-major.  d is tiny (the
// lattice dimension), so plain Cholesky is all that is ever needed.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(int d) : d_(d), a_(static_cast<std::size_t>(d) * d, 0.0) {}
  int dim() const { return d_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }

  // Cholesky factor L with A = L Lᵀ; throws Error(validation) if not SPD.
  SpdMatrix cholesky() const;
  // Solve A y = b through the Cholesky factorization.
  VecD solve(const VecD& b) const;
  double quad_form(const VecD& v) const { return dot(v, solve(v)); }
  double determinant() const;
  double min_eigenvalue_bound() const;  // smallest diagonal pivot of L, squared

 private:
  int d_ = 0;
  std::vector<double> a_;
};

inline SpdMatrix SpdMatrix::cholesky() const {
  SpdMatrix L(d_);
  for (int i = 0; i < d_; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = (*this)(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s <= 0.0)
          throw Error(errc::validation, "matrix is not positive-definite",
                      {{"pivot", s}, {"index", static_cast<double>(i)}});
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return L;
}

inline VecD SpdMatrix::solve(const VecD& b) const {
  SpdMatrix L = cholesky();
  VecD y(b);
  for (int i = 0; i < d_; ++i) {
    for (int k = 0; k < i; ++k) y[i] -= L(i, k) * y[k];
    y[i] /= L(i, i);
  }
  for (int i = d_ - 1; i >= 0; --i) {
    for (int k = i + 1; k < d_; ++k) y[i] -= L(k, i) * y[k];
    y[i] /= L(i, i);
  }
  return y;
}

inline double SpdMatrix::determinant() const {
  SpdMatrix L = cholesky();
  double det = 1.0;
  for (int i = 0; i < d_; ++i) det *= L(i, i) * L(i, i);
  return det;
}

inline double SpdMatrix::min_eigenvalue_bound() const {
  SpdMatrix L = cholesky();
  double m = L(0, 0);
  for (int i = 1; i < d_; ++i) m = std::min(m, L(i, i));
  return m * m;
}

// General small dense solve (Gaussian elimination, partial pivoting) for the
// (d+1)-dimensional Lagrange Newton systems, which are not symmetric.
VecD solve_dense(std::vector<double> a, VecD b);  // a is n×n row-major

// Worker cap shared by the embarrassingly-parallel scans.  0 = hardware.
void set_thread_cap(unsigned n);
unsigned thread_cap();

// Series-oracle memory cap in bytes; reads OZLAB_MEM_CAP_MB once (default
// 2048 MiB) and can be overridden programmatically (tests, CLI).
std::size_t memory_cap_bytes();
void set_memory_cap_bytes(std::size_t bytes);

}  // namespace ozlab
