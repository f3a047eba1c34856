#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ozlab/common.hpp"

namespace ozlab {

// A tilt vector mu in R^d; the tilted kernel is J^(mu)(y) = J(y) e^{mu.y}.
using TiltVector = VecD;

enum class NamedKernel { nn, linf_box, perturbed_nn, saturation_1d };

NamedKernel parse_kernel_name(const std::string& name);  // throws errc::validation
std::string kernel_name(NamedKernel name);

// Closed-form radial profile c |x|^{-p} e^{-|x|} on Z \ {0} (d = 1 only).
// Tilted sums converge iff the tilt stays within the unit decay rate; the
// truncation radius for a requested tolerance comes from the geometric tail
// c R^{-p} e^{-(1-t)R} / (1 - e^{-(1-t)}).
struct TailProfile {
  double p = 0.0;
  double c = 0.0;
};

// Smallest radius meeting `tol` under tilt `tilt_inf`; throws
// errc::tail_truncation when the bound cannot be met (tilt too close to 1).
long long tail_truncation_radius(const TailProfile& tail, double tilt_inf, double tol);

// Symmetric step kernel on Z^d.  Stored as one representative per symmetry
// orbit and expanded once at construction; immutable afterwards, so all
// evaluation paths are pure and safe to call concurrently.
class Kernel {
 public:
  // (y, w) stands for w*delta_y + w*delta_{-y}; pairing keeps the imaginary
  // part of untilted transforms exactly zero.
  struct Pair {
    LatticePoint y;
    double w;
  };

  static Kernel from_orbit_representatives(int d, std::vector<LatticePoint> reps, VecD weights,
                                           bool symmetry_closure, bool step_distribution,
                                           bool normalize, bool named = false);
  static Kernel power_law_tail(double p);  // saturation kernel (d = 1)

  int dimension() const { return d_; }
  bool is_step_distribution() const { return step_; }
  bool has_tail() const { return tail_.has_value(); }
  const TailProfile& tail() const { return *tail_; }
  int range() const { return range_; }  // max ||y||_inf of the finite support
  double total_weight() const { return total_weight_; }

  const std::vector<LatticePoint>& points() const { return points_; }
  const VecD& weights() const { return weights_; }
  const std::vector<Pair>& pairs() const { return pairs_; }
  double origin_weight() const { return origin_weight_; }

  // Finite-support snapshot of a tail kernel (truncation tolerance on the
  // missing mass, radius at least min_radius); identity for finite kernels.
  Kernel materialized(double tol = 1e-14, int min_radius = 0) const;

  bool full_lattice_support() const { return full_support_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Kernel() = default;
  void finalize(bool named, bool check_symmetry);

  int d_ = 0;
  bool step_ = false;
  std::optional<TailProfile> tail_;
  int range_ = 0;
  double total_weight_ = 0.0;
  double origin_weight_ = 0.0;
  bool full_support_ = true;
  std::vector<LatticePoint> points_;  // expanded, canonical (lexicographic) order
  VecD weights_;
  std::vector<Pair> pairs_;
  std::vector<std::string> warnings_;
};

// nn: P(x) = 1/(2d) 1{||x||_1 = 1}
// linf_box: D(x) = 3^{-d} 1{||x||_inf <= 1}
// perturbed_nn (d=2, params[0]=alpha in (0,1]):
//   D(x) = (1-alpha)/4 1{||x||_1=1} + alpha/4 1{x=(+-1,+-1)}
// saturation_1d (d=1, params[0]=p > 1): c_p |x|^{-p} e^{-|x|}
Kernel make_named_kernel(NamedKernel name, int d, const VecD& params = {});

// z * sum_y J(y) e^{mu.y - i k.y}.  Exactly real at mu = 0 (paired terms).
std::complex<double> tilted_transform(const Kernel& kernel, double z, const TiltVector& mu,
                                      const VecD& k);

struct Moments {
  double value = 0.0;  // z * \hat J^{(mu)}(0)
  VecD eta;            // first moments of z J^{(mu)}
  SpdMatrix lambda;    // second moments (symmetric)
};

Moments moments(const Kernel& kernel, double z, const TiltVector& mu);

struct QClassReport {
  double m_estimate = 0.0;     // max of the tested tilted-moment norms
  double m_tail_bound = 0.0;   // truncation bound carried by the moment sums
  double kir_estimate = 0.0;   // inf over scanned k of Re[J^(0)-J^(k)]/|k|^2
  double zeta = 0.0;
  int k_grid_size = 0;
  long long k_points_scanned = 0;
};

// Empirical estimates for the constants of the class Q_{M,K_IR,zeta}; the
// report is diagnostic (kir_estimate <= 0 flags a degenerate kernel, it does
// not throw).  Covers the J-side only; g = delta_0 for random walks.
QClassReport q_class_check(const Kernel& kernel, double z, const TiltVector& mu, double zeta,
                           int k_grid_size);

}  // namespace ozlab
