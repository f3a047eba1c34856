#include <doctest.h>

#include <cmath>

#include "ozlab/wulff.hpp"
#include "oracles.hpp"

using namespace ozlab;

namespace {
const Kernel& nn1() {
  static Kernel k = make_named_kernel(NamedKernel::nn, 1);
  return k;
}
const Kernel& nn2() {
  static Kernel k = make_named_kernel(NamedKernel::nn, 2);
  return k;
}
const Kernel& box2() {
  static Kernel k = make_named_kernel(NamedKernel::linf_box, 2);
  return k;
}
}  // namespace

TEST_CASE("mass closed forms") {
  // nn: cosh m = 1 + (d/z)(1-z); arccosh(3) at d=2, z=1/2
  CHECK(wulff::mass(nn2(), 0.5) == doctest::Approx(1.7627471740390861).epsilon(1e-13));
  for (int d : {1, 2, 3}) {
    const Kernel k = make_named_kernel(NamedKernel::nn, d);
    for (double z : {0.1, 0.4, 0.7, 0.9}) {
      CHECK(wulff::mass(k, z) ==
            doctest::Approx(std::acosh(1.0 + (d / z) * (1.0 - z))).epsilon(1e-13));
    }
  }
  // linf box: cosh m = (3-z)/(2z), independent of d
  CHECK(wulff::mass(box2(), 0.5) == doctest::Approx(1.5667992369724111).epsilon(1e-13));
  for (double z : {0.2, 0.6, 0.9})
    CHECK(wulff::mass(box2(), z) == doctest::Approx(std::acosh((3.0 - z) / (2.0 * z))).epsilon(1e-13));
  // mass vanishes toward the critical point
  CHECK(wulff::mass(nn1(), 0.999) < 0.05);
  CHECK_THROWS_AS(wulff::mass(nn2(), 1.0), Error);
  CHECK_THROWS_AS(wulff::mass(nn2(), 0.0), Error);
}

TEST_CASE("optimal tilt on the axis and the diagonal") {
  const wulff::TiltReport axis = wulff::optimal_tilt(nn2(), 0.5, {1, 0});
  CHECK(axis.mu[0] == doctest::Approx(axis.mass).epsilon(1e-12));
  CHECK(std::abs(axis.mu[1]) < 1e-12);
  CHECK(axis.norm_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(axis.boundary_residual) < 1e-12);

  // diagonal: mu = (t,t) with cosh t = 1/z = 2; |x|_z = 2 arccosh(2)/arccosh(3)
  const wulff::TiltReport diag = wulff::optimal_tilt(nn2(), 0.5, {1, 1});
  CHECK(diag.mu[0] == doctest::Approx(1.3169578969248166).epsilon(1e-12));
  CHECK(diag.mu[1] == doctest::Approx(diag.mu[0]).epsilon(1e-13));
  CHECK(diag.norm_value == doctest::Approx(1.4942107595693304).epsilon(1e-12));
  CHECK(diag.alignment_sine < 1e-9);
  CHECK(diag.lagrange_multiplier > 0.0);

  // d=1, negative direction
  const wulff::TiltReport neg = wulff::optimal_tilt(nn1(), 0.6, {-5});
  CHECK(neg.mu[0] == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
  CHECK(neg.norm_value == doctest::Approx(5.0).epsilon(1e-12));

  CHECK_THROWS_AS(wulff::optimal_tilt(nn2(), 0.5, {0, 0}), Error);
}

TEST_CASE("tilt report invariants on random directions") {
  oracles::Rng rng(101);
  for (const Kernel* kernel : {&nn2(), &box2()}) {
    for (int rep = 0; rep < 12; ++rep) {
      const double z = rng.uniform(0.1, 0.95);
      const VecD x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      if (norm2(x) < 0.2) continue;
      const wulff::TiltReport r = wulff::optimal_tilt(*kernel, z, x);
      CHECK(std::abs(r.boundary_residual) < 1e-12);
      CHECK(r.alignment_sine < 1e-9);
      CHECK(norm_inf(r.mu) <= r.mass * (1.0 + 1e-10));
      CHECK(r.mass <= norm1(r.mu) + 1e-10);
      CHECK(r.hessian_min_eig > 0.0);
    }
  }
}

TEST_CASE("norm properties") {
  oracles::Rng rng(31);
  CHECK(wulff::norm(nn2(), 0.5, {0, 0}) == 0.0);
  for (int rep = 0; rep < 40; ++rep) {
    const double z = rng.uniform(0.1, 0.95);
    const VecD x{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const VecD y{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    if (norm2(x) < 0.3 || norm2(y) < 0.3) continue;
    const double nx = wulff::norm(nn2(), z, x);
    // homogeneity over integer multipliers
    for (int t : {-3, -2, 2}) {
      const VecD tx{t * x[0], t * x[1]};
      CHECK(wulff::norm(nn2(), z, tx) == doctest::Approx(std::abs(t) * nx).epsilon(1e-10));
    }
    // triangle inequality and the l_inf/l_1 sandwich
    const VecD sum{x[0] + y[0], x[1] + y[1]};
    const double ny = wulff::norm(nn2(), z, y);
    CHECK(wulff::norm(nn2(), z, sum) <= nx + ny + 1e-9);
    CHECK(nx >= norm_inf(x) - 1e-9);
    CHECK(nx <= norm1(x) + 1e-9);
    // permutation/sign symmetry
    const VecD flipped{-x[1], x[0]};
    CHECK(wulff::norm(nn2(), z, flipped) == doctest::Approx(nx).epsilon(1e-10));
  }
}

TEST_CASE("drift and covariance") {
  // d=1: eta = z sinh m = sqrt(1-z^2)
  const wulff::DriftCov one = wulff::drift_cov(nn1(), 0.6, {1});
  CHECK(one.eta[0] == doctest::Approx(0.8).epsilon(1e-12));
  // d=2 on the axis: eta_1 = (z/d) sinh m = sqrt(2)/2 at z = 1/2
  const wulff::DriftCov two = wulff::drift_cov(nn2(), 0.5, {1, 0});
  CHECK(two.eta[0] == doctest::Approx(0.70710678118654752).epsilon(1e-12));
  CHECK(std::abs(two.eta[1]) < 1e-12);
  CHECK(two.a2 >= 0.0);
  CHECK(two.b2 >= 0.0);
  CHECK(two.w2 >= 0.0);
  // z -> 1: Lambda -> diag(1/2), eta -> 0
  const wulff::DriftCov crit = wulff::drift_cov(nn2(), 0.999, {1, 1});
  CHECK(crit.lambda(0, 0) == doctest::Approx(0.5).epsilon(2e-2));
  CHECK(norm2(crit.eta) < 0.1);
}

TEST_CASE("wulff boundary polyline") {
  const double z = 0.5;
  const auto polyline = wulff::wulff_boundary(nn2(), z, 64);
  REQUIRE(polyline.size() == 65);
  const double m = wulff::mass(nn2(), z);
  CHECK(polyline.front().v1 == doctest::Approx(m).epsilon(1e-12));
  CHECK(std::abs(polyline.front().v2) < 1e-12);
  // closed
  CHECK(polyline.back().v1 == doctest::Approx(polyline.front().v1));
  // annulus: ||mu||_inf <= m <= ||mu||_1
  for (const auto& p : polyline) {
    CHECK(std::max(std::abs(p.v1), std::abs(p.v2)) <= m * (1.0 + 1e-9));
    CHECK(std::abs(p.v1) + std::abs(p.v2) >= m * (1.0 - 1e-9));
  }
  // convexity: counter-clockwise traversal turns left at every vertex
  const auto poly9 = wulff::wulff_boundary(nn2(), 0.9, 128);
  for (std::size_t i = 0; i + 2 < poly9.size(); ++i) {
    const double ax = poly9[i + 1].v1 - poly9[i].v1, ay = poly9[i + 1].v2 - poly9[i].v2;
    const double bx = poly9[i + 2].v1 - poly9[i + 1].v1, by = poly9[i + 2].v2 - poly9[i + 1].v2;
    CHECK(ax * by - ay * bx >= -1e-15);
  }
  CHECK_THROWS_AS(wulff::wulff_boundary(nn2(), 0.5, 4), Error);
  CHECK_THROWS_AS(wulff::wulff_boundary(make_named_kernel(NamedKernel::nn, 3), 0.5, 64), Error);
}

TEST_CASE("norm ball limits") {
  // z -> 0+: nn ball approaches the l1 ball, box ball approaches the linf ball
  CHECK(wulff::norm(nn2(), 0.001, {1, 1}) == doctest::Approx(2.0).epsilon(0.08));
  CHECK(wulff::norm(box2(), 0.001, {1, 1}) == doctest::Approx(1.0).epsilon(0.2));
  // z -> 1: Euclidean
  CHECK(wulff::norm(nn2(), 0.999, {1, 1}) == doctest::Approx(std::sqrt(2.0)).epsilon(5e-3));
  const auto ball = wulff::norm_ball(nn2(), 0.5, 32);
  REQUIRE(ball.size() == 33);
  for (const auto& p : ball) {
    const double r = std::hypot(p.v1, p.v2);
    CHECK(r >= 1.0 / 2.0 - 1e-9);   // inside the l_inf-sandwich bounds
    CHECK(r <= std::sqrt(2.0) + 1e-9);
  }
}

TEST_CASE("closed-form norms agree with the variational solver") {
  oracles::Rng rng(77);
  CHECK(wulff::closed_form_norm_nn(0.37, {1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wulff::closed_form_norm_nn(0.5, {1, 1}) ==
        doctest::Approx(1.4942107595693304).epsilon(1e-12));
  for (int rep = 0; rep < 15; ++rep) {
    const double z = rng.uniform(0.05, 0.95);
    const VecD x{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    if (norm2(x) < 0.3) continue;
    CHECK(wulff::closed_form_norm_nn(z, x) ==
          doctest::Approx(wulff::norm(nn2(), z, x)).epsilon(1e-10));
    CHECK(wulff::closed_form_norm_linf(z, x) ==
          doctest::Approx(wulff::norm(box2(), z, x)).epsilon(1e-10));
  }
  // d=3 spot check of the nn closed form
  const Kernel nn3 = make_named_kernel(NamedKernel::nn, 3);
  CHECK(wulff::closed_form_norm_nn(0.4, {1, 2, -2}) ==
        doctest::Approx(wulff::norm(nn3, 0.4, {1, 2, -2})).epsilon(1e-10));
}

TEST_CASE("z -> 1 degenerate limit returns the Euclidean norm with a warning") {
  const wulff::TiltReport r = wulff::optimal_tilt(nn2(), 1.0 - 1e-9, {3, 4});
  CHECK_FALSE(r.warning.empty());
  CHECK(r.norm_value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("monotonicity scan") {
  VecD grid;
  for (int i = 1; i <= 49; ++i) grid.push_back(0.02 * i);
  // perturbed kernel exceeds max(linf, l2) somewhere
  const Kernel pert = make_named_kernel(NamedKernel::perturbed_nn, 2, {0.05});
  const auto flagged = wulff::monotonicity_scan(pert, {1, 1}, grid);
  CHECK(flagged.flagged);
  CHECK_FALSE(flagged.flagged_z.empty());
  // value at z = 0.5 from the symmetric reduction: 2 arccosh(t)/m
  const double v05 = wulff::norm(pert, 0.5, {1, 1});
  CHECK(v05 == doctest::Approx(1.4637647164711566).epsilon(1e-11));

  // nn decreases from 2 toward sqrt(2), never flagged
  const auto plain = wulff::monotonicity_scan(nn2(), {1, 1}, grid);
  CHECK_FALSE(plain.flagged);
  for (std::size_t i = 1; i < plain.values.size(); ++i)
    CHECK(plain.values[i].second <= plain.values[i - 1].second + 1e-12);
  // axis direction: constant 1
  const auto axis = wulff::monotonicity_scan(nn2(), {1, 0}, grid);
  CHECK_FALSE(axis.flagged);
  for (const auto& [z, v] : axis.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("massive limit of the linf-box norm") {
  // |x|_z -> 1 on the unit linf sphere with error O(1/m_z)
  for (double z : {1e-3, 1e-4}) {
    const double m = wulff::mass(box2(), z);
    for (const VecD& x : {VecD{1, 1}, VecD{1, 0.5}, VecD{1, 0}}) {
      const double v = wulff::norm(box2(), z, x);
      CHECK(std::abs(v - 1.0) <= 2.0 / m);
    }
  }
}

TEST_CASE("saturation kernel mass at and above z_sat") {
  const Kernel sat = make_named_kernel(NamedKernel::saturation_1d, 1, {2.0});
  const double z_sat = 0.45795037358707503;  // 1/(c_2 (zeta(2) + Li_2(e^{-2})))
  CHECK(wulff::mass(sat, z_sat) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(wulff::mass(sat, 0.6) < 1.0);
  try {
    wulff::mass(sat, 0.2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::saturated);
    CHECK(e.data().at("mass") == 1.0);
  }
}
