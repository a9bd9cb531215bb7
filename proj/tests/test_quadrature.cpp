#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rkm/common.hpp"
#include "rkm/quadrature.hpp"

using namespace rkm;

namespace {

StarChart unit_disk_chart() {
  return StarChart([](double t) { return std::polar(1.0, t); },
                   [](double t) { return kI * std::polar(1.0, t); }, 0.0);
}

BoundaryQuadrature unit_circle(int n = 512) {
  return make_boundary_trapezoid([](double t) { return std::polar(1.0, t); },
                                 [](double t) { return kI * std::polar(1.0, t); }, n);
}

}  // namespace

TEST_CASE("boundary trapezoid rule basics", "[quadrature]") {
  const auto q = unit_circle();
  REQUIRE(q.nodes.size() == 512);
  const cplx v = integrate_boundary(q, [](cplx z) { return 1.0 / z; });
  CHECK(std::abs(v - 2.0 * kPi * kI) < 1e-13);
  CHECK_THROWS_AS(unit_circle(511), PreconditionError);
  CHECK_THROWS_AS(unit_circle(0), PreconditionError);
}

TEST_CASE("winding residual over random interior points", "[quadrature]") {
  const auto q = unit_circle();
  Rng rng(20240817u);
  std::vector<cplx> pts;
  for (int i = 0; i < 100; ++i) pts.push_back(rng.annulus(0.0, 0.93));
  CHECK(winding_residual(q, pts) < 1e-8);
}

TEST_CASE("spectral error collapse under node doubling", "[quadrature]") {
  // Integrand with a pole off the contour: the exact integral is 0 and the
  // trapezoid error is visible at low node counts.
  auto f = [](cplx z) { return 1.0 / (z - 1.2); };
  const double e16 = std::abs(integrate_boundary(unit_circle(16), f));
  const double e32 = std::abs(integrate_boundary(unit_circle(32), f));
  REQUIRE(e16 > 1e-12);
  CHECK(e16 / std::max(e32, 1e-300) >= 10.0);
}

TEST_CASE("star chart parametrization round trip", "[quadrature]") {
  // Non-circular star-shaped test curve.
  auto g = [](double t) {
    return std::polar(1.0, t) + 0.12 * std::polar(1.0, -t) + 0.05 * std::polar(1.0, 2.0 * t);
  };
  auto dg = [g](double t) {
    return kI * std::polar(1.0, t) - 0.12 * kI * std::polar(1.0, -t) +
           0.10 * kI * std::polar(1.0, 2.0 * t);
  };
  StarChart chart(g, dg, 0.0);
  Rng rng(7u);
  for (int i = 0; i < 50; ++i) {
    const double s = 0.05 + 0.9 * rng.uniform();
    const double t = 2.0 * kPi * rng.uniform();
    const cplx z = chart.point(s, t);
    const auto [s2, t2] = chart.param_of(z);
    CHECK(std::abs(chart.point(s2, t2) - z) < 1e-10);
    CHECK(std::abs(s2 - s) < 1e-8);
  }
}

TEST_CASE("area rule weights are positive and sum to the area", "[quadrature]") {
  const auto q = make_area_quadrature(unit_disk_chart(), 6, 12);
  double ws = 0.0;
  for (double w : q.weights) {
    REQUIRE(w > 0.0);
    ws += w;
  }
  CHECK(std::abs(ws - kPi) < 1e-10);
  // Second moment of |z| over the unit disk: pi/2.
  const cplx m2 = integrate_area(q, [](cplx z) { return cplx(std::norm(z)); });
  CHECK(std::abs(m2 - kPi / 2.0) < 1e-10);
}

TEST_CASE("refinement near a point preserves total weight", "[quadrature]") {
  const auto q = make_area_quadrature(unit_disk_chart(), 4, 8);
  const double before = q.weight_sum();
  const auto q2 = refine_near(q, {cplx{0.6, 0.2}}, 0.03);
  CHECK(std::abs(q2.weight_sum() - before) < 1e-12);
  CHECK(q2.cells.size() > 32);
  CHECK_THROWS_AS(refine_near(q, {cplx{1.4, 0.0}}, 0.03), GeometryError);
}

TEST_CASE("closed-form reciprocal-distance patches", "[quadrature]") {
  // Unit square with the singularity at its center: 4 * asinh(1).
  const std::array<cplx, 4> sq{cplx{0, 0}, cplx{1, 0}, cplx{1, 1}, cplx{0, 1}};
  const double ref = 4.0 * std::asinh(1.0);
  CHECK(std::abs(quad_recip_abs(sq, cplx{0.5, 0.5}) - ref) < 1e-12);
  // Off-center singularity against a brute midpoint sum.
  const cplx p{0.3, 0.62};
  double brute = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx u{(i + 0.5) / n, (j + 0.5) / n};
      brute += 1.0 / std::abs(u - p) / (double(n) * n);
    }
  CHECK(std::abs(quad_recip_abs(sq, p) - brute) < 2e-3);
}

TEST_CASE("singular cell reduction matches smooth quadrature off-cell", "[quadrature]") {
  const auto chart = unit_disk_chart();
  const Cell c{0.3, 0.4, 0.2, 0.5};
  const cplx z{-0.8, 0.3};  // far from the cell
  const auto nd = chart.cell_nodes(c.s0, c.s1, c.t0, c.t1);
  cplx direct = 0.0;
  for (int i = 0; i < 25; ++i) direct += nd.w[i] / (nd.z[i] - z);
  CHECK(std::abs(cell_recip(chart, c, z) - direct) < 1e-8);
  // Additivity over a 2x2 split: the boundary reduction is exact, so the
  // parent value equals the sum over children to roundoff.
  const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
  const cplx child_sum = cell_recip(chart, Cell{c.s0, sm, c.t0, tm}, z) +
                         cell_recip(chart, Cell{sm, c.s1, c.t0, tm}, z) +
                         cell_recip(chart, Cell{c.s0, sm, tm, c.t1}, z) +
                         cell_recip(chart, Cell{sm, c.s1, tm, c.t1}, z);
  CHECK(std::abs(cell_recip(chart, c, z) - child_sum) < 1e-11);
}

TEST_CASE("adaptive area integration with a declared singularity", "[quadrature]") {
  const auto chart = unit_disk_chart();
  // Reference for int dA / |zeta - 0.9| over the unit disk, reduced to a
  // smooth periodic 1D integral: int_0^{2pi} (-p cos t + sqrt(1 - p^2 sin^2 t)) dt.
  const double p = 0.9;
  double ref = 0.0;
  const int n = 8192;
  for (int j = 0; j < n; ++j) {
    const double t = 2.0 * kPi * j / n;
    ref += (-p * std::cos(t) + std::sqrt(1.0 - p * p * sqr(std::sin(t)))) * (2.0 * kPi / n);
  }
  const auto res = adaptive_area_integrate(
      chart, [p](cplx z) { return cplx(1.0 / std::abs(z - p)); },
      {AbsSingularity{cplx(p, 0.0), [](cplx) { return cplx(1.0); }}}, {}, 1e-9);
  CHECK(std::abs(res.value - ref) < 1e-6);
  CHECK(res.cells_used > 100);
}

TEST_CASE("adaptive area integration refines near marked points", "[quadrature]") {
  const auto chart = unit_disk_chart();
  const cplx w{1.03, 0.0};  // just outside: integrand is smooth but peaked
  const auto res = adaptive_area_integrate(
      chart, [w](cplx z) { return 1.0 / (z - w); }, {}, {w}, 1e-10);
  // Exact by the mean value property: int dA/(z-w) = -pi/w for |w| > 1.
  CHECK(std::abs(res.value - (-kPi / w)) < 1e-7);
}

TEST_CASE("declared singularity with varying cofactor", "[quadrature]") {
  // (Re u + 1)/|u| over the unit disk: the odd part integrates to zero,
  // leaving exactly 2*pi.
  const auto chart = unit_disk_chart();
  const auto res = adaptive_area_integrate(
      chart, [](cplx z) { return cplx((z.real() + 1.0) / std::abs(z)); },
      {AbsSingularity{cplx(0.0), [](cplx u) { return cplx(u.real() + 1.0); }}}, {}, 1e-10);
  CHECK(std::abs(res.value - 2.0 * kPi) < 1e-7);
}

TEST_CASE("undeclared interior pole is refused, not silently mis-integrated", "[quadrature]") {
  const auto chart = unit_disk_chart();
  const cplx w{0.55, 0.2};
  CHECK_THROWS_AS(adaptive_area_integrate(chart, [w](cplx z) { return 1.0 / (z - w); }, {},
                                          {w}, 1e-9, 12),
                  AccuracyError);
}
