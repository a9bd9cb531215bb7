#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"
#include "rkm/kernels.hpp"

using namespace rkm;

namespace {

DomainSpec generic_domain() {
  return DomainSpec::smooth_domain({{1, 1.0}, {-1, 0.12}, {2, 0.05}});
}

}  // namespace

TEST_CASE("disk transform closed forms", "[kernels]") {
  const KernelEvaluator K(DomainSpec::disk_domain(0.0, 1.0));
  // Exterior pair.
  CHECK(std::abs(K.exp_transform(2.0, 3.0) - cplx(5.0 / 6.0)) < 1e-15);
  // Far pair drifts to 1.
  CHECK(std::abs(K.exp_transform(cplx{1e6, 0.0}, cplx{0.0, 1e6}) - 1.0) < 1e-10);
  // Interior pair through the kernel with its own closed form.
  CHECK(std::abs(K.kernel_H(cplx{0.1, 0.0}, cplx{0.2, 0.0}) - 1.0 / 0.98) < 1e-14);
  // Mixed pair is independent of the radius.
  const KernelEvaluator K2(DomainSpec::disk_domain(0.0, 0.7));
  const cplx z{0.1, 0.2}, w{1.4, -0.3};
  CHECK(std::abs(K.exp_transform(z, w) - (1.0 - std::conj(z) / std::conj(w))) < 1e-14);
  CHECK(std::abs(K2.exp_transform(z, w) - K.exp_transform(z, w)) < 1e-14);
}

TEST_CASE("translation covariance on shifted disks", "[kernels]") {
  const cplx c{0.4, -0.2};
  const KernelEvaluator K0(DomainSpec::disk_domain(0.0, 0.8));
  const KernelEvaluator Kc(DomainSpec::disk_domain(c, 0.8));
  for (const auto& [z, w] : {std::pair<cplx, cplx>{{0.2, 0.1}, {1.5, 0.3}},
                             {{2.0, 0.5}, {-1.0, 0.2}},
                             {{0.1, 0.1}, {0.3, -0.2}}}) {
    CHECK(std::abs(Kc.exp_transform(z + c, w + c) - K0.exp_transform(z, w)) < 1e-13);
  }
}

TEST_CASE("hermitian symmetry of the transform", "[kernels]") {
  const KernelEvaluator K(DomainSpec::ellipse_domain(2.0, 1.0));
  for (const auto& [z, w] : {std::pair<cplx, cplx>{{0.3, 0.2}, {-0.5, 0.1}},
                             {{0.3, 0.2}, {4.5, 1.0}},
                             {{5.0, -2.0}, {4.5, 1.0}}}) {
    CHECK(std::abs(K.exp_transform(z, w) - std::conj(K.exp_transform(w, z))) < 1e-12);
  }
}

TEST_CASE("far-argument series agrees with disk closed forms", "[kernels]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const KernelEvaluator Kq(d, Backend::quadrature);
  const KernelEvaluator Kc(d, Backend::closed_form);
  for (const auto& [z, w] : {std::pair<cplx, cplx>{{0.3, 0.2}, {3.0, 1.0}},
                             {{1.1, 0.0}, {3.0, -1.0}},
                             {{-2.5, 0.4}, {0.0, 4.0}}}) {
    CHECK(std::abs(Kq.exp_transform(z, w) - Kc.exp_transform(z, w)) < 1e-11);
  }
}

TEST_CASE("far-argument series agrees with the ellipse interior closed form", "[kernels]") {
  // Both tiers are exercised through the Hermitian flip: w inside, z far.
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  const KernelEvaluator Kq(e, Backend::quadrature);
  const KernelEvaluator Kc(e, Backend::closed_form);
  const cplx zf{4.2, 0.8};  // far
  const cplx wi{0.4, 0.3};  // interior
  // No closed form for mixed pairs; instead check the series against the
  // adaptive tier at the overlap and both against Hermitian symmetry.
  const cplx via_series = Kq.exp_transform(wi, zf);
  const auto direct =
      twopoint_log_integral(e.chart(), wi, zf, [](cplx) { return cplx(1.0); });
  CHECK(std::abs(via_series - std::exp(-direct.value / kPi)) < 1e-9);
  (void)Kc;
}

TEST_CASE("adaptive tier agrees with the ellipse interior closed form", "[kernels]") {
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  const KernelEvaluator Kc(e, Backend::closed_form);
  const cplx z{0.3, 0.2}, w{-0.5, 0.1};
  const auto res = twopoint_log_integral(e.chart(), z, w, [](cplx) { return cplx(1.0); });
  CHECK(std::abs(std::exp(-res.value / kPi) - Kc.exp_transform(z, w)) < 2e-9);
  CHECK(res.err_est < 1e-8);
  // Interior diagonal value of H for the ellipse at the center.
  CHECK(std::abs(Kc.kernel_H(cplx{0.0, 1e-9}, cplx{0.0, 1e-9}) - 9.0 / 16.0) < 1e-12);
}

TEST_CASE("kernel region guards", "[kernels]") {
  const KernelEvaluator K(DomainSpec::ellipse_domain(2.0, 1.0));
  const cplx zi{0.3, 0.2}, zo{3.0, 1.0};
  CHECK_THROWS_AS(K.kernel_H(zi, zo), RegionError);
  CHECK_THROWS_AS(K.kernel_G(zo, zo), RegionError);
  CHECK_THROWS_AS(K.kernel_G(zi, zi), RegionError);
  CHECK_THROWS_AS(K.kernel_G_star(zi, zi), RegionError);
  CHECK_THROWS_AS(K.kernel_G_star(zo, zo), RegionError);
  CHECK_THROWS_AS(K.kernel_F(zi, zo), RegionError);
  CHECK_NOTHROW(K.kernel_G(zi, zo));
  CHECK_NOTHROW(K.kernel_G_star(zo, zi));
  CHECK_NOTHROW(K.kernel_F(zo, zo + cplx{1.0, 0.0}));
}

TEST_CASE("kernels are the advertised ratios of the transform", "[kernels]") {
  const KernelEvaluator K(DomainSpec::disk_domain(0.0, 1.0));
  const cplx zi{0.3, -0.2}, wi{-0.1, 0.4}, zo{1.7, 0.6}, wo{-2.0, 0.3};
  CHECK(std::abs(K.kernel_H(zi, wi) -
                 K.exp_transform(zi, wi) / ((zi - wi) * std::conj(zi - wi))) < 1e-13);
  CHECK(std::abs(K.kernel_G(zi, wo) - K.exp_transform(zi, wo) / std::conj(zi - wo)) <
        1e-13);
  CHECK(std::abs(K.kernel_G_star(zo, wi) + K.exp_transform(zo, wi) / (zo - wi)) < 1e-13);
  CHECK(std::abs(K.kernel_F(zo, wo) - K.exp_transform(zo, wo)) < 1e-15);
}

TEST_CASE("generic domain: series tier against the adaptive tier", "[kernels]") {
  const auto g = generic_domain();
  const KernelEvaluator K(g);
  const cplx z{0.2, 0.15};
  const cplx w{2.4, 0.5};  // beyond the far threshold 1.9 * R_bound
  REQUIRE(std::abs(w) >= 1.9 * g.R_bound());
  const cplx via_series = K.exp_transform(z, w);
  const auto direct =
      twopoint_log_integral(g.chart(), z, w, [](cplx) { return cplx(1.0); });
  CHECK(std::abs(via_series - std::exp(-direct.value / kPi)) < 1e-8);
}

TEST_CASE("weighted transform", "[kernels]") {
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  const cplx z{0.3, 0.2}, w{-0.5, 0.1};
  // Vanishing density: exactly one.
  CHECK(exp_transform_weighted(e, [](cplx) { return cplx(0.0); }, z, w) == cplx(1.0));
  // Unit density reproduces the plain transform.
  const KernelEvaluator Kc(e);
  const cplx e1 = exp_transform_weighted(e, [](cplx) { return cplx(1.0); }, z, w);
  CHECK(std::abs(e1 - Kc.exp_transform(z, w)) < 2e-9);
  // The exponent is linear in the density: half the density, square root.
  const cplx eh = exp_transform_weighted(e, [](cplx) { return cplx(0.5); }, z, w);
  CHECK(std::abs(eh * eh - e1) < 1e-8);
}

TEST_CASE("transform vanishes on the interior diagonal", "[kernels]") {
  const KernelEvaluator K(DomainSpec::ellipse_domain(2.0, 1.0));
  CHECK(std::abs(K.exp_transform(cplx{0.3, 0.2}, cplx{0.3, 0.2})) == 0.0);
  const KernelEvaluator Kd(DomainSpec::disk_domain(0.0, 1.0));
  CHECK(std::abs(Kd.exp_transform(cplx{0.3, 0.2}, cplx{0.3, 0.2})) == 0.0);
}

TEST_CASE("point-mass transforms", "[kernels]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const cplx a{0.3, 0.1}, c{2.0, -1.0};
  const auto mu = CauchyDensity::point(a, c);
  const cplx z{1.5, 0.7};
  CHECK(std::abs(cauchy_area(d, mu, z) - (-(c / kPi) / (a - z))) < 1e-15);
  CHECK_THROWS_AS(cauchy_area(d, mu, a), SingularityError);
}

TEST_CASE("polynomial density transforms via the boundary reduction", "[kernels]") {
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  const auto one = CauchyDensity::monomials({{0, 0, 1.0}});
  const double chi = 1.0 / 3.0;
  // Outside: the decaying part of the boundary conjugate.
  for (const cplx z : {cplx{2.6, 0.4}, cplx{-1.9, 1.2}, cplx{0.0, 1.4}}) {
    CHECK(std::abs(cauchy_area(e, one, z) - (schwarz_value(e, z) - chi * z)) < 1e-11);
  }
  // Inside: conj(z) minus the interior part.
  for (const cplx z : {cplx{0.3, 0.2}, cplx{-0.8, -0.4}}) {
    CHECK(std::abs(cauchy_area(e, one, z) - (std::conj(z) - chi * z)) < 1e-11);
  }
  // Second moment density on the unit disk: 1/(2z) outside.
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const auto mom = CauchyDensity::monomials({{1, 1, 1.0}});
  CHECK(std::abs(cauchy_area(d, mom, cplx{2.0, 0.0}) - 0.25) < 1e-12);
  CHECK(std::abs(cauchy_area(d, mom, cplx{0.0, -3.0}) - cplx{0.0, 1.0 / 6.0}) < 1e-12);
}

TEST_CASE("smooth density transform agrees with the polynomial route", "[kernels]") {
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  CauchyDensity smooth;
  smooth.smooth = [](cplx zeta) { return zeta * std::conj(zeta); };
  const auto poly = CauchyDensity::monomials({{1, 1, 1.0}});
  for (const cplx z : {cplx{2.8, 0.5}, cplx{0.4, 0.2}}) {
    CHECK(std::abs(cauchy_area(e, smooth, z) - cauchy_area(e, poly, z)) < 1e-8);
  }
}

TEST_CASE("boundary transform takes one-sided values", "[kernels]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  auto fsq = [](cplx zeta) { return zeta * zeta; };
  const auto in = cauchy_boundary(d, fsq, cplx{0.3, 0.2});
  CHECK(in.side == Side::inside);
  CHECK_FALSE(in.near_boundary);
  CHECK(std::abs(in.value - (-fsq(cplx{0.3, 0.2}))) < 1e-13);
  const auto out = cauchy_boundary(d, fsq, cplx{1.8, -0.4});
  CHECK(out.side == Side::outside);
  CHECK(std::abs(out.value) < 1e-13);
  // Boundary conjugate data splits into the two one-sided parts.
  auto fc = [](cplx zeta) { return std::conj(zeta); };
  CHECK(std::abs(cauchy_boundary(d, fc, cplx{0.3, 0.2}).value) < 1e-13);
  CHECK(std::abs(cauchy_boundary(d, fc, cplx{1.8, -0.4}).value - 1.0 / cplx{1.8, -0.4}) <
        1e-13);
  // Near-boundary points are flagged.
  CHECK(cauchy_boundary(d, fsq, cplx{1.0 + 1e-7, 0.0}).near_boundary);
}

TEST_CASE("one-sided boundary conjugates", "[kernels]") {
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  const double chi = 1.0 / 3.0;
  CHECK(std::abs(s_plus(e, cplx{0.3, 0.2}) - chi * cplx{0.3, 0.2}) < 1e-14);
  CHECK(std::abs(s_minus(e, cplx{2.5, 0.3}) -
                 (schwarz_value(e, cplx{2.5, 0.3}) - chi * cplx{2.5, 0.3})) < 1e-14);
  CHECK_THROWS_AS(s_minus(e, cplx{0.3, 0.2}), RegionError);
  CHECK_THROWS_AS(s_plus(e, cplx{2.5, 0.3}), RegionError);
  // Generic domain: boundary route against the germ far out.
  const auto g = generic_domain();
  const auto S = schwarz_series(g, 24, 60, 2048);
  const cplx z{3.1, 1.2};
  CHECK(std::abs(s_minus(g, z) - S.tail_eval(z, S.noise_cut(std::abs(z)))) < 1e-9);
  const cplx zi{0.2, 0.1};
  CHECK(std::abs(s_plus(g, zi) - S.plus_eval(zi)) < 1e-9);
}

TEST_CASE("exterior transform continues across the boundary", "[kernels]") {
  const auto e = DomainSpec::ellipse_domain(2.0, 1.0);
  const auto germ = schwarz_series(e, 2, 66);
  const std::vector<Monomial> one{{0, 0, 1.0}};
  const double chi = 1.0 / 3.0;
  // Outside it is the plain transform; inside it continues s_minus.
  for (const cplx z : {cplx{2.6, 0.4}, cplx{0.5, 0.3}, cplx{-0.9, -0.2}}) {
    const cplx expect = schwarz_value(e, z) - chi * z;
    CHECK(std::abs(cauchy_exterior_continued(e, germ, one, z) - expect) < 1e-11);
  }
}
