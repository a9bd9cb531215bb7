#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "rkm/hilbert.hpp"

using namespace rkm;

namespace {

const InnerProductEngine& disk_engine() {
  static InnerProductEngine e(DomainSpec::disk_domain(0.0, 1.0));
  return e;
}

const InnerProductEngine& ellipse_engine() {
  static InnerProductEngine e(DomainSpec::ellipse_domain(2.0, 1.0));
  return e;
}

DomainSpec generic_spec() {
  return DomainSpec::smooth_domain({{1, 1.0}, {-1, 0.12}, {2, 0.05}}, 0.0);
}

const InnerProductEngine& generic_engine() {
  static InnerProductEngine e(generic_spec(), EpsilonSchedule::single(0.12));
  return e;
}

LaurentTail random_tail(Rng& rng, int order) {
  LaurentTail f;
  f.a.resize(static_cast<std::size_t>(order));
  for (auto& c : f.a) c = cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return f;
}

cplx random_interior(Rng& rng, const DomainSpec& d, double margin = 0.65) {
  const double rho = margin * std::sqrt(rng.uniform());
  const double t = rng.uniform(0.0, 2.0 * kPi);
  return d.anchor + rho * (d.curve(t) - d.anchor);
}

cplx random_exterior(Rng& rng, const DomainSpec& d) {
  return std::polar(2.0 * d.R_bound(), rng.uniform(0.0, 2.0 * kPi));
}

std::function<cplx(cplx)> kernel_fn(cplx a) {
  return [a](cplx z) { return 1.0 / (z - a); };
}

}  // namespace

TEST_CASE("epsilon schedule validates and extrapolates exactly", "[hilbert]") {
  REQUIRE_NOTHROW(EpsilonSchedule::standard().validate());
  REQUIRE_THROWS_AS(EpsilonSchedule({{}, 0}).validate(), UsageError);
  REQUIRE_THROWS_AS(EpsilonSchedule({{0.6, 0.3}, 1}).validate(), PreconditionError);
  REQUIRE_THROWS_AS(EpsilonSchedule({{0.02, 0.04}, 1}).validate(), PreconditionError);
  REQUIRE_THROWS_AS(EpsilonSchedule({{0.04, 0.04}, 1}).validate(), PreconditionError);
  REQUIRE_THROWS_AS(EpsilonSchedule({{0.04, 0.02}, 2}).validate(), UsageError);

  // A quadratic trend in eps must be removed exactly by the default schedule.
  const auto& eng = disk_engine();
  const auto& eps = eng.schedule().eps;
  std::vector<cplx> vals;
  for (double e : eps) vals.push_back(cplx{1.5, -0.25} + 2.0 * e + 3.0 * e * e);
  const auto ip = eng.combine_layers(vals);
  REQUIRE(std::abs(ip.value - cplx{1.5, -0.25}) < 1e-12);
}

TEST_CASE("disk pairings hit the closed-form values", "[hilbert]") {
  const auto& eng = disk_engine();

  const auto kk = eng.inner_product(kernel_fn(0.3), kernel_fn(0.3));
  REQUIRE(std::abs(kk.value - 1.0 / 0.91) < 1e-9);

  const auto ss = eng.pair(eng.lifted_s_minus(), eng.lifted_s_minus());
  REQUIRE(std::abs(ss.value - 1.0) < 1e-9);

  LaurentTail z2;
  z2.a = {0.0, 1.0};  // 1/z^2
  const auto ortho = eng.pair(eng.lift_tail(z2), eng.lifted_s_minus());
  REQUIRE(std::abs(ortho.value) < 1e-9);

  const auto fg = eng.inner_product(kernel_fn(cplx{0.2, 0.1}), kernel_fn(-0.4));
  const auto gf = eng.inner_product(kernel_fn(-0.4), kernel_fn(cplx{0.2, 0.1}));
  REQUIRE(std::abs(fg.value - std::conj(gf.value)) < 1e-10);
}

TEST_CASE("point-mass pairing agrees with the contour route", "[hilbert]") {
  const auto& disk = disk_engine();
  REQUIRE(std::abs(inner_product_point_masses(0.0, 0.0, disk) - 1.0) < 1e-12);

  const cplx a{0.3, -0.2}, b{-0.1, 0.25};
  const cplx direct = inner_product_point_masses(a, b, disk);
  const auto contour = disk.inner_product(kernel_fn(a), kernel_fn(b));
  REQUIRE(std::abs(direct - contour.value) < 1e-9);
  REQUIRE(std::abs(direct - std::conj(inner_product_point_masses(b, a, disk))) < 1e-12);

  const auto& ell = ellipse_engine();
  const cplx he = inner_product_point_masses(0.0, 0.5, ell);
  REQUIRE(std::abs(he - 9.0 / 16.75) < 1e-12);
  const auto ce = ell.inner_product(kernel_fn(0.0), kernel_fn(0.5));
  REQUIRE(std::abs(he - ce.value) < 1e-8);

  REQUIRE_THROWS_AS(inner_product_point_masses(cplx{3.0, 0.0}, 0.0, ell), RegionError);
  REQUIRE_THROWS_AS(inner_product_point_masses(0.0, 0.0 - 2.0 * kI, ell), RegionError);
}

TEST_CASE("sign calibration is stable across domains", "[hilbert]") {
  const auto sd = measured_sign(disk_engine());
  REQUIRE(sd.sigma == -1.0);
  REQUIRE(std::abs(sd.ratio - cplx{-1.0}) < 1e-8);
  REQUIRE(std::abs(sd.moment - 1.0) < 1e-12);

  const auto se = measured_sign(ellipse_engine());
  REQUIRE(se.sigma == -1.0);
  REQUIRE(std::abs(se.ratio - cplx{-1.0}) < 1e-7);
  REQUIRE(std::abs(se.moment - 2.0) < 1e-12);
  REQUIRE(std::abs(se.pairing - 2.0) < 1e-6);
}

TEST_CASE("tail pairing against the decaying part matches the residue rule",
          "[hilbert]") {
  Rng rng(314159);
  for (const InnerProductEngine* eng : {&disk_engine(), &ellipse_engine()}) {
    const double sigma = measured_sign(*eng).sigma;
    for (int rep = 0; rep < 4; ++rep) {
      const LaurentTail f = random_tail(rng, 8);
      const cplx lhs = eng->pair(eng->lift_tail(f), eng->lifted_s_minus()).value;
      const cplx rhs = sigma * residue_at_infinity(f);
      REQUIRE(std::abs(lhs - rhs) < 1e-6);
    }
  }
}

TEST_CASE("norms of the classical densities", "[hilbert]") {
  const auto& eng = disk_engine();

  const auto nz = norm_H(HElement::density({Monomial{1, 0, 1.0}}), eng);
  REQUIRE(nz.value < 1e-7);

  const auto nz2 = norm_H(HElement::density({Monomial{1, 1, 1.0}}), eng);
  REQUIRE(std::abs(nz2.value - 0.5) < 1e-4);

  const cplx a{0.2, 0.0};
  const auto np = norm_H(HElement::point_mass(a), eng);
  const double expect = std::sqrt(std::real(inner_product_point_masses(a, a, eng))) / kPi;
  REQUIRE(std::abs(np.value - expect) < 1e-12);
  REQUIRE_FALSE(np.clamped);
}

TEST_CASE("null tests recognize the classical null densities", "[hilbert]") {
  const auto& disk = disk_engine();
  const auto& ell = ellipse_engine();

  const auto r1 = null_test(HElement::density({Monomial{1, 0, 1.0}}), disk);
  REQUIRE(r1.is_null);

  // (a^2-b^2) conj(zeta) - (a^2+b^2) zeta with a=2, b=1.
  const auto r2 = null_test(
      HElement::density({Monomial{0, 1, 3.0}, Monomial{1, 0, -5.0}}), ell);
  REQUIRE(r2.is_null);

  const auto r3 = null_test(HElement::density({Monomial{1, 0, -1.0}}), disk);
  REQUIRE(r3.is_null);

  const auto r4 = null_test(HElement::density({Monomial{0, 0, 1.0}}), disk);
  REQUIRE_FALSE(r4.is_null);
  REQUIRE(r4.norm > 0.9);
  REQUIRE(r4.sup_exterior > 0.1);
}

TEST_CASE("decomposition instability demo", "[hilbert]") {
  const auto demo = decomposition_instability_demo(disk_engine());
  REQUIRE(demo.null_norm < 1e-7);
  REQUIRE(std::abs(demo.product_norm - 0.5) < 1e-4);

  const auto scaled = norm_H(HElement::density({Monomial{1, 0, 2.0}}), disk_engine());
  REQUIRE(scaled.value < 2e-7);
  const auto pair12 = norm_H(
      HElement::density({Monomial{1, 0, 1.0}, Monomial{2, 0, 1.0}}), disk_engine());
  REQUIRE(pair12.value < 1e-6);

  REQUIRE_THROWS_AS(decomposition_instability_demo(ellipse_engine()),
                    PreconditionError);
}

TEST_CASE("reproducing kernel closed form on the disk", "[hilbert]") {
  const auto& eng = disk_engine();
  const cplx w{1.7, 0.6};
  const auto L = reproducing_kernel_L(eng, w);

  for (const cplx z : {cplx{2.2, -0.3}, cplx{-1.8, 1.1}}) {
    REQUIRE(std::abs(L(z) - 1.0 / (z * std::conj(w) - 1.0)) < 1e-12);
  }
  // Continuation through the domain agrees with the same rational function.
  for (const cplx z : {cplx{0.3, 0.1}, cplx{-0.5, -0.4}}) {
    REQUIRE(std::abs(L(z) - 1.0 / (z * std::conj(w) - 1.0)) < 1e-10);
  }

  const auto far = reproducing_kernel_L(eng, 1e6);
  REQUIRE(std::abs(far(cplx{2.0, 1.0})) < 1e-5);

  REQUIRE_THROWS_AS(reproducing_kernel_L(eng, cplx{0.2, 0.1}), RegionError);

  // The tail of L(., w) is an element of the model space with finite norm.
  const auto fit = tail_from_samples([&L](cplx z) { return L(z); },
                                     2.5 * eng.domain().R_bound(), 24, 96, 1e-6);
  const auto nt = norm_H(HElement::from_tail(fit.tail), eng);
  REQUIRE(std::isfinite(nt.value));
  REQUIRE(nt.value < 10.0);
}

TEST_CASE("reproduction on closed-form domains", "[hilbert]") {
  Rng rng(271828);
  for (const InnerProductEngine* eng : {&disk_engine(), &ellipse_engine()}) {
    const LiftedElement* dummy = nullptr;
    (void)dummy;
    for (int rep = 0; rep < 20; ++rep) {
      const cplx a = random_interior(rng, eng->domain());
      const cplx w = random_exterior(rng, eng->domain());
      const auto L = reproducing_kernel_L(*eng, w);
      const auto ip = eng->inner_product(kernel_fn(a), [&L](cplx z) { return L(z); });
      REQUIRE(std::abs(ip.value - 1.0 / (w - a)) < 1e-5);
    }
  }
}

TEST_CASE("reproduction and calibration on a generic domain", "[hilbert]") {
  const auto& eng = generic_engine();

  const auto sc = measured_sign(eng);
  REQUIRE(sc.sigma == -1.0);
  REQUIRE(std::abs(sc.ratio - cplx{-1.0}) < 2e-3);

  Rng rng(979323);
  for (int rep = 0; rep < 20; ++rep) {
    const cplx a = random_interior(rng, eng.domain(), 0.55);
    const cplx w = random_exterior(rng, eng.domain());
    const auto L = reproducing_kernel_L(eng, w);
    const auto ip = eng.inner_product(kernel_fn(a), [&L](cplx z) { return L(z); });
    REQUIRE(std::abs(ip.value - 1.0 / (w - a)) < 1e-3);
  }

  const auto hs = integral_h_sminus(eng, 0.05);
  REQUIRE(std::abs(hs.value - 1.0) < 1e-3);
}

TEST_CASE("gram matrix of the monomial densities has the exact block law",
          "[hilbert]") {
  const auto& eng = disk_engine();
  std::vector<HElement> els;
  std::vector<int> diag;  // k - n
  for (int n = 0; n < 3; ++n)
    for (int k = 0; k < 3; ++k) {
      els.push_back(HElement::density({Monomial{n, k, cplx(k + 1.0)}}));
      diag.push_back(k - n);
    }
  const auto g = gram_matrix(els, eng);
  REQUIRE(g.matrix.rows() == 9);
  REQUIRE(g.min_eigenvalue > -1e-8);

  double law_dev = 0.0, identity_dev = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const double law =
          (diag[i] == diag[j] && diag[i] >= 0) ? 1.0 : 0.0;
      law_dev = std::max(law_dev, std::abs(g.matrix(i, j) - law));
      identity_dev =
          std::max(identity_dev, std::abs(g.matrix(i, j) - (i == j ? 1.0 : 0.0)));
    }
  REQUIRE(law_dev < 1e-6);
  // The same family is far from orthonormal: distinct indices with equal
  // k - n share one model representative.
  REQUIRE(identity_dev > 0.9);

  const auto single = gram_matrix(
      std::vector<LaurentTail>{s_minus_tail(eng.domain(), 32)}, eng);
  REQUIRE(single.matrix.rows() == 1);
  REQUIRE(std::abs(single.matrix(0, 0) - 1.0) < 1e-7);
  REQUIRE(gram_matrix(std::vector<HElement>{}, eng).matrix.rows() == 0);
}

TEST_CASE("density pairing against the unit density integrates the density",
          "[hilbert]") {
  const std::vector<std::vector<Monomial>> gs = {
      {Monomial{0, 0, 1.0}},
      {Monomial{1, 0, 1.0}},
      {Monomial{1, 1, 1.0}},
      {Monomial{2, 0, 0.5}, Monomial{0, 1, cplx{0.0, 2.0}}},
  };
  for (const InnerProductEngine* eng : {&disk_engine(), &ellipse_engine()}) {
    const HElement one = HElement::density({Monomial{0, 0, 1.0}});
    for (const auto& g : gs) {
      const auto ip = inner_product_H(HElement::density(g), one, *eng);
      const auto area = adaptive_area_integrate(
          eng->domain().chart(), [&g](cplx u) { return poly_eval(g, u); }, {}, {},
          1e-10);
      REQUIRE(std::abs(ip.value - area.value / kPi) < 1e-7);
    }
  }
}

TEST_CASE("rank-one projection matches the commutator action", "[hilbert]") {
  Rng rng(161803);
  for (const InnerProductEngine* eng : {&disk_engine(), &ellipse_engine()}) {
    const double sigma = measured_sign(*eng).sigma;
    const auto S = schwarz_series(eng->domain(), 4, 96);
    for (int rep = 0; rep < 3; ++rep) {
      const LaurentTail f = random_tail(rng, 8);
      const auto proj = rank_one_projection(f, *eng);
      const LaurentTail cf = commutator_apply(S, f);
      double worst = 0.0;
      for (int k = 0; k < cf.order(); ++k)
        worst = std::max(worst,
                         std::abs(cf.coeff(k) - sigma * proj.value.coeff(k)));
      REQUIRE(worst < 1e-7);
    }
  }
}

TEST_CASE("contour identities for the interior kernel", "[hilbert]") {
  Rng rng(577215);
  for (const InnerProductEngine* eng : {&disk_engine(), &ellipse_engine()}) {
    for (int rep = 0; rep < 5; ++rep) {
      const cplx a = random_interior(rng, eng->domain());
      const auto hs = integral_h_sminus(*eng, a);
      REQUIRE(std::abs(hs.value - 1.0) < 1e-6);

      const cplx w = random_exterior(rng, eng->domain());
      const auto he = integral_h_inv_e(*eng, a, w);
      REQUIRE(std::abs(he.value - 1.0 / (std::conj(w) - std::conj(a))) < 1e-5);
    }
  }
  REQUIRE_THROWS_AS(integral_h_sminus(disk_engine(), cplx{0.97, 0.0}),
                    PreconditionError);
  REQUIRE_THROWS_AS(integral_h_inv_e(disk_engine(), 0.0, cplx{0.5, 0.0}),
                    RegionError);
}

TEST_CASE("taylor coefficients of the interior kernel", "[hilbert]") {
  const auto td = kernel_taylor_gram(disk_engine(), 8, 0.6, 128);
  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k)
      REQUIRE(std::abs(td(j, k) - (j == k ? 1.0 : 0.0)) < 1e-9);

  const auto t90 = kernel_taylor_gram(ellipse_engine(), 16, 0.90);
  const auto t95 = kernel_taylor_gram(ellipse_engine(), 16, 0.95);
  REQUIRE(std::abs(t95(0, 0) - 9.0 / 16.0) < 1e-8);
  double asym = 0.0, imag_part = 0.0, drift = 0.0;
  for (int j = 0; j < 16; ++j)
    for (int k = 0; k < 16; ++k) {
      asym = std::max(asym, std::abs(t95(j, k) - t95(k, j)));
      imag_part = std::max(imag_part, std::abs(std::imag(t95(j, k))));
      drift = std::max(drift, std::abs(t95(j, k) - t90(j, k)));
    }
  REQUIRE(asym < 1e-8);
  REQUIRE(imag_part < 1e-9);
  REQUIRE(drift < 1e-6);

  // Compression of the squared norm of the decaying part: the head of the
  // inverse approaches M_0 = 2 from below, still short by ~2.5e-3 at N=16.
  const double head = gram_inverse_head(t95);
  REQUIRE(2.0 - head > 2.2e-3);
  REQUIRE(2.0 - head < 2.6e-3);

  REQUIRE_THROWS_AS(kernel_taylor_gram(ellipse_engine(), 16, 1.2), PreconditionError);
  REQUIRE_THROWS_AS(kernel_taylor_gram(disk_engine(), 0, 0.5), UsageError);
}

TEST_CASE("exhaustion diagnostics and the convergence guard", "[hilbert]") {
  const auto& eng = disk_engine();
  const auto ip = eng.inner_product(kernel_fn(0.3), kernel_fn(0.3));
  REQUIRE(ip.diffs.size() == 2);
  const double scale = std::abs(ip.value);
  REQUIRE(ip.diffs.back() <= std::max(ip.diffs.front(), 1e-9 * scale));
  REQUIRE(ip.residual <= 10.0 * ip.diffs.back() + 1e-12 * scale);

  REQUIRE_THROWS_AS(eng.combine_layers({cplx{1.0}, cplx{1.1}, cplx{1.4}}),
                    ConvergenceError);
  REQUIRE_NOTHROW(eng.combine_layers({cplx{1.0}, cplx{1.1}, cplx{1.05}}));
  REQUIRE_THROWS_AS(eng.combine_layers({cplx{1.0}}), UsageError);
}
