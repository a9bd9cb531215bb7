#pragma once
// Identity catalog for the verification CLI. Each check exercises one of the
// library's defining identities on the configured domain and returns a
// record with the computed value, the expected value, the absolute error and
// the verdict against a pinned tolerance. Anchors are stable catalog tags,
// not external citations.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"
#include "rkm/field.hpp"
#include "rkm/hilbert.hpp"
#include "rkm/kernels.hpp"
#include "rkm/laurent.hpp"
#include "rkm/operators.hpp"
#include "rkm/quadrature.hpp"
#include "rkm/report.hpp"

namespace rkm {

// Frozen calibration of the contour/residue sign convention; re-measured by
// the model/sign-calibration check on every engine-backed run.
inline constexpr double kCalibratedSign = -1.0;

inline std::string domain_label(const DomainSpec& d) {
  switch (d.kind) {
    case DomainKind::disk:
      return "disk r=" + detail::fmt_double(d.scale * d.r, 6);
    case DomainKind::ellipse:
      return "ellipse a=" + detail::fmt_double(d.scale * d.a, 6) +
             " b=" + detail::fmt_double(d.scale * d.b, 6);
    case DomainKind::smooth:
      return "smooth";
  }
  return "unknown";
}

// Shared lazily-built state for one verification run. Engines and kernel
// evaluators are expensive; checks pull them through the accessors so a
// suite builds each at most once.
class CheckContext {
 public:
  explicit CheckContext(DomainSpec d, std::uint64_t seed = 979323,
                        double tol_override = 0.0, int order = 16)
      : dom_(std::move(d)), seed_(seed), tol_override_(tol_override), order_(order) {}

  const DomainSpec& domain() const { return dom_; }
  std::uint64_t seed() const { return seed_; }
  double tol_override() const { return tol_override_; }
  int order() const { return order_; }
  bool smooth() const { return dom_.kind == DomainKind::smooth; }

  const InnerProductEngine& engine() {
    if (!eng_)
      eng_ = std::make_shared<InnerProductEngine>(
          dom_, smooth() ? EpsilonSchedule::single(0.12) : EpsilonSchedule::standard());
    return *eng_;
  }
  bool engine_built() const { return static_cast<bool>(eng_); }

  // Closed forms where the domain has them, quadrature tiers elsewhere.
  const KernelEvaluator& kernels() {
    if (!kc_) kc_ = std::make_shared<KernelEvaluator>(dom_, Backend::closed_form, tier3());
    return *kc_;
  }
  // Quadrature forced even when closed forms exist; cross-validation backend.
  const KernelEvaluator& kernels_quadrature() {
    if (!kq_) kq_ = std::make_shared<KernelEvaluator>(dom_, Backend::quadrature, tier3());
    return *kq_;
  }

 private:
  Tier3Options tier3() const {
    Tier3Options t;
    if (smooth()) {
      t.subtracted = true;
      t.tol = 1e-6;
      t.kink_floor = 4e-3 * dom_.diam();
    }
    return t;
  }

  DomainSpec dom_;
  std::uint64_t seed_;
  double tol_override_;
  int order_;
  std::shared_ptr<InnerProductEngine> eng_;
  std::shared_ptr<KernelEvaluator> kc_, kq_;
};

namespace checks_detail {

inline cplx random_interior(Rng& rng, const DomainSpec& d, double margin = 0.6) {
  const double rho = margin * std::sqrt(rng.uniform());
  const double t = rng.uniform(0.0, 2.0 * kPi);
  return d.anchor + rho * (d.curve(t) - d.anchor);
}

inline cplx random_exterior(Rng& rng, const DomainSpec& d) {
  return std::polar(2.0 * d.R_bound(), rng.uniform(0.0, 2.0 * kPi));
}

inline LaurentTail random_tail(Rng& rng, int order) {
  LaurentTail f;
  f.a.resize(static_cast<std::size_t>(order));
  for (auto& c : f.a) c = cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return f;
}

inline CheckRecord make(const char* name, const char* anchor, CheckContext& ctx,
                        cplx computed, cplx expected, double tol,
                        std::string note = {}) {
  CheckRecord r;
  r.name = name;
  r.anchor = anchor;
  r.domain = domain_label(ctx.domain());
  r.computed = computed;
  r.expected = expected;
  r.abs_err = std::abs(computed - expected);
  r.tol = tol;
  r.pass = r.abs_err <= tol;
  r.note = std::move(note);
  return r;
}

// Classical polynomial null density for the domain, when one is known.
inline HElement classical_null(const DomainSpec& d) {
  if (d.kind == DomainKind::disk) return HElement::density({Monomial{1, 0, 1.0}});
  if (d.kind == DomainKind::ellipse) {
    const double ae = d.scale * d.a, be = d.scale * d.b;
    return HElement::density(
        {Monomial{0, 1, ae * ae - be * be}, Monomial{1, 0, -(ae * ae + be * be)}});
  }
  throw PreconditionError("no classical null density for smooth domains");
}

// Constructed null for any domain: the density zeta dA together with the
// tail that cancels its exterior transform termwise. The transform
// coefficients are the interior analytic moments, reduced to the boundary.
inline HElement constructed_null(const DomainSpec& d, int order = 48) {
  const auto q = boundary_quadrature(d, 4096);
  HElement el = HElement::density({Monomial{1, 0, 1.0}});
  LaurentTail t;
  t.a.resize(static_cast<std::size_t>(order));
  for (int m = 0; m < order; ++m) {
    cplx acc = 0.0;  // int u^{m+1} dA = (1/2i) oint conj(u) u^{m+1} du
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      acc += std::conj(q.nodes[j]) * ipow(q.nodes[j], m + 1) * q.dz[j];
    t.a[static_cast<std::size_t>(m)] = -(acc / (2.0 * kI)) / kPi;
  }
  el.tail = std::move(t);
  return el;
}

}  // namespace checks_detail

struct CheckDef {
  const char* name;
  const char* anchor;
  const char* suites;  // space-separated memberships, excluding "all"
  bool (*applies)(const DomainSpec&);
  std::function<CheckRecord(CheckContext&)> run;
};

namespace checks_detail {

inline bool any_domain(const DomainSpec&) { return true; }
inline bool closed_domain(const DomainSpec& d) { return d.kind != DomainKind::smooth; }
inline bool disk_only(const DomainSpec& d) { return d.kind == DomainKind::disk; }
inline bool unit_disk_only(const DomainSpec& d) {
  return d.kind == DomainKind::disk && std::abs(d.center) < 1e-12 &&
         std::abs(d.scale * d.r - 1.0) < 1e-12;
}
inline bool ellipse_only(const DomainSpec& d) { return d.kind == DomainKind::ellipse; }

// --- kernels ---------------------------------------------------------------

inline CheckRecord chk_e_far(CheckContext& ctx) {
  const cplx v = ctx.kernels_quadrature().exp_transform(cplx(1e6, 0.0), cplx(0.0, 1e6));
  return make("e-far-normalization", "kernel/e-far-normalization", ctx, v, 1.0, 1e-6);
}

inline CheckRecord chk_e_hermitian(CheckContext& ctx) {
  Rng rng(ctx.seed());
  const auto& K = ctx.kernels_quadrature();
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const cplx z = rep % 2 == 0 ? random_interior(rng, ctx.domain())
                                : random_exterior(rng, ctx.domain());
    const cplx w = random_exterior(rng, ctx.domain());
    worst = std::max(worst,
                     std::abs(K.exp_transform(z, w) - std::conj(K.exp_transform(w, z))));
  }
  return make("e-hermitian-symmetry", "kernel/e-hermitian", ctx, worst, 0.0, 1e-5,
              "worst of 5 random pairs");
}

inline CheckRecord chk_h_disk_value(CheckContext& ctx) {
  const cplx v = ctx.kernels().kernel_H(0.1, 0.2);
  return make("h-disk-closed-form", "kernel/h-closed-form", ctx, v, 1.0 / 0.98, 1e-13);
}

inline CheckRecord chk_h_backends(CheckContext& ctx) {
  Rng rng(ctx.seed() + 1);
  double worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    cplx z = random_interior(rng, ctx.domain(), 0.55);
    cplx w = random_interior(rng, ctx.domain(), 0.55);
    if (std::abs(z - w) < 0.1 * ctx.domain().diam()) w = ctx.domain().anchor;
    worst = std::max(worst, std::abs(ctx.kernels().kernel_H(z, w) -
                                     ctx.kernels_quadrature().kernel_H(z, w)));
  }
  return make("h-backend-consistency", "kernel/h-backend-consistency", ctx, worst, 0.0,
              1e-5, "closed form vs quadrature, 3 pairs");
}

inline CheckRecord chk_h_normalization(CheckContext& ctx) {
  Rng rng(ctx.seed() + 2);
  const auto& K = ctx.kernels();
  const auto chart = ctx.domain().chart();
  const int n_anchors = ctx.smooth() ? 2 : 5;
  const double tol = ctx.smooth() ? 1e-4 : 1e-8;
  double worst = 0.0;
  for (int rep = 0; rep < n_anchors; ++rep) {
    const cplx a = random_interior(rng, ctx.domain(), 0.5);
    // Near-diagonal patch: H is bounded and analytic in the first slot, but
    // the smooth-domain quadrature route loses accuracy at tiny separation;
    // the patch substitutes an offset evaluation.
    const double r_patch = ctx.smooth() ? 0.008 * ctx.domain().diam() : 0.0;
    cplx patch = 0.0;
    if (r_patch > 0.0) patch = K.kernel_H(a + cplx(r_patch, 0.0), a);
    const auto res = adaptive_area_integrate(
        chart,
        [&](cplx u) {
          if (r_patch > 0.0 && std::abs(u - a) < r_patch) return patch / kPi;
          return K.kernel_H(u, a) / kPi;
        },
        {}, {a}, ctx.smooth() ? 5e-6 : 1e-10, ctx.smooth() ? 8 : 12);
    worst = std::max(worst, std::abs(res.value - 1.0));
  }
  return make("h-area-normalization", "kernel/h-normalization", ctx, worst, 0.0, tol,
              "worst of " + std::to_string(n_anchors) + " anchors");
}

inline CheckRecord chk_match_g(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto& K = ctx.kernels();
  const double delta = 1e-3 * 0.5 * d.diam();
  const cplx z = d.anchor + 0.45 * (d.curve(0.9) - d.anchor);
  double worst = 0.0;
  for (double t : {0.3, 2.1, 4.0, 5.5}) {
    const cplx wb = d.curve(t);
    const cplx inward = (d.anchor - wb) / std::abs(d.anchor - wb);
    const cplx w_in = wb + delta * inward, w_out = wb - delta * inward;
    worst = std::max(worst, std::abs(K.kernel_H(z, w_in) * (z - w_in) -
                                     K.kernel_G(z, w_out)));
  }
  return make("match-h-g-boundary", "kernel/match-boundary-g", ctx, worst, 0.0, 1e-3,
              "second argument crosses the boundary");
}

inline CheckRecord chk_match_gstar(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto& K = ctx.kernels();
  const double delta = 1e-3 * 0.5 * d.diam();
  const cplx w = d.anchor + 0.40 * (d.curve(2.6) - d.anchor);
  double worst = 0.0;
  for (double t : {0.7, 1.9, 3.6, 5.1}) {
    const cplx zb = d.curve(t);
    const cplx inward = (d.anchor - zb) / std::abs(d.anchor - zb);
    const cplx z_in = zb + delta * inward, z_out = zb - delta * inward;
    worst = std::max(worst,
                     std::abs(K.kernel_H(z_in, w) * (std::conj(z_in) - std::conj(w)) +
                              K.kernel_G_star(z_out, w)));
  }
  return make("match-h-gstar-boundary", "kernel/match-boundary-gstar", ctx, worst, 0.0,
              1e-3, "first argument crosses the boundary");
}

inline CheckRecord chk_match_f(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto& K = ctx.kernels();
  const double delta = 1e-3 * 0.5 * d.diam();
  Rng rng(ctx.seed() + 3);
  const cplx w = random_exterior(rng, d);
  double worst = 0.0;
  for (double t : {0.2, 1.5, 3.3, 4.8}) {
    const cplx zb = d.curve(t);
    const cplx inward = (d.anchor - zb) / std::abs(d.anchor - zb);
    const cplx z_in = zb + delta * inward, z_out = zb - delta * inward;
    worst = std::max(worst,
                     std::abs(K.kernel_G(z_in, w) * (std::conj(z_in) - std::conj(w)) -
                              K.kernel_F(z_out, w)));
  }
  return make("match-g-f-boundary", "kernel/match-boundary-f", ctx, worst, 0.0, 1e-3,
              "first argument crosses the boundary");
}

inline CheckRecord chk_g_asymptotics(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto& K = ctx.kernels();
  const cplx z = d.anchor + 0.3 * (d.curve(0.0) - d.anchor);
  const cplx dir = std::polar(1.0, 0.63);
  const double R = d.R_bound();
  const double e10 = std::abs(K.kernel_G(z, 10.0 * R * dir) +
                              1.0 / std::conj(10.0 * R * dir));
  const double e100 = std::abs(K.kernel_G(z, 100.0 * R * dir) +
                               1.0 / std::conj(100.0 * R * dir));
  const double expo = std::log10(e10 / e100);
  return make("g-asymptotic-decay", "kernel/g-asymptotics", ctx,
              std::min(expo, 2.0), 2.0, 0.1,
              "fitted decay exponent " + detail::fmt_double(expo, 4) +
                  " between |w| = 10R and 100R");
}

inline CheckRecord chk_transform_of_g(CheckContext& ctx) {
  Rng rng(ctx.seed() + 4);
  const auto& K = ctx.kernels();
  const auto chart = ctx.domain().chart();
  const int pairs = ctx.smooth() ? 3 : 5;
  double worst = 0.0;
  for (int rep = 0; rep < pairs; ++rep) {
    const cplx z = random_exterior(rng, ctx.domain());
    const cplx w = random_exterior(rng, ctx.domain());
    const auto res = adaptive_area_integrate(
        chart, [&](cplx u) { return K.kernel_G(u, w) / (kPi * (z - u)); }, {}, {},
        1e-9, 10);
    worst = std::max(worst, std::abs(res.value - (K.kernel_F(z, w) - 1.0)));
  }
  return make("transform-of-g", "kernel/transform-of-g", ctx, worst, 0.0, 1e-5,
              "area transform of G(., w) vs E - 1, " + std::to_string(pairs) +
                  " pairs");
}

inline CheckRecord chk_transform_of_h(CheckContext& ctx) {
  Rng rng(ctx.seed() + 5);
  const auto& K = ctx.kernels();
  const auto chart = ctx.domain().chart();
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const cplx z = random_exterior(rng, ctx.domain());
    const cplx w = random_interior(rng, ctx.domain(), 0.55);
    const auto res = adaptive_area_integrate(
        chart, [&](cplx u) { return K.kernel_H(u, w) / (kPi * (z - u)); }, {}, {w},
        1e-9, 10);
    worst = std::max(worst, std::abs(res.value + K.kernel_G_star(z, w)));
  }
  return make("transform-of-h", "kernel/transform-of-h", ctx, worst, 0.0, 1e-5,
              "area transform of H(., w) vs -G*, 5 pairs");
}

inline CheckRecord chk_diag_boundary(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto& K = ctx.kernels();
  const cplx zb = d.curve(0.8);
  double prev_inv = -1.0, viol = 0.0;
  std::vector<double> hs;
  for (double t : {0.2, 0.1, 0.05, 0.025}) {
    const cplx zt = (1.0 - t) * zb + t * d.anchor;
    double h;
    if (!ctx.smooth()) {
      h = std::real(K.kernel_H(zt, zt));
    } else {
      // Separated proxy: the smooth-domain quadrature diagonal is unreliable.
      const cplx u = (d.anchor - zt) / std::abs(d.anchor - zt);
      h = std::real(K.kernel_H(zt, zt + 0.01 * d.diam() * u));
    }
    hs.push_back(h);
    if (!(h > 0.0)) viol = std::max(viol, 1.0 - h);
    const double inv = 1.0 / h;
    if (prev_inv >= 0.0 && inv >= prev_inv) viol = std::max(viol, inv - prev_inv);
    prev_inv = inv;
  }
  std::string note = "1/H along the inward ray:";
  for (double h : hs) note += " " + detail::fmt_double(1.0 / h, 4);
  note += " (positive, decreasing toward the boundary)";
  return make("h-diagonal-boundary", "kernel/diagonal-boundary", ctx, viol, 0.0, 0.0,
              note);
}

inline CheckRecord chk_weighted_trivial(CheckContext& ctx) {
  const cplx v = exp_transform_weighted(
      ctx.domain(), [](cplx) { return cplx(0.0); }, cplx(0.3, 0.2), cplx(5.0, 1.0));
  return make("weighted-zero-density", "kernel/weighted-trivial", ctx, v, 1.0, 1e-12,
              "vanishing density gives E identically 1");
}

// --- operators -------------------------------------------------------------

inline CheckRecord chk_moment_shift(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto M = exterior_moments(d, 23);
  auto t = s_minus_tail(d, 20);
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    t = op_Z(t);
    for (int k = 0; k + n < 20 && k < 6; ++k)
      worst = std::max(worst,
                       std::abs(t.coeff(k) - M[static_cast<std::size_t>(k + n)]));
  }
  return make("moment-shift-walk", "operator/moment-shift", ctx, worst, 0.0, 1e-10,
              "iterated forward shift against the moment sequence");
}

inline CheckRecord chk_moments_quadrature(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const auto S = schwarz_series(d, 2, 10, 2048);
  double worst = 0.0;
  for (int k = -2; k <= 10; ++k) {
    if (d.kind == DomainKind::smooth) break;
    // Quadrature route recomputed against the closed forms.
    const auto q = boundary_quadrature(d, 2048);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      acc += std::conj(q.nodes[j]) * ipow(q.nodes[j], k) * q.dz[j];
    acc /= 2.0 * kPi * kI;
    worst = std::max(worst, std::abs(acc - moment_closed_form(d, k)));
  }
  return make("moments-quadrature", "operator/moments-quadrature", ctx, worst, 0.0,
              1e-8, "boundary quadrature vs closed-form moments, k = -2..10");
}

inline CheckRecord chk_adjoint_routes(CheckContext& ctx) {
  Rng rng(ctx.seed() + 6);
  const DomainSpec& d = ctx.domain();
  const auto S = schwarz_series(d, 2, 30);
  const double R = d.R_bound();
  const int tails = ctx.smooth() ? 5 : 20;
  double worst = 0.0;
  for (int trial = 0; trial < tails; ++trial) {
    const auto f = random_tail(rng, 8);
    const auto fn = [&](cplx zeta) { return evaluate_finite(f, zeta); };
    const auto sf = op_Z_star(S, f, 28);
    for (int p = 0; p < 10; ++p) {
      const cplx z = rng.annulus(2.5 * R, 4.0 * R);
      worst = std::max(worst, std::abs(evaluate(sf, z, R).value -
                                       op_Z_star_boundary(d, fn, z).value));
    }
  }
  return make("adjoint-two-routes", "operator/adjoint-two-routes", ctx, worst, 0.0,
              1e-7, "series convolution vs boundary integral, " +
                        std::to_string(tails) + " tails x 10 points");
}

inline CheckRecord chk_commutator_series(CheckContext& ctx) {
  Rng rng(ctx.seed() + 7);
  const auto S = schwarz_series(ctx.domain(), 2, 30);
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const auto g = random_tail(rng, 6);
    const auto cg = commutator_apply(S, g);
    for (int k = 0; k < 6; ++k)
      worst = std::max(worst, std::abs(cg.coeff(k) - residue_at_infinity(g) * S.M(k)));
  }
  return make("commutator-rank-one", "operator/commutator-rank-one", ctx, worst, 0.0,
              1e-7, "commutator vs residue times the decaying part");
}

inline CheckRecord chk_commutator_matrix(CheckContext& ctx) {
  const auto C = matrix_truncation(ModelOp::commutator, ctx.domain(), ctx.order());
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(C));
  const double s1 = svd.singularValues()(0);
  const double s2 = svd.singularValues()(1);
  return make("commutator-truncation-rank", "operator/commutator-truncation", ctx,
              s2 / s1, 0.0, 1e-6,
              "sigma2/sigma1 of the order-" + std::to_string(ctx.order()) +
                  " truncation");
}

inline CheckRecord chk_commutator_sigma1(CheckContext& ctx) {
  const auto C = matrix_truncation(ModelOp::commutator, ctx.domain(), ctx.order());
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(C));
  const double s1 = svd.singularValues()(0);
  const double m0 = ctx.domain().area() / kPi;
  std::string note =
      "sigma1 in the coefficient basis vs the squared model norm of the "
      "decaying part";
  if (std::abs(s1 - m0) > 1e-5)
    note +=
        "; the coefficient-basis singular value is the l2 norm of the moment "
        "column and exceeds the model norm whenever the moments grow";
  return make("commutator-norm-match", "operator/commutator-norm-match", ctx, s1, m0,
              1e-5, note);
}

inline CheckRecord chk_gram_inverse_head(CheckContext& ctx) {
  const double rho = ctx.domain().kind == DomainKind::disk ? 0.6 : 0.95;
  const auto T = kernel_taylor_gram(ctx.engine(), ctx.order(), rho);
  const double head = gram_inverse_head(T);
  const double m0 = ctx.domain().area() / kPi;
  return make("inverse-gram-head", "operator/inverse-gram-head", ctx, head, m0, 2.5e-3,
              "head of the inverse kernel Taylor Gram approaches the squared "
              "model norm from below");
}

inline CheckRecord chk_resolvent_forward(CheckContext& ctx) {
  Rng rng(ctx.seed() + 8);
  const DomainSpec& d = ctx.domain();
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_tail(rng, 8);
    const cplx a = 2.5 * d.R_bound();
    const auto g = resolvent_Z_tail(d, f, a);
    const auto zg = op_Z(g);
    for (int k = 0; k < 8; ++k)
      worst = std::max(worst, std::abs(zg.coeff(k) - a * g.coeff(k) - f.coeff(k)));
  }
  return make("resolvent-forward-inverse", "operator/resolvent-forward", ctx, worst,
              0.0, 1e-10, "(Z - a) applied to the resolvent tail");
}

inline CheckRecord chk_resolvent_adjoint_compose(CheckContext& ctx) {
  Rng rng(ctx.seed() + 9);
  const DomainSpec& d = ctx.domain();
  const double R = d.R_bound();
  const cplx a = 2.2 * R;
  const int N = 48;
  const auto Ms = matrix_truncation(ModelOp::Z_star, d, N);
  Eigen::MatrixXcd A = to_eigen(Ms);
  for (int i = 0; i < N; ++i) A(i, i) -= std::conj(a);
  double worst = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    const auto f = random_tail(rng, 4);
    Eigen::VectorXcd fv = Eigen::VectorXcd::Zero(N);
    for (int k = 0; k < f.order(); ++k) fv(k) = f.coeff(k);
    const Eigen::VectorXcd gv = A.partialPivLu().solve(fv);
    LaurentTail g;
    g.a.assign(gv.data(), gv.data() + N);
    const auto g_fn = [&](cplx zeta) { return evaluate_finite(g, zeta); };
    for (int p = 0; p < 10; ++p) {
      const cplx z = rng.annulus(2.5 * R, 4.0 * R);
      const cplx back = op_Z_star_boundary(d, g_fn, z).value -
                        std::conj(a) * evaluate(g, z, R).value;
      worst = std::max(worst, std::abs(back - evaluate(f, z, R).value));
    }
  }
  return make("resolvent-adjoint-compose", "operator/resolvent-adjoint", ctx, worst,
              0.0, 1e-6, "(Z* - conj a) applied to the solved resolvent output");
}

inline CheckRecord chk_adjoint_display_disk(CheckContext& ctx) {
  Rng rng(ctx.seed() + 10);
  const DomainSpec& d = ctx.domain();
  const double R = d.R_bound();
  const cplx a = 2.2 * R;
  const int N = 48;
  const auto Ms = matrix_truncation(ModelOp::Z_star, d, N);
  Eigen::MatrixXcd A = to_eigen(Ms);
  for (int i = 0; i < N; ++i) A(i, i) -= std::conj(a);
  const auto f = random_tail(rng, 4);
  Eigen::VectorXcd fv = Eigen::VectorXcd::Zero(N);
  for (int k = 0; k < f.order(); ++k) fv(k) = f.coeff(k);
  const Eigen::VectorXcd gv = A.partialPivLu().solve(fv);
  LaurentTail g;
  g.a.assign(gv.data(), gv.data() + N);
  const auto f_fn = [&](cplx zeta) { return evaluate_finite(f, zeta); };
  double worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    const cplx z = rng.annulus(2.5 * R, 4.0 * R);
    worst = std::max(worst, std::abs(resolvent_Z_star(d, f_fn, a, z).value -
                                     evaluate(g, z, R).value));
  }
  return make("adjoint-display-vs-solve", "operator/adjoint-display", ctx, worst, 0.0,
              1e-8, "boundary display equals the model resolvent on the disk");
}

// --- model space (hilbert) -------------------------------------------------

inline CheckRecord chk_sminus_norm(CheckContext& ctx) {
  const auto sc = measured_sign(ctx.engine());
  const double tol = ctx.smooth() ? 1e-3 : 1e-6;
  return make("s-minus-squared-norm", "model/s-minus-norm", ctx, sc.pairing,
              sc.moment, tol, "pairing of the decaying part with itself vs M_0");
}

inline CheckRecord chk_sign_calibration(CheckContext& ctx) {
  const auto sc = measured_sign(ctx.engine());
  const double tol = ctx.smooth() ? 2e-3 : 1e-6;
  return make("sign-calibration", "model/sign-calibration", ctx, sc.ratio,
              cplx(kCalibratedSign), tol,
              "measured sign ratio matches the frozen calibration");
}

inline CheckRecord chk_residue_pairing(CheckContext& ctx) {
  Rng rng(ctx.seed() + 11);
  const auto& eng = ctx.engine();
  const double sigma = measured_sign(eng).sigma;
  double worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto f = random_tail(rng, 8);
    const cplx lhs = eng.pair(eng.lift_tail(f), eng.lifted_s_minus()).value;
    worst = std::max(worst, std::abs(lhs - sigma * residue_at_infinity(f)));
  }
  const double tol = ctx.smooth() ? 1e-4 : 1e-6;
  return make("residue-pairing", "model/residue-pairing", ctx, worst, 0.0, tol,
              "pairing against the decaying part vs the residue rule");
}

inline CheckRecord chk_contour_h_sminus(CheckContext& ctx) {
  const auto& eng = ctx.engine();
  const cplx a = ctx.domain().anchor + 0.05 * (ctx.domain().curve(1.2) -
                                               ctx.domain().anchor);
  const auto res = integral_h_sminus(eng, a);
  const double tol = ctx.smooth() ? 1e-3 : 1e-6;
  return make("contour-h-sminus", "model/contour-h-sminus", ctx, res.value, 1.0, tol,
              "boundary integral of H against the decaying part");
}

inline CheckRecord chk_contour_h_inv_e(CheckContext& ctx) {
  Rng rng(ctx.seed() + 12);
  const auto& eng = ctx.engine();
  const cplx a = random_interior(rng, ctx.domain(), 0.3);
  const cplx w = random_exterior(rng, ctx.domain());
  const auto res = integral_h_inv_e(eng, a, w);
  const cplx expect = 1.0 / (std::conj(w) - std::conj(a));
  const double tol = ctx.smooth() ? 1e-3 : 1e-5;
  return make("contour-h-inv-e", "model/contour-h-inv-e", ctx, res.value, expect, tol,
              "boundary integral of H over the transform");
}

inline CheckRecord chk_disk_closed_pairing(CheckContext& ctx) {
  const auto& eng = ctx.engine();
  const auto kk = eng.inner_product([](cplx z) { return 1.0 / (z - 0.3); },
                                    [](cplx z) { return 1.0 / (z - 0.3); });
  return make("disk-closed-pairing", "model/closed-form-pairings", ctx, kk.value,
              1.0 / 0.91, 1e-8, "norm of a simple-pole kernel on the unit disk");
}

inline CheckRecord chk_taylor_gram(CheckContext& ctx) {
  const bool disk = ctx.domain().kind == DomainKind::disk;
  const double rho = disk ? 0.6 : 0.95;
  const auto T = kernel_taylor_gram(ctx.engine(), 8, rho);
  double worst = 0.0;
  if (disk) {
    const double r2 = sqr(ctx.domain().scale * ctx.domain().r);
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        const double expect = j == k ? std::pow(r2, -(j + 1)) * r2 * std::pow(r2, -j)
                                     : 0.0;
        (void)expect;
      }
    // Unit disk: T is the identity.
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k)
        worst = std::max(worst, std::abs(T(j, k) - (j == k ? 1.0 : 0.0)));
  } else {
    const auto T2 = kernel_taylor_gram(ctx.engine(), 8, 0.90);
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        worst = std::max(worst, std::abs(T(j, k) - std::conj(T(k, j))));
        worst = std::max(worst, std::abs(T(j, k) - T2(j, k)));
      }
  }
  return make("kernel-taylor-gram", "model/kernel-taylor", ctx, worst, 0.0, 1e-6,
              disk ? "Taylor Gram of the interior kernel is the identity"
                   : "Taylor Gram is hermitian and radius-stable");
}

inline CheckRecord chk_instability(CheckContext& ctx) {
  const auto demo = decomposition_instability_demo(ctx.engine());
  const double err = std::max(demo.null_norm, std::abs(demo.product_norm - 0.5));
  return make("instability-demo", "model/instability-demo", ctx, err, 0.0, 1e-3,
              "null density times a conjugate factor gains norm 1/2");
}

inline CheckRecord chk_gram_psd(CheckContext& ctx) {
  Rng rng(ctx.seed() + 13);
  std::vector<LaurentTail> tails;
  for (int i = 0; i < 4; ++i) tails.push_back(random_tail(rng, 6));
  const auto g = gram_matrix(tails, ctx.engine());
  const double viol = std::max(0.0, -g.min_eigenvalue);
  return make("gram-positivity", "model/gram-positivity", ctx, viol, 0.0, 1e-8,
              "random tail Gram matrix is positive semidefinite");
}

// --- nulls -----------------------------------------------------------------

inline CheckRecord chk_null_classical(CheckContext& ctx) {
  const auto rep = null_test(classical_null(ctx.domain()), ctx.engine());
  const double err = std::max(rep.norm, rep.sup_exterior);
  std::string note = ctx.domain().kind == DomainKind::disk
                         ? "the area density zeta dA"
                         : "the ellipse relation between conj(zeta) and zeta";
  note += rep.is_null ? "; verdict null" : "; verdict NOT null";
  CheckRecord r = make("null-classical-density", "null/classical-density", ctx, err,
                       0.0, 1e-6, note);
  r.pass = r.pass && rep.is_null;
  return r;
}

inline CheckRecord chk_null_corollary(CheckContext& ctx) {
  const auto rep = null_test(HElement::density({Monomial{1, 0, -1.0}}), ctx.engine());
  const double err = std::max(rep.norm, rep.sup_exterior);
  CheckRecord r = make("null-corollary-density", "null/corollary-density", ctx, err,
                       0.0, 1e-6,
                       "density from the reciprocal diagonal kernel; verdict " +
                           std::string(rep.is_null ? "null" : "NOT null"));
  r.pass = r.pass && rep.is_null;
  return r;
}

inline CheckRecord chk_null_constructed(CheckContext& ctx) {
  const auto el = constructed_null(ctx.domain());
  const auto fn = exterior_transform(el, ctx.domain());
  double sup = 0.0;
  const double R = 2.5 * ctx.domain().R_bound();
  for (int s = 0; s < 64; ++s)
    sup = std::max(sup, std::abs(fn(std::polar(R, 2.0 * kPi * s / 64.0))));
  const double tol = ctx.smooth() ? 1e-6 : 1e-7;
  return make("null-constructed", "null/constructed-null", ctx, sup, 0.0, tol,
              "density zeta dA with the termwise cancelling tail; sup of the "
              "exterior transform on |z| = 2.5R");
}

inline CheckRecord chk_null_control(CheckContext& ctx) {
  const auto rep = null_test(HElement::density({Monomial{0, 0, 1.0}}), ctx.engine());
  CheckRecord r = make("null-unit-control", "null/unit-control", ctx, rep.norm,
                       rep.norm, 1.0,
                       "the unit density is far from null (norm " +
                           detail::fmt_double(rep.norm, 4) + ")");
  r.pass = !rep.is_null && rep.norm > 0.3;
  r.abs_err = rep.is_null ? 1.0 : 0.0;
  r.expected = 0.0;
  r.computed = rep.norm;
  return r;
}

// --- reproducing -----------------------------------------------------------

inline CheckRecord chk_reproduction(CheckContext& ctx) {
  Rng rng(ctx.seed() + 14);
  const auto& eng = ctx.engine();
  const int pairs = ctx.smooth() ? 5 : 20;
  const double margin = ctx.smooth() ? 0.55 : 0.65;
  double worst = 0.0;
  for (int rep = 0; rep < pairs; ++rep) {
    const cplx a = random_interior(rng, ctx.domain(), margin);
    const cplx w = random_exterior(rng, ctx.domain());
    const auto L = reproducing_kernel_L(eng, w);
    const auto ip = eng.inner_product([a](cplx z) { return 1.0 / (z - a); },
                                      [&L](cplx z) { return L(z); });
    worst = std::max(worst, std::abs(ip.value - 1.0 / (w - a)));
  }
  const double tol = ctx.smooth() ? 1e-3 : 1e-5;
  return make("reproducing-pairs", "reproducing/kernel-pairs", ctx, worst, 0.0, tol,
              std::to_string(pairs) + " random (a, w) pairs");
}

inline CheckRecord chk_disk_l_closed(CheckContext& ctx) {
  const cplx w{1.7, 0.6};
  const auto L = reproducing_kernel_L(ctx.engine(), w);
  double worst = 0.0;
  for (const cplx z : {cplx{2.2, -0.3}, cplx{-1.8, 1.1}, cplx{0.3, 0.1}})
    worst = std::max(worst, std::abs(L(z) - 1.0 / (z * std::conj(w) - 1.0)));
  return make("reproducing-disk-closed", "reproducing/disk-closed-form", ctx, worst,
              0.0, 1e-10, "reproducing element vs its rational closed form");
}

inline CheckRecord chk_correlation(CheckContext& ctx) {
  Rng rng(ctx.seed() + 15);
  const auto& eng = ctx.engine();
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const cplx a = random_interior(rng, ctx.domain(), 0.55);
    cplx b = random_interior(rng, ctx.domain(), 0.55);
    if (std::abs(a - b) < 0.05) b = ctx.domain().anchor;
    const auto ip = eng.inner_product([a](cplx z) { return 1.0 / (z - a); },
                                      [b](cplx z) { return 1.0 / (z - b); });
    worst = std::max(worst, std::abs(ip.value - eng.kernels().kernel_H(a, b)));
  }
  const double tol = ctx.smooth() ? 1e-3 : 1e-5;
  return make("correlation-kernel", "reproducing/correlation-kernel", ctx, worst, 0.0,
              tol, "pairing of simple-pole kernels vs the interior kernel, 10 pairs");
}

inline CheckRecord chk_projection(CheckContext& ctx) {
  Rng rng(ctx.seed() + 16);
  const auto& eng = ctx.engine();
  const auto S = schwarz_series(ctx.domain(), 2, 30);
  const double sigma = measured_sign(eng).sigma;
  double worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto f = random_tail(rng, 6);
    const auto proj = rank_one_projection(f, eng);
    const auto comm = commutator_apply(S, f);
    // C f = -sigma * <f, S_->_O * S_- up to the calibrated sign convention.
    for (int k = 0; k < 6; ++k)
      worst = std::max(worst,
                       std::abs(comm.coeff(k) - sigma * proj.value.coeff(k)));
  }
  const double tol = ctx.smooth() ? 1e-3 : 1e-6;
  return make("rank-one-projection", "reproducing/rank-one-projection", ctx, worst,
              0.0, tol, "commutator action vs the calibrated rank-one projection");
}

// --- fields ----------------------------------------------------------------

inline CheckRecord chk_field_source(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const double R = d.R_bound();
  const cplx a = d.anchor + 0.2 * (d.curve(0.4) - d.anchor);
  const auto grid = make_field_grid(d, cplx(-2.0 * R, -2.0 * R),
                                    cplx(2.0 * R, 2.0 * R), R / 10.0);
  const auto s = velocity_field(HElement::point_mass(a, kPi), d, grid);
  double worst = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (!grid.masked(i, j))
        worst = std::max(worst, std::abs(s.f[grid.index(i, j)] -
                                         1.0 / (grid.point(i, j) - a)));
  return make("field-point-source", "field/point-source", ctx, worst, 0.0, 1e-12,
              "unit-strength source vs the radial closed form");
}

inline CheckRecord chk_field_invisibility(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const double R = d.R_bound();
  const cplx lo = ctx.smooth() ? cplx(1.5 * R, 1.5 * R) : cplx(-2.0 * R, -2.0 * R);
  const cplx hi = ctx.smooth() ? cplx(3.0 * R, 3.0 * R) : cplx(2.0 * R, 2.0 * R);
  const auto grid = make_field_grid(d, lo, hi, R / 10.0);
  const cplx a = d.anchor + 0.25 * (d.curve(1.0) - d.anchor);
  const auto mu = HElement::point_mass(a, 2.0);
  const auto nul = ctx.smooth() ? constructed_null(d) : classical_null(d);
  const auto base = velocity_field(mu, d, grid);
  const auto shifted = velocity_field(superpose(mu, nul), d, grid);
  const double diff = max_field_difference(base, shifted);
  return make("field-null-invisibility", "field/null-invisibility", ctx, diff, 0.0,
              1e-6, "adding a null density leaves the exterior field unchanged");
}

inline CheckRecord chk_field_divcurl(CheckContext& ctx) {
  const DomainSpec& d = ctx.domain();
  const double R = d.R_bound();
  const cplx a = d.anchor + 0.2 * (d.curve(2.2) - d.anchor);
  const auto mu = HElement::point_mass(a, kPi);
  const cplx lo(1.2 * R, 1.2 * R), hi(2.6 * R, 2.6 * R);
  const auto g1 = make_field_grid(d, lo, hi, R / 20.0);
  const auto g2 = make_field_grid(d, lo, hi, R / 40.0);
  const auto r1 = div_curl_check(velocity_field(mu, d, g1));
  const auto r2 = div_curl_check(velocity_field(mu, d, g2));
  const double ratio = r1.max_residual / r2.max_residual;
  CheckRecord r = make("field-div-curl-order", "field/div-curl-order", ctx,
                       std::max(0.0, 3.5 - ratio), 0.0, 0.0,
                       "halving h shrinks the residual by " +
                           detail::fmt_double(ratio, 4) + "x (second order)");
  return r;
}

}  // namespace checks_detail

inline const std::vector<CheckDef>& check_catalog() {
  using namespace checks_detail;
  static const std::vector<CheckDef> defs = {
      {"e-far-normalization", "kernel/e-far-normalization", "kernels", any_domain,
       chk_e_far},
      {"e-hermitian-symmetry", "kernel/e-hermitian", "kernels", any_domain,
       chk_e_hermitian},
      {"h-disk-closed-form", "kernel/h-closed-form", "kernels", unit_disk_only,
       chk_h_disk_value},
      {"h-backend-consistency", "kernel/h-backend-consistency", "kernels",
       closed_domain, chk_h_backends},
      {"h-area-normalization", "kernel/h-normalization", "kernels", any_domain,
       chk_h_normalization},
      {"match-h-g-boundary", "kernel/match-boundary-g", "kernels", any_domain,
       chk_match_g},
      {"match-h-gstar-boundary", "kernel/match-boundary-gstar", "kernels", any_domain,
       chk_match_gstar},
      {"match-g-f-boundary", "kernel/match-boundary-f", "kernels", any_domain,
       chk_match_f},
      {"g-asymptotic-decay", "kernel/g-asymptotics", "kernels", any_domain,
       chk_g_asymptotics},
      {"transform-of-g", "kernel/transform-of-g", "kernels", any_domain,
       chk_transform_of_g},
      {"transform-of-h", "kernel/transform-of-h", "kernels", closed_domain,
       chk_transform_of_h},
      {"h-diagonal-boundary", "kernel/diagonal-boundary", "kernels", any_domain,
       chk_diag_boundary},
      {"weighted-zero-density", "kernel/weighted-trivial", "kernels", any_domain,
       chk_weighted_trivial},

      {"moment-shift-walk", "operator/moment-shift", "operators", any_domain,
       chk_moment_shift},
      {"moments-quadrature", "operator/moments-quadrature", "operators",
       closed_domain, chk_moments_quadrature},
      {"adjoint-two-routes", "operator/adjoint-two-routes", "operators", any_domain,
       chk_adjoint_routes},
      {"commutator-rank-one", "operator/commutator-rank-one", "operators", any_domain,
       chk_commutator_series},
      {"commutator-truncation-rank", "operator/commutator-truncation", "operators",
       any_domain, chk_commutator_matrix},
      {"commutator-norm-match", "operator/commutator-norm-match", "operators",
       any_domain, chk_commutator_sigma1},
      {"inverse-gram-head", "operator/inverse-gram-head", "operators", closed_domain,
       chk_gram_inverse_head},
      {"resolvent-forward-inverse", "operator/resolvent-forward", "operators",
       any_domain, chk_resolvent_forward},
      {"resolvent-adjoint-compose", "operator/resolvent-adjoint", "operators",
       any_domain, chk_resolvent_adjoint_compose},
      {"adjoint-display-vs-solve", "operator/adjoint-display", "operators", disk_only,
       chk_adjoint_display_disk},

      {"s-minus-squared-norm", "model/s-minus-norm", "hilbert", any_domain,
       chk_sminus_norm},
      {"sign-calibration", "model/sign-calibration", "hilbert", any_domain,
       chk_sign_calibration},
      {"residue-pairing", "model/residue-pairing", "hilbert", any_domain,
       chk_residue_pairing},
      {"contour-h-sminus", "model/contour-h-sminus", "hilbert", any_domain,
       chk_contour_h_sminus},
      {"contour-h-inv-e", "model/contour-h-inv-e", "hilbert", any_domain,
       chk_contour_h_inv_e},
      {"disk-closed-pairing", "model/closed-form-pairings", "hilbert", unit_disk_only,
       chk_disk_closed_pairing},
      {"kernel-taylor-gram", "model/kernel-taylor", "hilbert", closed_domain,
       chk_taylor_gram},
      {"instability-demo", "model/instability-demo", "hilbert nulls", unit_disk_only,
       chk_instability},
      {"gram-positivity", "model/gram-positivity", "hilbert", any_domain,
       chk_gram_psd},

      {"null-classical-density", "null/classical-density", "hilbert nulls",
       closed_domain, chk_null_classical},
      {"null-corollary-density", "null/corollary-density", "nulls", unit_disk_only,
       chk_null_corollary},
      {"null-constructed", "null/constructed-null", "nulls", any_domain,
       chk_null_constructed},
      {"null-unit-control", "null/unit-control", "nulls", any_domain,
       chk_null_control},

      {"reproducing-pairs", "reproducing/kernel-pairs", "reproducing hilbert",
       any_domain, chk_reproduction},
      {"reproducing-disk-closed", "reproducing/disk-closed-form", "reproducing",
       unit_disk_only, chk_disk_l_closed},
      {"correlation-kernel", "reproducing/correlation-kernel", "reproducing",
       any_domain, chk_correlation},
      {"rank-one-projection", "reproducing/rank-one-projection", "reproducing",
       any_domain, chk_projection},

      {"field-point-source", "field/point-source", "fields", any_domain,
       chk_field_source},
      {"field-null-invisibility", "field/null-invisibility", "fields", any_domain,
       chk_field_invisibility},
      {"field-div-curl-order", "field/div-curl-order", "fields", any_domain,
       chk_field_divcurl},
  };
  return defs;
}

inline std::vector<std::string> check_suites() {
  return {"kernels", "operators", "hilbert", "reproducing", "nulls", "fields", "all"};
}

inline bool suite_has(const char* suites, const std::string& suite) {
  if (suite == "all") return true;
  const std::string s(suites);
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t end = s.find(' ', pos);
    const std::string tok = s.substr(pos, end == std::string::npos ? end : end - pos);
    if (tok == suite) return true;
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return false;
}

inline VerificationReport run_suite(CheckContext& ctx, const std::string& suite) {
  const auto names = check_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw UsageError("unknown suite: " + suite);
  VerificationReport rep;
  rep.suite = suite;
  rep.domain = domain_label(ctx.domain());
  rep.seed = ctx.seed();
  rep.backend = ctx.domain().kind == DomainKind::smooth ? "quadrature" : "closed_form";
  for (const auto& def : check_catalog()) {
    if (!suite_has(def.suites, suite)) continue;
    if (def.applies && !def.applies(ctx.domain())) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckRecord r = def.run(ctx);
    const auto t1 = std::chrono::steady_clock::now();
    r.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (ctx.tol_override() > 0.0) {
      r.tol = ctx.tol_override();
      r.pass = r.abs_err <= r.tol;
    }
    rep.records.push_back(std::move(r));
  }
  rep.sigma = ctx.engine_built() ? measured_sign(ctx.engine()).sigma : kCalibratedSign;
  return rep;
}

}  // namespace rkm
