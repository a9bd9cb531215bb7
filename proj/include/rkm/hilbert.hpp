#pragma once

// Shrunken-boundary inner product of the model space. Pairings are double
// contour integrals of the interior kernel over an exhaustion of the domain,
// Richardson-extrapolated across the shrink schedule; on top of them sit the
// model lift of measures, norms and null tests, the reproducing kernel
// family, Gram assembly, and the contour identities used by the check suite.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"
#include "rkm/kernels.hpp"
#include "rkm/laurent.hpp"
#include "rkm/operators.hpp"
#include "rkm/quadrature.hpp"

namespace rkm {

// Exhaustion schedule: boundary shrink factors, strictly decreasing in
// (0, 1/2); the last order+1 layers enter the extrapolation.
struct EpsilonSchedule {
  std::vector<double> eps{0.04, 0.02, 0.01};
  int order = 2;

  void validate() const {
    if (eps.empty()) throw UsageError("epsilon schedule: no shrink factors");
    double prev = 0.5;
    for (double e : eps) {
      if (!(e > 0.0) || !(e < 0.5))
        throw PreconditionError("epsilon schedule: shrink factors must lie in (0, 1/2)");
      if (!(e < prev))
        throw PreconditionError("epsilon schedule: shrink factors must decrease strictly");
      prev = e;
    }
    if (order < 0) throw UsageError("epsilon schedule: negative extrapolation order");
    if (static_cast<std::size_t>(order) + 1 > eps.size())
      throw UsageError("epsilon schedule: order+1 exceeds the layer count");
  }

  static EpsilonSchedule standard() { return {}; }
  static EpsilonSchedule single(double e) { return {{e}, 0}; }
};

// Extrapolated pairing value with its convergence diagnostics.
struct InnerProduct {
  cplx value{0.0};
  double residual = 0.0;      // |extrapolated - innermost layer value|
  std::vector<double> diffs;  // |V_{k+1} - V_k| across the schedule
  std::vector<cplx> layer_values;
};

class InnerProductEngine;

// Boundary samples of one pairing factor, premultiplied by the line elements
// of each layer. Valid only with the engine that produced it.
class LiftedElement {
 public:
  bool ready() const { return !a_.empty(); }

 private:
  friend class InnerProductEngine;
  std::vector<Eigen::VectorXcd> a_;          // f(z_i) dz_i per layer
  mutable std::vector<Eigen::VectorXcd> y_;  // H * conj(a), filled on demand
  mutable std::vector<char> has_y_;
};

class InnerProductEngine {
 public:
  static constexpr int kGenericNodes = 128;

  explicit InnerProductEngine(DomainSpec dom,
                              EpsilonSchedule sched = EpsilonSchedule::standard(),
                              int nodes_override = 0)
      : dom_(std::move(dom)), sched_(std::move(sched)) {
    sched_.validate();
    if (dom_.kind == DomainKind::smooth) {
      Tier3Options t3;
      t3.subtracted = true;
      t3.tol = 1e-6;
      t3.kink_floor = 4.0e-3 * dom_.diam();
      eval_ = std::make_unique<KernelEvaluator>(dom_, Backend::quadrature, t3);
      germ_ = schwarz_series(dom_, 48, 66, 2048);
    } else {
      eval_ = std::make_unique<KernelEvaluator>(dom_);
      germ_ = schwarz_series(dom_, 4, 16);
    }
    layers_.reserve(sched_.eps.size());
    // Nearest kernel singularity sits about 2 eps outside a shrunken contour,
    // scaled by the boundary metric; node counts must keep the local spacing
    // a factor of six below that distance or the layer values drift.
    double geo = 1.0;
    if (dom_.kind != DomainKind::smooth) {
      for (int s = 0; s < 512; ++s) {
        const double t = 2.0 * kPi * s / 512.0;
        const cplx g = dom_.curve(t) - dom_.anchor;
        const cplx dg = dom_.dcurve(t);
        const double disp = std::imag(std::conj(g) * dg);
        if (disp > 1e-12) geo = std::max(geo, std::norm(dg) / disp);
      }
    }
    for (double e : sched_.eps) {
      Layer L;
      L.eps = e;
      L.shrunk = shrink(dom_, e);
      const int n = nodes_override > 0                ? nodes_override
                    : dom_.kind == DomainKind::smooth
                        ? kGenericNodes
                        : std::max(n_for_eps(e),
                                   2 * static_cast<int>(std::ceil(3.0 * kPi * geo / e)));
      L.q = boundary_quadrature(L.shrunk, n);
      layers_.push_back(std::move(L));
    }
  }

  const DomainSpec& domain() const { return dom_; }
  const KernelEvaluator& kernels() const { return *eval_; }
  const TwoSidedSeries& germ() const { return germ_; }
  const EpsilonSchedule& schedule() const { return sched_; }
  std::size_t layer_count() const { return layers_.size(); }
  const DomainSpec& layer_domain(std::size_t i) const { return layers_.at(i).shrunk; }
  const BoundaryQuadrature& layer_quadrature(std::size_t i) const {
    return layers_.at(i).q;
  }

  // Boundary-conjugate function continued off the boundary. Closed kinds have
  // exact values; a smooth curve is continued by solving the parametrization
  // z(v) = anchor + scale (sum_k c_k v^k - anchor) for v near the unit circle,
  // which stays valid until the critical values of the parametrization.
  cplx schwarz_interior(cplx z) const {
    if (dom_.kind != DomainKind::smooth) return schwarz_value(dom_, z);
    int best = 0;
    double bd = 1e300;
    for (int s = 0; s < 64; ++s) {
      const double dist = std::abs(dom_.curve(2.0 * kPi * s / 64.0) - z);
      if (dist < bd) {
        bd = dist;
        best = s;
      }
    }
    cplx v = std::polar(1.0, 2.0 * kPi * best / 64.0);
    for (int it = 0; it < 80; ++it) {
      const cplx f = fourier_point(v) - z;
      if (std::abs(f) < 1e-13 * dom_.diam()) break;
      const cplx df = fourier_deriv(v);
      if (std::abs(df) < 1e-14)
        throw SingularityError(
            "schwarz continuation: critical point of the curve parametrization");
      v -= f / df;
    }
    if (std::abs(fourier_point(v) - z) > 1e-10 * dom_.diam())
      throw ConvergenceError("schwarz continuation: parameter solve stalled");
    return fourier_conj(v);
  }

  // The decaying boundary-conjugate part continued through the domain
  // (contour nodes live strictly inside).
  cplx s_minus_cont(cplx z) const {
    switch (dom_.kind) {
      case DomainKind::disk: {
        const cplx c_eff = dom_.anchor + dom_.scale * (dom_.center - dom_.anchor);
        const double r_eff = dom_.scale * dom_.r;
        return r_eff * r_eff / (z - c_eff);
      }
      case DomainKind::ellipse: {
        const double ae = dom_.scale * dom_.a, be = dom_.scale * dom_.b;
        const double chi = (ae - be) / (ae + be);
        return schwarz_value(dom_, z) - chi * z;
      }
      case DomainKind::smooth:
        return schwarz_interior(z) - germ_.plus_eval(z);
    }
    return 0.0;
  }

  template <typename F>
  LiftedElement lift(F&& f) const {
    LiftedElement el;
    const std::size_t m = layers_.size();
    el.a_.resize(m);
    el.y_.resize(m);
    el.has_y_.assign(m, 0);
    for (std::size_t l = 0; l < m; ++l) {
      const auto& q = layers_[l].q;
      Eigen::VectorXcd v(static_cast<Eigen::Index>(q.nodes.size()));
      for (std::size_t i = 0; i < q.nodes.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = f(q.nodes[i]) * q.dz[i];
      el.a_[l] = std::move(v);
    }
    return el;
  }

  LiftedElement lift_tail(const LaurentTail& t) const {
    return lift([&t](cplx z) { return evaluate_finite(t, z); });
  }

  const LiftedElement& lifted_s_minus() const {
    if (!sminus_.ready()) sminus_ = lift([this](cplx z) { return s_minus_cont(z); });
    return sminus_;
  }

  // V = (1/4 pi^2) sum_ij H(z_i, w_j) [f(z_i) dz_i] conj(g(w_j) dw_j),
  // both contours positively oriented, per layer; then extrapolated.
  InnerProduct pair(const LiftedElement& f, const LiftedElement& g,
                    double scale_hint = 0.0) const {
    if (!f.ready() || !g.ready()) throw UsageError("inner product: unlifted element");
    std::vector<cplx> vals(layers_.size());
    double size = std::max(scale_hint, 0.0);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Eigen::VectorXcd& y = ycol(g, l);
      vals[l] = (f.a_[l].array() * y.array()).sum() / (4.0 * kPi * kPi);
      size = std::max(size, f.a_[l].lpNorm<1>() * g.a_[l].lpNorm<1>() /
                                (4.0 * kPi * kPi));
    }
    return combine_layers(vals, size);
  }

  template <typename F, typename G>
  InnerProduct inner_product(F&& f, G&& g) const {
    return pair(lift(std::forward<F>(f)), lift(std::forward<G>(g)));
  }

  InnerProduct inner_product(const LaurentTail& f, const LaurentTail& g) const {
    return pair(lift_tail(f), lift_tail(g));
  }

  // Richardson step over the trailing order+1 layers. The guard rejects
  // sequences whose consecutive differences grow beyond the noise floor;
  // size_hint anchors that floor for pairings whose true value is zero.
  InnerProduct combine_layers(const std::vector<cplx>& vals,
                              double size_hint = 0.0) const {
    if (vals.size() != layers_.size())
      throw UsageError("combine_layers: one value per layer required");
    InnerProduct out;
    out.layer_values = vals;
    double scale = std::max(1e-300, size_hint);
    for (const cplx& v : vals) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 1; k < vals.size(); ++k)
      out.diffs.push_back(std::abs(vals[k] - vals[k - 1]));
    // The absolute floor keeps pure roundoff sequences (null pairings whose
    // lifts are themselves roundoff) from tripping the divergence guard.
    if (out.diffs.size() >= 2 && out.diffs.back() > std::max(1e-12 * scale, 1e-24)) {
      bool increasing = true;
      for (std::size_t k = 1; k < out.diffs.size(); ++k)
        if (!(out.diffs[k] > out.diffs[k - 1])) {
          increasing = false;
          break;
        }
      if (increasing)
        throw ConvergenceError(
            "inner product: layer differences grow along the exhaustion");
    }
    if (vals.size() == 1) {
      out.value = vals[0];
      out.residual = 0.0;
      return out;
    }
    const int m = sched_.order + 1;
    const std::size_t lo = vals.size() - static_cast<std::size_t>(m);
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(0) = 1.0;
    for (int p = 0; p < m; ++p)
      for (int i = 0; i < m; ++i)
        A(p, i) = std::pow(sched_.eps[lo + static_cast<std::size_t>(i)], p);
    const Eigen::VectorXd w = A.fullPivLu().solve(rhs);
    cplx ex = 0.0;
    for (int i = 0; i < m; ++i) ex += w(i) * vals[lo + static_cast<std::size_t>(i)];
    out.value = ex;
    out.residual = std::abs(ex - vals.back());
    return out;
  }

 private:
  struct Layer {
    double eps = 0.0;
    DomainSpec shrunk;
    BoundaryQuadrature q;
    Eigen::MatrixXcd H;
    bool H_ready = false;
  };

  cplx fourier_point(cplx v) const {
    cplx p = 0.0;
    for (const auto& [k, c] : dom_.fourier) p += c * std::pow(v, k);
    return dom_.anchor + dom_.scale * (p - dom_.anchor);
  }
  cplx fourier_deriv(cplx v) const {
    cplx p = 0.0;
    for (const auto& [k, c] : dom_.fourier)
      if (k != 0) p += c * double(k) * std::pow(v, k - 1);
    return dom_.scale * p;
  }
  cplx fourier_conj(cplx v) const {
    cplx p = 0.0;
    for (const auto& [k, c] : dom_.fourier) p += std::conj(c) * std::pow(v, -k);
    return std::conj(dom_.anchor) + dom_.scale * (p - std::conj(dom_.anchor));
  }

  // Kernel matrix of one layer, filled on first use; hermitian by the
  // kernel's symmetry, so only the upper triangle is evaluated.
  const Eigen::MatrixXcd& layer_matrix(std::size_t li) const {
    Layer& L = layers_[li];
    if (!L.H_ready) {
      const auto& zs = L.q.nodes;
      const std::size_t n = zs.size();
      L.H.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          const cplx h = eval_->kernel_H(zs[i], zs[j]);
          L.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h;
          if (j != i)
            L.H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                std::conj(h);
        }
      // Quadrature-backed diagonal values lose all accuracy (the transform
      // vanishes quadratically there); the kernel is conjugate-analytic in its
      // second slot, so the diagonal is recovered from the contour neighbors.
      if (dom_.kind == DomainKind::smooth && n >= 8) {
        for (std::size_t i = 0; i < n; ++i) {
          cplx x[6], y[6];
          int m = 0;
          for (int k : {-3, -2, -1, 1, 2, 3}) {
            const std::size_t j = (i + static_cast<std::size_t>(k + int(n))) % n;
            x[m] = std::conj(zs[j]) - std::conj(zs[i]);
            y[m] = L.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            ++m;
          }
          cplx acc = 0.0;
          for (int a = 0; a < 6; ++a) {
            cplx term = y[a];
            for (int b = 0; b < 6; ++b)
              if (b != a) term *= -x[b] / (x[a] - x[b]);
            acc += term;
          }
          L.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
              cplx(acc.real(), 0.0);
        }
      }
      L.H_ready = true;
    }
    return L.H;
  }

  const Eigen::VectorXcd& ycol(const LiftedElement& g, std::size_t l) const {
    if (!g.has_y_[l]) {
      g.y_[l] = layer_matrix(l) * g.a_[l].conjugate();
      g.has_y_[l] = 1;
    }
    return g.y_[l];
  }

  DomainSpec dom_;
  EpsilonSchedule sched_;
  std::unique_ptr<KernelEvaluator> eval_;
  TwoSidedSeries germ_;
  mutable std::vector<Layer> layers_;
  mutable LiftedElement sminus_;
};

// ---------------------------------------------------------------------------
// Elements of the model space and their lift.
// ---------------------------------------------------------------------------

// Point masses strictly inside the domain, a polynomial area density, and a
// tail acting through its boundary extension by zero.
struct HElement {
  std::vector<PointMass> points;
  std::vector<Monomial> poly;
  std::optional<LaurentTail> tail;

  static HElement point_mass(cplx a, cplx c = 1.0) {
    return {{{a, c}}, {}, std::nullopt};
  }
  static HElement density(std::vector<Monomial> p) {
    return {{}, std::move(p), std::nullopt};
  }
  static HElement from_tail(LaurentTail t) { return {{}, {}, std::move(t)}; }

  bool trivial() const {
    return points.empty() && poly.empty() && (!tail || tail->a.empty());
  }
  CauchyDensity measure() const { return {points, poly, nullptr}; }

  // Magnitude of the element before any lift cancellation; null elements
  // lift to numerical zero, and this anchors their pairing noise floor.
  double raw_scale(const DomainSpec& d) const {
    double s = 0.0;
    for (const auto& pm : points) s += std::abs(pm.weight) / kPi;
    const double r = std::max(1.0, 0.5 * d.diam());
    for (const auto& m : poly)
      s += std::abs(m.coeff) * std::pow(r, m.p + m.q) * d.area() / kPi;
    if (tail)
      for (const auto& c : tail->a) s += std::abs(c);
    return s;
  }
};

// Model lift: the exterior Cauchy transform of the element, continued
// analytically through the domain so it can be sampled on inner contours.
// The density part precomputes its boundary reduction once; evaluation
// points must stay off the boundary shell resolved by those nodes.
// The returned callable borrows the engine; keep the engine alive.
inline std::function<cplx(cplx)> model_function(const HElement& el,
                                                const InnerProductEngine& eng) {
  for (const auto& pm : el.points)
    if (!eng.domain().contains(pm.location))
      throw RegionError("model lift: point masses must lie strictly inside the domain");
  const InnerProductEngine* E = &eng;
  std::shared_ptr<std::vector<std::pair<cplx, cplx>>> pre;  // (node, Q * dz)
  if (!el.poly.empty()) {
    const auto q = boundary_quadrature(eng.domain(), 4096);
    pre = std::make_shared<std::vector<std::pair<cplx, cplx>>>();
    pre->reserve(q.nodes.size());
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      pre->emplace_back(q.nodes[j],
                        poly_antiderivative(el.poly, q.nodes[j],
                                            std::conj(q.nodes[j])) *
                            q.dz[j]);
  }
  return [pts = el.points, poly = el.poly, tail = el.tail, E, pre](cplx z) {
    cplx acc = 0.0;
    for (const auto& pm : pts) acc += (pm.weight / kPi) / (z - pm.location);
    if (pre) {
      cplx b = 0.0;
      for (const auto& [node, qdz] : *pre) b += qdz / (node - z);
      acc += -b / (2.0 * kPi * kI);
      if (E->domain().contains(z))
        acc += poly_antiderivative(poly, z, E->schwarz_interior(z));
    }
    if (tail && !tail->a.empty()) acc += evaluate_finite(*tail, z);
    return acc;
  };
}

inline InnerProduct inner_product_H(const HElement& f, const HElement& g,
                                    const InnerProductEngine& eng) {
  const double hint = f.raw_scale(eng.domain()) * g.raw_scale(eng.domain());
  return eng.pair(eng.lift(model_function(f, eng)), eng.lift(model_function(g, eng)),
                  hint);
}

// Schedule-owning forms; they build a transient engine per call.
inline cplx inner_product_O(const LaurentTail& f, const LaurentTail& g,
                            const DomainSpec& d,
                            const EpsilonSchedule& sched = EpsilonSchedule::standard()) {
  return InnerProductEngine(d, sched).inner_product(f, g).value;
}

inline cplx inner_product_O(const std::function<cplx(cplx)>& f,
                            const std::function<cplx(cplx)>& g, const DomainSpec& d,
                            const EpsilonSchedule& sched = EpsilonSchedule::standard()) {
  return InnerProductEngine(d, sched).inner_product(f, g).value;
}

// ---------------------------------------------------------------------------
// Point-mass fast path, norms, null tests.
// ---------------------------------------------------------------------------

inline cplx inner_product_point_masses(cplx a, cplx b, const InnerProductEngine& eng) {
  if (!eng.domain().contains(a) || !eng.domain().contains(b))
    throw RegionError("point-mass pairing: both points must lie inside the domain");
  return eng.kernels().kernel_H(a, b);
}

inline cplx inner_product_point_masses(cplx a, cplx b, const DomainSpec& d) {
  if (!d.contains(a) || !d.contains(b))
    throw RegionError("point-mass pairing: both points must lie inside the domain");
  const Backend bk = d.kind == DomainKind::smooth ? Backend::quadrature
                                                  : Backend::closed_form;
  return KernelEvaluator(d, bk).kernel_H(a, b);
}

struct NormReport {
  double value = 0.0;  // clamped norm
  double raw = 0.0;    // squared norm before clamping
  bool clamped = false;
  double residual = 0.0;
};

inline NormReport norm_H(const HElement& el, const InnerProductEngine& eng) {
  NormReport out;
  if (el.trivial()) return out;
  if (el.poly.empty() && (!el.tail || el.tail->a.empty())) {
    cplx s = 0.0;
    for (const auto& pj : el.points)
      for (const auto& pk : el.points)
        s += pj.weight * std::conj(pk.weight) *
             inner_product_point_masses(pj.location, pk.location, eng);
    out.raw = std::real(s) / (kPi * kPi);
  } else {
    const auto f = eng.lift(model_function(el, eng));
    const double hint = el.raw_scale(eng.domain());
    const auto ip = eng.pair(f, f, hint * hint);
    out.raw = std::real(ip.value);
    out.residual = ip.residual;
  }
  out.clamped = out.raw < 0.0;
  out.value = std::sqrt(std::max(out.raw, 0.0));
  return out;
}

inline NormReport norm_H(const HElement& el, const DomainSpec& d,
                         const EpsilonSchedule& sched = EpsilonSchedule::standard()) {
  InnerProductEngine eng(d, sched);
  return norm_H(el, eng);
}

// L2 magnitude of the raw representative (weights, density, coefficients),
// used as the relative scale of the null verdict.
inline double raw_l2_size(const HElement& el, const DomainSpec& d) {
  double s2 = 0.0;
  for (const auto& pm : el.points) s2 += std::norm(pm.weight);
  if (!el.poly.empty()) {
    const auto res = adaptive_area_integrate(
        d.chart(),
        [&el](cplx u) { return cplx(std::norm(poly_eval(el.poly, u)), 0.0); }, {}, {},
        1e-9);
    s2 += std::real(res.value);
  }
  if (el.tail)
    for (const cplx& c : el.tail->a) s2 += std::norm(c);
  return std::sqrt(s2);
}

struct NullReport {
  double norm = 0.0;          // model-space norm of the element
  double sup_exterior = 0.0;  // sup |C[mu]| over 64 points on |z| = 2 R
  double scale = 0.0;         // raw L2 size of the representative
  double threshold = 0.0;
  bool is_null = false;
};

// Null iff both the norm and the exterior transform vanish relative to the
// raw size; the indicators must agree within two orders of magnitude.
inline NullReport null_test(const HElement& el, const InnerProductEngine& eng,
                            double rel_tol = 1e-6) {
  NullReport out;
  out.scale = raw_l2_size(el, eng.domain());
  out.threshold = rel_tol * out.scale;
  if (el.trivial() || out.scale == 0.0) {
    out.is_null = true;
    return out;
  }
  out.norm = norm_H(el, eng).value;
  const CauchyDensity mu = el.measure();
  const double R = 2.0 * eng.domain().R_bound();
  for (int k = 0; k < 64; ++k) {
    const cplx z = std::polar(R, 2.0 * kPi * k / 64.0);
    cplx v = cauchy_area(eng.domain(), mu, z);
    if (el.tail) v += evaluate_finite(*el.tail, z);
    out.sup_exterior = std::max(out.sup_exterior, std::abs(v));
  }
  const bool small_n = out.norm <= out.threshold;
  const bool small_s = out.sup_exterior <= out.threshold;
  if (small_n != small_s &&
      std::max(out.norm, out.sup_exterior) > 100.0 * out.threshold)
    throw ConsistencyError("null test: norm and exterior-transform indicators disagree");
  out.is_null = small_n && small_s;
  return out;
}

inline NullReport null_test(const HElement& el, const DomainSpec& d,
                            const EpsilonSchedule& sched = EpsilonSchedule::standard(),
                            double rel_tol = 1e-6) {
  InnerProductEngine eng(d, sched);
  return null_test(el, eng, rel_tol);
}

// ---------------------------------------------------------------------------
// Reproducing kernel family.
// ---------------------------------------------------------------------------

// 1/E(.,w) continued through the domain: inside, E(.,w) continues as
// G(.,w) (S - conj w) with G analytic there and S the boundary-conjugate
// continuation; outside it is the transform itself.
inline cplx inv_transform_continued(const InnerProductEngine& eng, cplx z, cplx w) {
  const DomainSpec& d = eng.domain();
  if (d.contains(z)) {
    const cplx g = eng.kernels().kernel_G(z, w);
    const cplx s = eng.schwarz_interior(z);
    const cplx den = g * (s - std::conj(w));
    if (std::abs(den) < 1e-13)
      throw SingularityError("reciprocal transform: continued value vanishes");
    return 1.0 / den;
  }
  const cplx e = eng.kernels().exp_transform(z, w);
  if (std::abs(e) < 1e-13)
    throw SingularityError("reciprocal transform: transform vanishes");
  return 1.0 / e;
}

class ReproducingKernel {
 public:
  ReproducingKernel(const InnerProductEngine& eng, cplx w) : eng_(&eng), w_(w) {
    if (eng.domain().contains(w))
      throw RegionError("reproducing kernel: parameter must lie outside the closed domain");
  }

  cplx parameter() const { return w_; }
  cplx operator()(cplx z) const { return inv_transform_continued(*eng_, z, w_) - 1.0; }

 private:
  const InnerProductEngine* eng_;
  cplx w_;
};

inline ReproducingKernel reproducing_kernel_L(const InnerProductEngine& eng, cplx w) {
  return ReproducingKernel(eng, w);
}

// ---------------------------------------------------------------------------
// Rank-one structure and the sign calibration.
// ---------------------------------------------------------------------------

struct RankOneProjection {
  cplx coefficient;   // <f, S_->_O
  LaurentTail value;  // coefficient * S_-
};

inline RankOneProjection rank_one_projection(const LaurentTail& f,
                                             const InnerProductEngine& eng) {
  const cplx c = eng.pair(eng.lift_tail(f), eng.lifted_s_minus()).value;
  LaurentTail dir =
      s_minus_tail(eng.domain(), std::max(f.order(), LaurentTail::kDefaultOrder));
  for (cplx& a : dir.a) a *= c;
  return {c, std::move(dir)};
}

// Relative sign between the contour orientation of the pairing and the
// residue-at-infinity convention: sigma = -<S_-,S_->_O / M_0. Measured, not
// assumed; identity checks carry it through.
struct SignCalibration {
  double sigma = 0.0;
  cplx ratio{0.0};     // should sit at sigma up to quadrature noise
  double pairing = 0.0;  // <S_-, S_->_O
  double moment = 0.0;   // M_0 = area / pi
};

inline SignCalibration measured_sign(const InnerProductEngine& eng) {
  SignCalibration out;
  out.moment = eng.domain().area() / kPi;
  const cplx v = eng.pair(eng.lifted_s_minus(), eng.lifted_s_minus()).value;
  out.pairing = std::real(v);
  out.ratio = -v / out.moment;
  out.sigma = std::real(out.ratio) >= 0.0 ? 1.0 : -1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Gram assembly and the decomposition pathology.
// ---------------------------------------------------------------------------

struct GramResult {
  Eigen::MatrixXcd matrix;
  double min_eigenvalue = 0.0;
};

inline GramResult gram_matrix(const std::vector<HElement>& elements,
                              const InnerProductEngine& eng) {
  GramResult out;
  const Eigen::Index n = static_cast<Eigen::Index>(elements.size());
  out.matrix.resize(n, n);
  if (n == 0) return out;
  std::vector<LiftedElement> lifted;
  std::vector<double> raw;
  lifted.reserve(elements.size());
  raw.reserve(elements.size());
  for (const auto& el : elements) {
    lifted.push_back(eng.lift(model_function(el, eng)));
    raw.push_back(el.raw_scale(eng.domain()));
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const cplx v = eng.pair(lifted[static_cast<std::size_t>(i)],
                              lifted[static_cast<std::size_t>(j)],
                              raw[static_cast<std::size_t>(i)] *
                                  raw[static_cast<std::size_t>(j)])
                         .value;
      out.matrix(i, j) = v;
      if (j != i) out.matrix(j, i) = std::conj(v);
    }
  const Eigen::MatrixXcd h = 0.5 * (out.matrix + out.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  return out;
}

inline GramResult gram_matrix(const std::vector<LaurentTail>& tails,
                              const InnerProductEngine& eng) {
  std::vector<HElement> els;
  els.reserve(tails.size());
  for (const auto& t : tails) els.push_back(HElement::from_tail(t));
  return gram_matrix(els, eng);
}

struct InstabilityReport {
  double null_norm = 0.0;     // the density zeta dA: a null element
  double product_norm = 0.0;  // the density conj(zeta) zeta dA: norm 1/2
};

// Multiplying the null density zeta dA by conj(zeta) leaves the null class:
// the conjugate factor is not a continuous operation on the quotient.
inline InstabilityReport decomposition_instability_demo(const InnerProductEngine& eng) {
  const DomainSpec& d = eng.domain();
  if (d.kind != DomainKind::disk || std::abs(d.center) > 1e-12 ||
      std::abs(d.scale * d.r - 1.0) > 1e-12)
    throw PreconditionError("instability demo: unit disk only");
  const auto n1 = norm_H(HElement::density({Monomial{1, 0, 1.0}}), eng);
  const auto n2 = norm_H(HElement::density({Monomial{1, 1, 1.0}}), eng);
  return {n1.value, n2.value};
}

// ---------------------------------------------------------------------------
// Contour identities used by the check suite.
// ---------------------------------------------------------------------------

struct ContourCheck {
  cplx value{0.0};
  double residual = 0.0;
  std::vector<cplx> layer_values;
};

// (1/2 pi i) oint H(z, a) S_-(z) dz over the shrunken boundaries; the limit
// is 1 for any a inside.
inline ContourCheck integral_h_sminus(const InnerProductEngine& eng, cplx a) {
  if (!eng.layer_domain(0).contains(a))
    throw PreconditionError("contour check: anchor must lie inside the innermost contour");
  std::vector<cplx> vals(eng.layer_count());
  for (std::size_t l = 0; l < eng.layer_count(); ++l) {
    const auto& q = eng.layer_quadrature(l);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      acc += eng.kernels().kernel_H(q.nodes[j], a) * eng.s_minus_cont(q.nodes[j]) *
             q.dz[j];
    vals[l] = acc / (2.0 * kPi * kI);
  }
  const auto ip = eng.combine_layers(vals);
  return {ip.value, ip.residual, ip.layer_values};
}

// (1/2 pi i) oint H(z, a) / E(z, w) dz -> 1 / (conj(w) - conj(a)).
inline ContourCheck integral_h_inv_e(const InnerProductEngine& eng, cplx a, cplx w) {
  if (!eng.layer_domain(0).contains(a))
    throw PreconditionError("contour check: anchor must lie inside the innermost contour");
  if (eng.domain().contains(w))
    throw RegionError("contour check: kernel parameter must lie outside the closed domain");
  std::vector<cplx> vals(eng.layer_count());
  for (std::size_t l = 0; l < eng.layer_count(); ++l) {
    const auto& q = eng.layer_quadrature(l);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      acc += eng.kernels().kernel_H(q.nodes[j], a) *
             inv_transform_continued(eng, q.nodes[j], w) * q.dz[j];
    vals[l] = acc / (2.0 * kPi * kI);
  }
  const auto ip = eng.combine_layers(vals);
  return {ip.value, ip.residual, ip.layer_values};
}

// ---------------------------------------------------------------------------
// Taylor coefficients of the interior kernel: H(z,w) = sum T_jk z^j conj(w)^k
// on a bidisc strictly inside the analyticity region.
// ---------------------------------------------------------------------------

inline Eigen::MatrixXcd kernel_taylor_gram(const InnerProductEngine& eng, int N,
                                           double rho, int grid = 512) {
  if (N <= 0) throw UsageError("taylor gram: order must be positive");
  const DomainSpec& d = eng.domain();
  double rmax = 0.0;
  switch (d.kind) {
    case DomainKind::disk:
      rmax = d.scale * d.r - std::abs(d.anchor + d.scale * (d.center - d.anchor));
      break;
    case DomainKind::ellipse:
      rmax = d.scale * d.b;
      break;
    case DomainKind::smooth:
      rmax = d.r_min();
      break;
  }
  if (!(rho > 0.0) || !(rho < rmax))
    throw PreconditionError("taylor gram: sample radius outside the analyticity disc");
  if (grid < 4 * N) throw PreconditionError("taylor gram: grid too small for the order");
  Eigen::MatrixXcd samples(grid, grid);
  for (int m = 0; m < grid; ++m) {
    const cplx z = std::polar(rho, 2.0 * kPi * m / grid);
    for (int n = 0; n < grid; ++n) {
      const cplx w = std::polar(rho, 2.0 * kPi * n / grid);
      samples(m, n) = eng.kernels().kernel_H(z, w);
    }
  }
  Eigen::MatrixXcd partial(N, grid);
  for (int j = 0; j < N; ++j)
    for (int n = 0; n < grid; ++n) {
      cplx acc = 0.0;
      for (int m = 0; m < grid; ++m)
        acc += samples(m, n) * std::polar(1.0, -2.0 * kPi * j * m / grid);
      partial(j, n) = acc / static_cast<double>(grid);
    }
  Eigen::MatrixXcd T(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      cplx acc = 0.0;
      for (int n = 0; n < grid; ++n)
        acc += partial(j, n) * std::polar(1.0, 2.0 * kPi * k * n / grid);
      T(j, k) = acc / static_cast<double>(grid) / std::pow(rho, j + k);
    }
  return T;
}

// Head entry of the inverse of a truncated Gram block.
inline double gram_inverse_head(const Eigen::MatrixXcd& T) {
  if (T.rows() == 0 || T.rows() != T.cols())
    throw UsageError("gram head: square nonempty matrix required");
  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(T.rows());
  e0(0) = 1.0;
  const Eigen::VectorXcd x = T.fullPivLu().solve(e0);
  return std::real(x(0));
}

}  // namespace rkm
