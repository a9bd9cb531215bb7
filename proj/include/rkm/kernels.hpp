// The exponential transform E and its three boundary-derived kernels, plus
// Cauchy transforms of measures. Evaluation strategy by region:
//   - closed forms where the domain admits them,
//   - a far-argument series in inverse powers of the far variable,
//   - adaptive cell integration with exact singular-cell reductions otherwise.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"
#include "rkm/laurent.hpp"
#include "rkm/quadrature.hpp"

namespace rkm {

// ---------------------------------------------------------------------------
// Densities: point masses + polynomial densities + an optional smooth extra.
// ---------------------------------------------------------------------------

struct PointMass {
  cplx location;
  cplx weight;
};

struct Monomial {
  int p = 0, q = 0;  // coeff * zeta^p * conj(zeta)^q, area density on the domain
  cplx coeff;
};

struct CauchyDensity {
  std::vector<PointMass> points;
  std::vector<Monomial> poly;
  std::function<cplx(cplx)> smooth;  // optional; area density on the domain

  static CauchyDensity point(cplx a, cplx c = 1.0) { return {{{a, c}}, {}, nullptr}; }
  static CauchyDensity monomials(std::vector<Monomial> ms) {
    return {{}, std::move(ms), nullptr};
  }
};

// Antiderivative in the conjugate slot: Q(zeta, s) with dQ/ds = density.
inline cplx poly_antiderivative(const std::vector<Monomial>& poly, cplx zeta, cplx s) {
  cplx acc = 0.0;
  for (const auto& m : poly)
    acc += m.coeff * ipow(zeta, m.p) * ipow(s, m.q + 1) / double(m.q + 1);
  return acc;
}

inline cplx poly_eval(const std::vector<Monomial>& poly, cplx zeta) {
  cplx acc = 0.0;
  for (const auto& m : poly) acc += m.coeff * ipow(zeta, m.p) * ipow(std::conj(zeta), m.q);
  return acc;
}

// ---------------------------------------------------------------------------
// Adaptive integration of rho(u)/(u - z) with the exact cell reduction for
// cells containing z. Valid for z anywhere; outside the domain the point only
// steers refinement.
// ---------------------------------------------------------------------------

template <typename R>
AdaptiveResult recip_area_integral(const StarChart& chart, R&& rho, cplx z,
                                   double tol = 1e-10, int max_depth = 14, int base_ns = 6,
                                   int base_nt = 12) {
  struct Item {
    Cell c;
    int d;
  };
  std::vector<Item> stack;
  for (int i = 0; i < base_ns; ++i)
    for (int j = 0; j < base_nt; ++j)
      stack.push_back({{double(i) / base_ns, (i + 1.0) / base_ns, 2.0 * kPi * j / base_nt,
                        2.0 * kPi * (j + 1) / base_nt},
                       0});
  const auto [sz, tz] = chart.param_of(z);
  const bool z_charted = sz <= 1.0 + 1e-12;

  cplx total = 0.0;
  double defer = 0.0;
  int ncells = 0;
  while (!stack.empty()) {
    const auto [c, d] = stack.back();
    stack.pop_back();
    const auto corners = cell_corners(chart, c);
    const cplx center = chart.point(0.5 * (c.s0 + c.s1), 0.5 * (c.t0 + c.t1));
    const double diam = cell_diameter(corners);
    const bool zin = z_charted && c.s0 - 1e-12 <= sz && sz <= c.s1 + 1e-12 &&
                     tparam_in(tz, c.t0 - 1e-12, c.t1 + 1e-12);

    auto split = [&](int depth) {
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      stack.push_back({{c.s0, sm, c.t0, tm}, depth});
      stack.push_back({{c.s0, sm, tm, c.t1}, depth});
      stack.push_back({{sm, c.s1, c.t0, tm}, depth});
      stack.push_back({{sm, c.s1, tm, c.t1}, depth});
    };

    if (zin) {
      if (d < max_depth && diam >= 3e-5) {
        split(d + 1);
        continue;
      }
      const cplx g0 = rho(z);
      cplx v = g0 * cell_recip(chart, c, z);
      const auto cn = chart.cell_nodes(c.s0, c.s1, c.t0, c.t1);
      for (int i = 0; i < 25; ++i)
        v += cn.w[i] * (rho(cn.z[i]) - g0) / (cn.z[i] - z);
      total += v;
      ++ncells;
      continue;
    }

    double dist = std::abs(center - z);
    for (const cplx& cr : corners) dist = std::min(dist, std::abs(cr - z));
    if (d < max_depth && diam > std::max(dist, 1e-9) / 1.5) {
      split(d + 1);
      continue;
    }
    auto cellsum = [&](const Cell& cc) {
      const auto cn = chart.cell_nodes(cc.s0, cc.s1, cc.t0, cc.t1);
      cplx acc = 0.0;
      for (int i = 0; i < 25; ++i) acc += rho(cn.z[i]) / (cn.z[i] - z) * cn.w[i];
      return acc;
    };
    const cplx v1 = cellsum(c);
    const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
    const cplx v2 = cellsum({c.s0, sm, c.t0, tm}) + cellsum({c.s0, sm, tm, c.t1}) +
                    cellsum({sm, c.s1, c.t0, tm}) + cellsum({sm, c.s1, tm, c.t1});
    if (d < max_depth && std::abs(v2 - v1) > tol) {
      split(d + 1);
      continue;
    }
    if (d >= max_depth) defer = std::max(defer, std::abs(v2 - v1));
    total += v2;
    ++ncells;
  }
  return {total, defer, ncells};
}

// ---------------------------------------------------------------------------
// Two-point adaptive integral of rho(u) / ((u - z)(conj(u) - conj(w))) dA(u).
// Cells containing z or w are finished with an exact reduction of their
// singular factor; cells containing both split until the points separate.
// ---------------------------------------------------------------------------

template <typename R>
AdaptiveResult twopoint_log_integral(const StarChart& chart, cplx z, cplx w, R&& rho,
                                     double tol = 1e-11, int max_depth = 14,
                                     int base_ns = 6, int base_nt = 12) {
  struct Item {
    Cell c;
    int d;
  };
  std::vector<Item> stack;
  for (int i = 0; i < base_ns; ++i)
    for (int j = 0; j < base_nt; ++j)
      stack.push_back({{double(i) / base_ns, (i + 1.0) / base_ns, 2.0 * kPi * j / base_nt,
                        2.0 * kPi * (j + 1) / base_nt},
                       0});
  const auto [sz, tz] = chart.param_of(z);
  const auto [sw, tw] = chart.param_of(w);
  const bool z_charted = sz <= 1.0 + 1e-12;
  const bool w_charted = sw <= 1.0 + 1e-12;

  auto f = [&](cplx u) { return rho(u) / ((u - z) * (std::conj(u) - std::conj(w))); };

  cplx total = 0.0;
  double defer = 0.0;
  int ncells = 0;
  while (!stack.empty()) {
    const auto [c, d] = stack.back();
    stack.pop_back();
    const auto corners = cell_corners(chart, c);
    const cplx center = chart.point(0.5 * (c.s0 + c.s1), 0.5 * (c.t0 + c.t1));
    const double diam = cell_diameter(corners);
    auto in_box = [&](double s, double t) {
      return c.s0 - 1e-12 <= s && s <= c.s1 + 1e-12 && tparam_in(t, c.t0 - 1e-12, c.t1 + 1e-12);
    };
    const bool zin = z_charted && in_box(sz, tz);
    const bool win = w_charted && in_box(sw, tw);
    double zdist = std::abs(center - z), wdist = std::abs(center - w);
    for (const cplx& cr : corners) {
      zdist = std::min(zdist, std::abs(cr - z));
      wdist = std::min(wdist, std::abs(cr - w));
    }
    const bool znear = zin || zdist <= 2.0 * diam;
    const bool wnear = win || wdist <= 2.0 * diam;

    auto split = [&](int depth) {
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      stack.push_back({{c.s0, sm, c.t0, tm}, depth});
      stack.push_back({{c.s0, sm, tm, c.t1}, depth});
      stack.push_back({{sm, c.s1, c.t0, tm}, depth});
      stack.push_back({{sm, c.s1, tm, c.t1}, depth});
    };

    if (znear && wnear) {
      // Both singular factors act on this cell: split until they separate.
      if (d < max_depth + 10) {
        split(d + 1);
        continue;
      }
      throw AccuracyError("twopoint_log_integral: singular points failed to separate", 0.0,
                          diam);
    }

    if (znear || wnear) {
      // One singular factor is reduced exactly over the straight quad; the
      // remainder only carries the cofactor variation, so cells adjacent to
      // the singular point do not cascade to the depth cap.
      const bool inside = zin || win;
      if (inside && d < max_depth && diam >= 3e-5) {
        split(d + 1);
        continue;
      }
      auto patched = [&](const Cell& cc) {
        const auto cn = chart.cell_nodes(cc.s0, cc.s1, cc.t0, cc.t1);
        cplx v;
        if (znear) {
          const cplx g0 = rho(z) / (std::conj(z) - std::conj(w));
          v = g0 * cell_recip(chart, cc, z);
          for (int i = 0; i < 25; ++i) v += cn.w[i] * (f(cn.z[i]) - g0 / (cn.z[i] - z));
        } else {
          const cplx h0 = rho(w) / (w - z);
          v = h0 * std::conj(cell_recip(chart, cc, w));
          for (int i = 0; i < 25; ++i)
            v += cn.w[i] * (f(cn.z[i]) - h0 / (std::conj(cn.z[i]) - std::conj(w)));
        }
        return v;
      };
      const cplx v1 = patched(c);
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      const cplx v2 = patched({c.s0, sm, c.t0, tm}) + patched({c.s0, sm, tm, c.t1}) +
                      patched({sm, c.s1, c.t0, tm}) + patched({sm, c.s1, tm, c.t1});
      if (!inside && d < max_depth && std::abs(v2 - v1) > tol) {
        split(d + 1);
        continue;
      }
      if (inside || d >= max_depth) defer = std::max(defer, std::abs(v2 - v1));
      total += v2;
      ++ncells;
      continue;
    }

    const double dist = std::min(zdist, wdist);
    if (d < max_depth && diam > std::max(dist, 1e-9) / 1.5) {
      split(d + 1);
      continue;
    }
    auto cellsum = [&](const Cell& cc) {
      const auto cn = chart.cell_nodes(cc.s0, cc.s1, cc.t0, cc.t1);
      cplx acc = 0.0;
      for (int i = 0; i < 25; ++i) acc += f(cn.z[i]) * cn.w[i];
      return acc;
    };
    const cplx v1 = cellsum(c);
    const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
    const cplx v2 = cellsum({c.s0, sm, c.t0, tm}) + cellsum({c.s0, sm, tm, c.t1}) +
                    cellsum({sm, c.s1, c.t0, tm}) + cellsum({sm, c.s1, tm, c.t1});
    if (d < max_depth && std::abs(v2 - v1) > tol) {
      split(d + 1);
      continue;
    }
    if (d >= max_depth) defer = std::max(defer, std::abs(v2 - v1));
    total += v2;
    ++ncells;
  }
  return {total, defer, ncells};
}

// Declared ahead of the evaluator, defined with the other boundary splits below.
inline cplx s_minus(const DomainSpec& dom, cplx z, int nodes);
inline cplx s_plus(const DomainSpec& dom, cplx z, int nodes);

// ---------------------------------------------------------------------------
// Two-point integral with both Cauchy-type factors removed exactly:
//   int dA / ((u - z)(conj u - conj w))
//     = int R dA + T(z)/(conj z - conj w) - conj(T(w))/(z - w),
// where T(p) = int dA(u)/(u - p) has a closed reduction through the boundary
// conjugate. R stays bounded, so no cell needs an exact reduction; a short
// cascade around each point settles the directional kink.
// ---------------------------------------------------------------------------

// Curve samples keyed by the exact parameter bits. Subdivision only ever
// produces dyadic parameters, so cells share columns and the map stays hot.
class CurveSampleCache {
 public:
  explicit CurveSampleCache(const StarChart& chart) : chart_(chart) {}
  std::pair<cplx, cplx> at(double t) {
    std::uint64_t k;
    std::memcpy(&k, &t, sizeof k);
    auto it = map_.find(k);
    if (it != map_.end()) return it->second;
    const auto v = std::make_pair(chart_.curve(t), chart_.dcurve(t));
    map_.emplace(k, v);
    return v;
  }
  cplx anchor() const { return chart_.anchor(); }

 private:
  const StarChart& chart_;
  std::unordered_map<std::uint64_t, std::pair<cplx, cplx>> map_;
};

template <typename TFun>
AdaptiveResult twopoint_subtracted(const StarChart& chart, cplx z, cplx w, TFun&& T_of,
                                   double tol = 1e-8, double kink_floor = 0.0,
                                   int max_depth = 14, int base_ns = 6, int base_nt = 12) {
  const cplx sep = z - w;
  if (!(std::abs(sep) > 0))
    throw PreconditionError("twopoint_subtracted: arguments coincide");
  const cplx sepb = std::conj(sep);
  const double guard = 1e-13 * (1.0 + std::abs(z) + std::abs(w));
  // Two algebraically equal forms of the remainder; each is cancellation-free
  // near the point the other one pairs off.
  auto R = [&](cplx u) -> cplx {
    const cplx du = u - z;
    const cplx duw = u - w;
    const cplx dub = std::conj(duw);
    if (std::abs(du) < guard || std::abs(duw) < guard) return cplx(0.0);
    if (std::abs(du) <= std::abs(duw))
      return -std::conj(du) / (du * dub * sepb) + 1.0 / (sep * dub);
    return duw / (du * dub * sep) - 1.0 / (du * sepb);
  };

  CurveSampleCache cache(chart);
  const cplx anchor = cache.anchor();
  auto pt = [&](double s, double t) { return anchor + s * (cache.at(t).first - anchor); };
  auto cellsum = [&](const Cell& cc) {
    std::array<double, 5> sv, ws, tv, wt;
    for (int i = 0; i < 5; ++i) {
      sv[i] = 0.5 * (cc.s1 - cc.s0) * kGL5X[i] + 0.5 * (cc.s0 + cc.s1);
      ws[i] = 0.5 * (cc.s1 - cc.s0) * kGL5W[i];
      tv[i] = 0.5 * (cc.t1 - cc.t0) * kGL5X[i] + 0.5 * (cc.t0 + cc.t1);
      wt[i] = 0.5 * (cc.t1 - cc.t0) * kGL5W[i];
    }
    cplx acc = 0.0;
    for (int j = 0; j < 5; ++j) {
      const auto [gv, dgv] = cache.at(tv[j]);
      const cplx rad = gv - anchor;
      const double jac = std::imag(std::conj(rad) * dgv);
      for (int i = 0; i < 5; ++i)
        acc += R(anchor + sv[i] * rad) * (ws[i] * wt[j] * sv[i] * jac);
    }
    return acc;
  };

  struct Item {
    Cell c;
    int d;
  };
  std::vector<Item> stack;
  for (int i = 0; i < base_ns; ++i)
    for (int j = 0; j < base_nt; ++j)
      stack.push_back({{double(i) / base_ns, (i + 1.0) / base_ns, 2.0 * kPi * j / base_nt,
                        2.0 * kPi * (j + 1) / base_nt},
                       0});
  cplx total = 0.0;
  double defer = 0.0;
  int ncells = 0;
  while (!stack.empty()) {
    const auto [c, d] = stack.back();
    stack.pop_back();
    const std::array<cplx, 4> corners = {pt(c.s1, c.t0), pt(c.s1, c.t1), pt(c.s0, c.t1),
                                         pt(c.s0, c.t0)};
    const double diam = cell_diameter(corners);
    if (diam <= kink_floor) {
      total += cellsum(c);
      ++ncells;
      continue;
    }
    const cplx center = pt(0.5 * (c.s0 + c.s1), 0.5 * (c.t0 + c.t1));
    double dist = std::min(std::abs(center - z), std::abs(center - w));
    for (const cplx& cr : corners)
      dist = std::min(dist, std::min(std::abs(cr - z), std::abs(cr - w)));

    auto split = [&](int depth) {
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      stack.push_back({{c.s0, sm, c.t0, tm}, depth});
      stack.push_back({{c.s0, sm, tm, c.t1}, depth});
      stack.push_back({{sm, c.s1, c.t0, tm}, depth});
      stack.push_back({{sm, c.s1, tm, c.t1}, depth});
    };

    if (d < max_depth && diam > std::max(dist, 1e-9) / 1.5) {
      split(d + 1);
      continue;
    }
    const cplx v1 = cellsum(c);
    const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
    const cplx v2 = cellsum({c.s0, sm, c.t0, tm}) + cellsum({c.s0, sm, tm, c.t1}) +
                    cellsum({sm, c.s1, c.t0, tm}) + cellsum({sm, c.s1, tm, c.t1});
    if (d < max_depth && std::abs(v2 - v1) > tol) {
      split(d + 1);
      continue;
    }
    if (d >= max_depth) defer = std::max(defer, std::abs(v2 - v1));
    total += v2;
    ++ncells;
  }
  total += T_of(z) / sepb - std::conj(T_of(w)) / sep;
  return {total, defer, ncells};
}

// ---------------------------------------------------------------------------
// Boundary-conjugate continuation usable on any domain: closed form when
// available, two-sided germ with the noise-aware cut otherwise.
// ---------------------------------------------------------------------------

inline cplx schwarz_extended(const DomainSpec& d, const TwoSidedSeries& S, cplx z) {
  if (d.kind != DomainKind::smooth) return schwarz_value(d, z);
  const double r = std::abs(z);
  if (!(r > 0.5 * d.r_min()))
    throw RegionError("schwarz_extended: point too deep inside for the germ");
  return S.plus_eval(z) + S.tail_eval(z, S.noise_cut(std::max(r, 0.9 * d.r_min())));
}

// ---------------------------------------------------------------------------
// Kernel evaluator.
// ---------------------------------------------------------------------------

enum class Backend { closed_form, quadrature };

inline const char* backend_name(Backend b) {
  return b == Backend::closed_form ? "closed_form" : "quadrature";
}

// Knobs for the near-field quadrature route. The subtracted form trades the
// deep singular cascades for exact solid terms; it is the right choice when
// many evaluations at moderate accuracy are needed.
struct Tier3Options {
  bool subtracted = false;
  double tol = 1e-11;
  double kink_floor = 0.0;  // cells this small are accepted without refinement
};

class KernelEvaluator {
 public:
  explicit KernelEvaluator(DomainSpec dom, Backend backend = Backend::closed_form,
                           Tier3Options opts = {})
      : dom_(std::move(dom)), backend_(backend), opts_(opts), chart_(dom_.chart()) {}

  const DomainSpec& domain() const { return dom_; }
  Backend backend() const { return backend_; }

  // E(z, w), defined for every placement of the arguments.
  cplx exp_transform(cplx z, cplx w) const {
    const Key key{z, w};
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const cplx v = eval_e(z, w);
    {
      std::lock_guard<std::mutex> lk(mu_);
      memo_.emplace(key, v);
    }
    return v;
  }

  // H = E / ((z - w)(conj z - conj w)) on interior pairs; near the diagonal a
  // closed form is used when available, otherwise a radial-offset Richardson
  // extrapolation.
  cplx kernel_H(cplx z, cplx w) const {
    if (!dom_.contains(z) || !dom_.contains(w))
      throw RegionError("kernel_H: both arguments must lie inside the domain");
    if (backend_ == Backend::closed_form && dom_.kind == DomainKind::disk) {
      const cplx c_eff = dom_.anchor + dom_.scale * (dom_.center - dom_.anchor);
      const double r_eff = dom_.scale * dom_.r;
      return 1.0 / (sqr(r_eff) - (z - c_eff) * std::conj(w - c_eff));
    }
    if (backend_ == Backend::closed_form && dom_.kind == DomainKind::ellipse) {
      const double ae = dom_.scale * dom_.a, be = dom_.scale * dom_.b;
      const cplx wb = std::conj(w);
      const cplx D = 4.0 * sqr(ae) * sqr(be) + (sqr(ae) - sqr(be)) * (z * z + wb * wb) -
                     2.0 * (sqr(ae) + sqr(be)) * z * wb;
      return sqr(ae + be) / D;
    }
    const double sep = std::abs(z - w);
    if (sep < 1e-6 * dom_.diam()) {
      // Richardson in the offset: H(z, z + delta u) = H(z, z) + O(delta).
      const double delta = 1e-3 * dom_.diam();
      cplx u = dom_.anchor - z;
      u = (std::abs(u) < 1e-12) ? cplx(1.0) : u / std::abs(u);
      const cplx h1 = off_diag_H(z, z + delta * u);
      const cplx h2 = off_diag_H(z, z + 0.5 * delta * u);
      return 2.0 * h2 - h1;
    }
    return off_diag_H(z, w);
  }

  // G = E / (conj z - conj w), z interior, w exterior.
  cplx kernel_G(cplx z, cplx w) const {
    if (!dom_.contains(z))
      throw RegionError("kernel_G: first argument must lie inside the domain");
    if (dom_.contains(w))
      throw RegionError("kernel_G: second argument must lie outside the closed domain");
    return exp_transform(z, w) / (std::conj(z) - std::conj(w));
  }

  // G* = -E / (z - w), z exterior, w interior.
  cplx kernel_G_star(cplx z, cplx w) const {
    if (dom_.contains(z))
      throw RegionError("kernel_G_star: first argument must lie outside the closed domain");
    if (!dom_.contains(w))
      throw RegionError("kernel_G_star: second argument must lie inside the domain");
    return -exp_transform(z, w) / (z - w);
  }

  // F = E restricted to exterior pairs.
  cplx kernel_F(cplx z, cplx w) const {
    if (dom_.contains(z) || dom_.contains(w))
      throw RegionError("kernel_F: both arguments must lie outside the closed domain");
    return exp_transform(z, w);
  }

 private:
  struct Key {
    cplx z, w;
    bool operator==(const Key& o) const { return z == o.z && w == o.w; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      const std::hash<double> h;
      std::size_t s = h(k.z.real());
      auto mix = [&s](std::size_t v) { s ^= v + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2); };
      mix(h(k.z.imag()));
      mix(h(k.w.real()));
      mix(h(k.w.imag()));
      return s;
    }
  };

  cplx off_diag_H(cplx z, cplx w) const {
    return exp_transform(z, w) / ((z - w) * (std::conj(z) - std::conj(w)));
  }

  cplx eval_e(cplx z, cplx w) const {
    const bool zi = dom_.contains(z), wi = dom_.contains(w);
    if (backend_ == Backend::closed_form && dom_.kind == DomainKind::disk)
      return disk_closed(z, w, zi, wi);
    if (backend_ == Backend::closed_form && dom_.kind == DomainKind::ellipse && zi && wi) {
      const double ae = dom_.scale * dom_.a, be = dom_.scale * dom_.b;
      const cplx wb = std::conj(w);
      const cplx D = 4.0 * sqr(ae) * sqr(be) + (sqr(ae) - sqr(be)) * (z * z + wb * wb) -
                     2.0 * (sqr(ae) + sqr(be)) * z * wb;
      return sqr(ae + be) / D * (z - w) * (std::conj(z) - std::conj(w));
    }
    const double far = 1.9 * dom_.R_bound();
    if (std::abs(w) >= far) return tier2(z, w, zi);
    if (std::abs(z) >= far) return std::conj(tier2(w, z, wi));
    if (opts_.subtracted) {
      const auto res = twopoint_subtracted(
          chart_, z, w, [this](cplx p) { return solid_cauchy(p); }, opts_.tol,
          opts_.kink_floor);
      return std::exp(-res.value / kPi);
    }
    const auto res =
        twopoint_log_integral(chart_, z, w, [](cplx) { return cplx(1.0); }, opts_.tol);
    return std::exp(-res.value / kPi);
  }

  // T(p) = int dA(u)/(u - p): pi (S_plus(p) - conj p) inside, -pi s_minus(p)
  // outside; memoized since the subtracted route hits the same points often.
  cplx solid_cauchy(cplx p) const {
    {
      std::lock_guard<std::mutex> lk(tmu_);
      auto it = tmemo_.find(Key{p, 0.0});
      if (it != tmemo_.end()) return it->second;
    }
    cplx v;
    if (dom_.contains(p)) {
      cplx sp;
      if (dom_.kind == DomainKind::smooth) {
        ensure_series();
        sp = germ_.plus_eval(p);
      } else {
        sp = s_plus(dom_, p, 2048);
      }
      v = kPi * (sp - std::conj(p));
    } else {
      const auto [spar, tpar] = chart_.param_of(p);
      (void)spar;
      const double bdist = std::abs(p - dom_.curve(tpar));
      const int n = bdist < 0.02 * dom_.diam() ? 8192 : 2048;
      v = -kPi * s_minus(dom_, p, n);
    }
    {
      std::lock_guard<std::mutex> lk(tmu_);
      tmemo_.emplace(Key{p, 0.0}, v);
    }
    return v;
  }

  cplx disk_closed(cplx z, cplx w, bool zi, bool wi) const {
    const cplx c_eff = dom_.anchor + dom_.scale * (dom_.center - dom_.anchor);
    const double r_eff = dom_.scale * dom_.r;
    const cplx zz = z - c_eff, ww = w - c_eff;
    if (zi && wi)
      return (zz - ww) * std::conj(zz - ww) / (sqr(r_eff) - zz * std::conj(ww));
    if (zi && !wi) return 1.0 - std::conj(zz) / std::conj(ww);
    if (!zi && wi) return 1.0 - ww / zz;
    return 1.0 - sqr(r_eff) / (zz * std::conj(ww));
  }

  // Far-argument series: I(z, w) = sum_n c_n(z) / conj(w)^{n+1} with
  // c_n = (T^{n+1} - P_{n+1}(z)) / (n+1), T = conj(z) inside, the continued
  // boundary-conjugate outside; P_{n+1} is the nonnegative-power part of the
  // (n+1)-st germ power. E = exp(-I).
  cplx tier2(cplx z, cplx w, bool zi) const {
    ensure_series();
    const cplx T = zi ? std::conj(z) : schwarz_extended(dom_, germ_, z);
    const cplx wbi = 1.0 / std::conj(w);
    cplx I = 0.0;
    cplx Tp = 1.0;   // T^{n}
    cplx wp = wbi;   // conj(w)^{-(n+1)}
    for (int n = 0; n < kNMax; ++n) {
      Tp *= T;
      // Evaluate P_{n+1}(z) by Horner over stored coefficients.
      const auto& P = plus_coefs_[static_cast<std::size_t>(n)];
      cplx pv = 0.0;
      for (int j = static_cast<int>(P.size()) - 1; j >= 0; --j)
        pv = pv * z + P[static_cast<std::size_t>(j)];
      I += wp * (Tp - pv) / double(n + 1);
      wp *= wbi;
    }
    return std::exp(-I);
  }

  void ensure_series() const {
    std::lock_guard<std::mutex> lk(series_mu_);
    if (series_ready_) return;
    const int w = kWindow;
    if (dom_.kind == DomainKind::smooth)
      germ_ = schwarz_series(dom_, 48, w + 2, 2048);
    else
      germ_ = schwarz_series(dom_, 2, w + 2);
    // Germ as power coefficients: coefficient of x^j is M_{-j-1}, j in [-w, w].
    std::vector<cplx> base(static_cast<std::size_t>(2 * w + 1), 0.0);
    auto at = [&](std::vector<cplx>& v, int j) -> cplx& {
      return v[static_cast<std::size_t>(j + w)];
    };
    for (int j = -w; j <= w; ++j) {
      const int m = -j - 1;
      if (m > germ_.K_ext) continue;
      if (m < -germ_.K_int) continue;  // interior side complete or decayed
      at(base, j) = germ_.M(m);
    }
    std::vector<cplx> power = base;
    plus_coefs_.clear();
    plus_coefs_.reserve(kNMax);
    for (int n = 1; n <= kNMax; ++n) {
      std::vector<cplx> plus(static_cast<std::size_t>(w + 1), 0.0);
      for (int j = 0; j <= w; ++j) plus[static_cast<std::size_t>(j)] = at(power, j);
      plus_coefs_.push_back(std::move(plus));
      if (n == kNMax) break;
      std::vector<cplx> next(static_cast<std::size_t>(2 * w + 1), 0.0);
      for (int j1 = -w; j1 <= w; ++j1) {
        const cplx a = at(power, j1);
        if (a == cplx(0.0)) continue;
        for (int j2 = -w; j2 <= w; ++j2) {
          const int j = j1 + j2;
          if (j < -w || j > w) continue;
          at(next, j) += a * at(base, j2);
        }
      }
      power = std::move(next);
    }
    series_ready_ = true;
  }

  static constexpr int kNMax = 60;
  static constexpr int kWindow = 64;

  DomainSpec dom_;
  Backend backend_;
  Tier3Options opts_;
  StarChart chart_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Key, cplx, KeyHash> memo_;
  mutable std::mutex tmu_;
  mutable std::unordered_map<Key, cplx, KeyHash> tmemo_;
  mutable std::mutex series_mu_;
  mutable bool series_ready_ = false;
  mutable TwoSidedSeries germ_;
  mutable std::vector<std::vector<cplx>> plus_coefs_;
};

// Weighted variant: the defining integral carries a smooth density rho; a
// vanishing density gives exactly 1, and halving rho takes a square root.
inline cplx exp_transform_weighted(const DomainSpec& dom,
                                   const std::function<cplx(cplx)>& rho, cplx z, cplx w,
                                   double tol = 1e-10) {
  const auto res = twopoint_log_integral(dom.chart(), z, w, rho, tol);
  return std::exp(-res.value / kPi);
}

// ---------------------------------------------------------------------------
// Cauchy transforms.
// ---------------------------------------------------------------------------

// C[mu](z) = -(1/pi) int dmu(zeta) / (zeta - z). Point masses are exact;
// polynomial densities go through the exact boundary reduction
//   -(1/(2 pi i)) oint Q(zeta, conj zeta) dzeta / (zeta - z) + [z inside] Q(z, conj z);
// smooth extras use the adaptive engine.
inline cplx cauchy_area(const DomainSpec& dom, const CauchyDensity& mu, cplx z,
                        int nodes = 2048) {
  cplx acc = 0.0;
  for (const auto& pm : mu.points) {
    if (std::abs(pm.location - z) < 1e-12 * std::max(1.0, dom.diam()))
      throw SingularityError("cauchy_area: evaluation point hits a point mass");
    acc += -(pm.weight / kPi) / (pm.location - z);
  }
  if (!mu.poly.empty()) {
    const auto [sz, tz] = dom.chart().param_of(z);
    (void)sz;
    int n = nodes;
    if (std::abs(z - dom.curve(tz)) < 0.02 * dom.diam()) n = std::max(n, 8192);
    const auto q = boundary_quadrature(dom, n);
    cplx b = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      b += poly_antiderivative(mu.poly, q.nodes[j], std::conj(q.nodes[j])) /
           (q.nodes[j] - z) * q.dz[j];
    acc += -b / (2.0 * kPi * kI);
    if (dom.contains(z)) acc += poly_antiderivative(mu.poly, z, std::conj(z));
  }
  if (mu.smooth) {
    const auto res = recip_area_integral(dom.chart(), mu.smooth, z, 1e-10);
    acc += -res.value / kPi;
  }
  return acc;
}

// Analytic continuation of the exterior Cauchy transform of a polynomial
// density across the boundary: for z inside, add the jump term Q(z, S(z)).
inline cplx cauchy_exterior_continued(const DomainSpec& dom, const TwoSidedSeries& germ,
                                      const std::vector<Monomial>& poly, cplx z,
                                      int nodes = 2048) {
  const auto q = boundary_quadrature(dom, nodes);
  cplx b = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j)
    b += poly_antiderivative(poly, q.nodes[j], std::conj(q.nodes[j])) / (q.nodes[j] - z) *
         q.dz[j];
  cplx acc = -b / (2.0 * kPi * kI);
  if (dom.contains(z))
    acc += poly_antiderivative(poly, z, schwarz_extended(dom, germ, z));
  return acc;
}

enum class Side { inside, outside };

struct BoundaryTransform {
  Side side;
  cplx value;
  bool near_boundary;  // within 1e-6 of the boundary: values are unreliable
};

// value = -(1/(2 pi i)) oint f(zeta) dzeta / (zeta - z) for either side:
// minus the interior part inside, the exterior part outside.
inline BoundaryTransform cauchy_boundary(const DomainSpec& dom,
                                         const std::function<cplx(cplx)>& f, cplx z,
                                         int nodes = 2048) {
  const auto [sz, tz] = dom.chart().param_of(z);
  const double bdist = std::abs(z - dom.curve(tz));
  int n = nodes;
  if (bdist < 0.02 * dom.diam()) n = std::max(n, 8192);
  const auto q = boundary_quadrature(dom, n);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j)
    acc += f(q.nodes[j]) / (q.nodes[j] - z) * q.dz[j];
  return {dom.contains(z) ? Side::inside : Side::outside, -acc / (2.0 * kPi * kI),
          bdist < 1e-6};
}

// Decaying part of the boundary conjugate, evaluated outside the closed
// domain. Closed forms for disk and ellipse; the boundary route otherwise.
inline cplx s_minus(const DomainSpec& dom, cplx z, int nodes = 2048) {
  if (dom.contains(z))
    throw RegionError("s_minus: point must lie outside the closed domain");
  switch (dom.kind) {
    case DomainKind::disk: {
      const cplx c_eff = dom.anchor + dom.scale * (dom.center - dom.anchor);
      return sqr(dom.scale * dom.r) / (z - c_eff);
    }
    case DomainKind::ellipse: {
      const double ae = dom.scale * dom.a, be = dom.scale * dom.b;
      return schwarz_value(dom, z) - (ae - be) / (ae + be) * z;
    }
    case DomainKind::smooth: {
      const auto q = boundary_quadrature(dom, nodes);
      cplx acc = 0.0;
      for (std::size_t j = 0; j < q.nodes.size(); ++j)
        acc += std::conj(q.nodes[j]) / (q.nodes[j] - z) * q.dz[j];
      return -acc / (2.0 * kPi * kI);
    }
  }
  return 0.0;
}

// Interior part of the boundary conjugate, evaluated inside.
inline cplx s_plus(const DomainSpec& dom, cplx z, int nodes = 2048) {
  if (!dom.contains(z)) throw RegionError("s_plus: point must lie inside the domain");
  switch (dom.kind) {
    case DomainKind::disk: {
      const cplx c_eff = dom.anchor + dom.scale * (dom.center - dom.anchor);
      return std::conj(c_eff);
    }
    case DomainKind::ellipse: {
      const double ae = dom.scale * dom.a, be = dom.scale * dom.b;
      return (ae - be) / (ae + be) * z;
    }
    case DomainKind::smooth: {
      const auto q = boundary_quadrature(dom, nodes);
      cplx acc = 0.0;
      for (std::size_t j = 0; j < q.nodes.size(); ++j)
        acc += std::conj(q.nodes[j]) / (q.nodes[j] - z) * q.dz[j];
      return acc / (2.0 * kPi * kI);
    }
  }
  return 0.0;
}

}  // namespace rkm
