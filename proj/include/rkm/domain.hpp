// Domain descriptions: disk / ellipse / trigonometric-polynomial boundaries,
// membership and exhaustion, harmonic moments, and the two-sided germ of the
// boundary-conjugate function at infinity.
#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/quadrature.hpp"

namespace rkm {

enum class DomainKind { disk, ellipse, smooth };

struct DomainSpec {
  DomainKind kind = DomainKind::disk;
  cplx center{0.0};            // disk only
  double r = 1.0;              // disk radius
  double a = 2.0, b = 1.0;     // ellipse semi-axes, a > b > 0, centered at 0
  std::vector<std::pair<int, cplx>> fourier;  // smooth: gamma(t) = sum c_k e^{ikt}
  cplx anchor{0.0};            // interior point; scaling center for shrink
  double scale = 1.0;          // exhaustion factor applied about the anchor

  // Cached geometry (filled by the factories / shrink).
  double cache_area = 0.0;
  double cache_rbound = 0.0;
  double cache_rmin = 0.0;
  double cache_diam = 0.0;
  double cache_star_min = 0.0;  // min of Im(conj(gamma - anchor) * gamma')

  cplx base_curve(double t) const {
    switch (kind) {
      case DomainKind::disk:
        return center + r * std::polar(1.0, t);
      case DomainKind::ellipse:
        return cplx{a * std::cos(t), b * std::sin(t)};
      case DomainKind::smooth: {
        cplx z = 0.0;
        for (const auto& [k, c] : fourier) z += c * std::polar(1.0, k * t);
        return z;
      }
    }
    return 0.0;
  }

  cplx base_dcurve(double t) const {
    switch (kind) {
      case DomainKind::disk:
        return r * kI * std::polar(1.0, t);
      case DomainKind::ellipse:
        return cplx{-a * std::sin(t), b * std::cos(t)};
      case DomainKind::smooth: {
        cplx z = 0.0;
        for (const auto& [k, c] : fourier) z += c * cplx{0.0, double(k)} * std::polar(1.0, k * t);
        return z;
      }
    }
    return 0.0;
  }

  cplx curve(double t) const { return anchor + scale * (base_curve(t) - anchor); }
  cplx dcurve(double t) const { return scale * base_dcurve(t); }

  StarChart chart() const {
    DomainSpec copy = *this;
    return StarChart([copy](double t) { return copy.curve(t); },
                     [copy](double t) { return copy.dcurve(t); }, anchor);
  }

  double area() const { return cache_area; }
  double R_bound() const { return cache_rbound; }  // max |curve|
  double r_min() const { return cache_rmin; }      // min |curve|
  double diam() const { return cache_diam; }
  bool star_shaped() const { return cache_star_min > 0.0; }

  // Open-set membership; points within 1e-12 of the boundary report false.
  bool contains(cplx z) const {
    switch (kind) {
      case DomainKind::disk: {
        const cplx c_eff = anchor + scale * (center - anchor);
        return std::abs(z - c_eff) < scale * r - 1e-12;
      }
      case DomainKind::ellipse: {
        const double q = sqr(z.real() / (scale * a)) + sqr(z.imag() / (scale * b));
        return q < 1.0 - 1e-12;
      }
      case DomainKind::smooth: {
        if (std::abs(z - anchor) < 1e-300) return true;
        const auto [s, t] = chart().param_of(z);
        (void)t;
        return s < 1.0 - 1e-12;
      }
    }
    return false;
  }

  void recompute_cache() {
    const int n = 1024;
    double ar = 0.0, rb = 0.0, rm = 1e300, sm = 1e300;
    std::vector<cplx> pts(n);
    for (int j = 0; j < n; ++j) {
      const double t = 2.0 * kPi * j / n;
      const cplx g = curve(t), dg = dcurve(t);
      pts[j] = g;
      ar += std::imag(std::conj(g) * dg);
      rb = std::max(rb, std::abs(g));
      rm = std::min(rm, std::abs(g));
      sm = std::min(sm, std::imag(std::conj(g - anchor) * dg));
    }
    cache_area = ar * (2.0 * kPi / n) / 2.0;
    switch (kind) {  // closed forms where available
      case DomainKind::disk:
        cache_area = kPi * sqr(scale * r);
        cache_diam = 2.0 * scale * r;
        break;
      case DomainKind::ellipse:
        cache_area = kPi * (scale * a) * (scale * b);
        cache_diam = 2.0 * scale * a;
        break;
      case DomainKind::smooth: {
        double dm = 0.0;
        for (int i = 0; i < n; i += 4)
          for (int j = i + 4; j < n; j += 4) dm = std::max(dm, std::abs(pts[i] - pts[j]));
        cache_diam = dm;
        break;
      }
    }
    cache_rbound = rb;
    cache_rmin = rm;
    cache_star_min = sm;
  }

  static DomainSpec disk_domain(cplx center, double radius) {
    if (radius <= 0) throw GeometryError("disk radius must be positive");
    DomainSpec d;
    d.kind = DomainKind::disk;
    d.center = center;
    d.r = radius;
    d.anchor = center;
    d.recompute_cache();
    return d;
  }

  static DomainSpec ellipse_domain(double a, double b) {
    if (!(a > b && b > 0)) throw GeometryError("ellipse requires a > b > 0");
    DomainSpec d;
    d.kind = DomainKind::ellipse;
    d.a = a;
    d.b = b;
    d.anchor = 0.0;
    d.recompute_cache();
    return d;
  }

  static DomainSpec smooth_domain(std::vector<std::pair<int, cplx>> coeffs,
                                  cplx anchor = 0.0) {
    DomainSpec d;
    d.kind = DomainKind::smooth;
    d.fourier = std::move(coeffs);
    d.anchor = anchor;
    d.recompute_cache();
    if (!d.star_shaped())
      throw GeometryError("smooth boundary is not star-shaped about the anchor");
    d.check_simple();
    if (!d.contains(anchor)) throw GeometryError("anchor must lie inside the domain");
    return d;
  }

  // Discrete simple-curve check: no two non-adjacent chords intersect.
  void check_simple() const {
    const int n = 256;
    std::vector<cplx> p(n);
    for (int j = 0; j < n; ++j) p[j] = curve(2.0 * kPi * j / n);
    auto orient = [](cplx u, cplx v, cplx w) {
      return std::imag(std::conj(v - u) * (w - u));
    };
    for (int i = 0; i < n; ++i) {
      for (int j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        const cplx a0 = p[i], a1 = p[(i + 1) % n], b0 = p[j], b1 = p[(j + 1) % n];
        if (orient(a0, a1, b0) * orient(a0, a1, b1) < 0 &&
            orient(b0, b1, a0) * orient(b0, b1, a1) < 0)
          throw GeometryError("boundary parametrization self-intersects");
      }
    }
  }
};

// Exhaustion by scaling about the anchor. The result stays strictly inside
// for star-shaped domains; anything else is rejected.
inline DomainSpec shrink(const DomainSpec& d, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("shrink: eps must lie in (0,1)");
  DomainSpec out = d;
  out.scale *= (1.0 - eps);
  out.recompute_cache();
  if (d.kind == DomainKind::smooth && !d.star_shaped())
    throw GeometryError("shrink: domain is not star-shaped about its anchor");
  return out;
}

// Node-count rule for shrunken-contour work: finer exhaustion needs more
// nodes because the integrand peaks like 1/eps near the boundary.
inline int n_for_eps(double eps) {
  int n = std::max(1024, static_cast<int>(std::ceil(10.0 / eps)));
  if (n % 2 != 0) ++n;
  return n;
}

inline BoundaryQuadrature boundary_quadrature(const DomainSpec& d, int n = 512) {
  return make_boundary_trapezoid([&d](double t) { return d.curve(t); },
                                 [&d](double t) { return d.dcurve(t); }, n);
}

inline AreaQuadrature area_quadrature(const DomainSpec& d, int ns = 6, int nt = 12) {
  return make_area_quadrature(d.chart(), ns, nt);
}

// ---------------------------------------------------------------------------
// Harmonic moments. One boundary formula covers both sides of the germ:
// M_j = (1/2*pi*i) * oint conj(zeta) * zeta^j dzeta,   j in Z,
// with j >= 0 the exterior moments ((1/pi) * int zeta^j dA) and j < 0 the
// interior expansion coefficients.
// ---------------------------------------------------------------------------

namespace detail {

inline double half_binomial(int m) {
  // binom(1/2, m)
  double v = 1.0;
  for (int i = 0; i < m; ++i) v *= (0.5 - i) / (i + 1);
  return v;
}

}  // namespace detail

// Exact small integer power; std::pow(cplx, int) routes through exp(log z)
// and produces NaN at z = 0.
inline cplx ipow(cplx z, int n) {
  if (n < 0) return 1.0 / ipow(z, -n);
  cplx acc = 1.0, base = z;
  while (n > 0) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

// Closed-form moment for disk/ellipse, any j; quadrature for smooth domains.
inline cplx moment_closed_form(const DomainSpec& d, int j) {
  switch (d.kind) {
    case DomainKind::disk: {
      const cplx c_eff = d.anchor + d.scale * (d.center - d.anchor);
      const double r_eff = d.scale * d.r;
      if (j >= 0) return sqr(r_eff) * ipow(c_eff, j);
      if (j == -1) return std::conj(c_eff);
      return 0.0;
    }
    case DomainKind::ellipse: {
      const double ae = d.scale * d.a, be = d.scale * d.b;
      const double c2 = ae * ae - be * be;
      if (j == -2) return (ae - be) / (ae + be);
      if (j < 0) return 0.0;
      if (j % 2 != 0) return 0.0;
      const int m = j / 2 + 1;  // j = 2m - 2
      return -(2.0 * ae * be / c2) * detail::half_binomial(m) * std::pow(-c2, m);
    }
    case DomainKind::smooth:
      throw PreconditionError("no closed-form moments for smooth domains");
  }
  return 0.0;
}

inline std::vector<cplx> exterior_moments(const DomainSpec& d, int K, int nodes = 1024) {
  if (K < 0) throw UsageError("exterior_moments: K must be nonnegative");
  std::vector<cplx> M(K + 1);
  if (d.kind != DomainKind::smooth) {
    for (int k = 0; k <= K; ++k) M[k] = moment_closed_form(d, k);
    return M;
  }
  const auto q = boundary_quadrature(d, nodes);
  for (int k = 0; k <= K; ++k) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      acc += std::conj(q.nodes[j]) * ipow(q.nodes[j], k) * q.dz[j];
    M[k] = acc / (2.0 * kPi * kI);
  }
  return M;
}

// Two-sided germ S(z) = sum_k M_k z^{-(k+1)}, k = -K_int .. K_ext. The
// interior side is complete (closed form) for disk/ellipse; for smooth
// domains both sides are quadrature values with a roundoff floor that grows
// like R_bound^k, so tail evaluations must respect the noise-aware cut.
struct TwoSidedSeries {
  int K_int = 0, K_ext = 0;
  std::vector<cplx> coef;  // index k + K_int
  bool interior_complete = false;
  bool exterior_exact = false;

  cplx M(int k) const {
    if (k < -K_int) {
      if (interior_complete) return 0.0;
      throw TruncationError("two-sided series: interior coefficient out of range");
    }
    if (k > K_ext) throw TruncationError("two-sided series: exterior coefficient out of range");
    return coef[static_cast<std::size_t>(k + K_int)];
  }

  // Truncation index minimizing |M_k| / r^{k+1}: the asymptotic-series rule
  // that stops before quadrature noise (floor ~ eps * R_bound^k) takes over.
  int noise_cut(double r_eval) const {
    int best = 0;
    double best_v = 1e300;
    double p = r_eval;
    for (int k = 0; k <= K_ext; ++k) {
      const double v = std::abs(M(k)) / p;
      if (v < best_v && std::abs(M(k)) > 0) {
        best_v = v;
        best = k;
      }
      p *= r_eval;
    }
    return best;
  }

  // sum_{k=0}^{kcut} M_k z^{-(k+1)}; kcut < 0 means all exterior terms.
  cplx tail_eval(cplx z, int kcut = -1) const {
    if (kcut < 0) kcut = K_ext;
    cplx acc = 0.0;
    const cplx zi = 1.0 / z;
    for (int k = std::min(kcut, K_ext); k >= 0; --k) acc = (acc + M(k)) * zi;
    return acc;
  }

  // Interior part: sum_{m>=1} M_{-m} z^{m-1}.
  cplx plus_eval(cplx z) const {
    cplx acc = 0.0;
    for (int m = K_int; m >= 1; --m) acc = acc * z + M(-m);
    return acc;
  }
};

inline TwoSidedSeries schwarz_series(const DomainSpec& d, int K_int, int K_ext,
                                     int nodes = 1024) {
  if (!d.contains(0.0))
    throw PreconditionError("schwarz_series: expansion point 0 must lie inside the domain");
  TwoSidedSeries S;
  S.K_int = K_int;
  S.K_ext = K_ext;
  S.coef.resize(static_cast<std::size_t>(K_int + K_ext + 1));
  if (d.kind != DomainKind::smooth) {
    for (int k = -K_int; k <= K_ext; ++k)
      S.coef[static_cast<std::size_t>(k + K_int)] = moment_closed_form(d, k);
    // Complete once the last nonzero interior coefficient is in range.
    S.interior_complete = (d.kind == DomainKind::disk) ? (K_int >= 1) : (K_int >= 2);
    S.exterior_exact = true;
    return S;
  }
  const auto q = boundary_quadrature(d, nodes);
  for (int k = -K_int; k <= K_ext; ++k) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      acc += std::conj(q.nodes[j]) * ipow(q.nodes[j], k) * q.dz[j];
    S.coef[static_cast<std::size_t>(k + K_int)] = acc / (2.0 * kPi * kI);
  }
  return S;
}

// Closed-form boundary-conjugate continuation where available. For the
// ellipse the branch cut sits on the focal segment; each square-root factor
// takes its principal branch, making the function single-valued off the cut
// and O(1/z) at infinity after the linear part is removed.
inline cplx schwarz_value(const DomainSpec& d, cplx z) {
  switch (d.kind) {
    case DomainKind::disk: {
      const cplx c_eff = d.anchor + d.scale * (d.center - d.anchor);
      const double r_eff = d.scale * d.r;
      return std::conj(c_eff) + sqr(r_eff) / (z - c_eff);
    }
    case DomainKind::ellipse: {
      const double ae = d.scale * d.a, be = d.scale * d.b;
      const double c2 = ae * ae - be * be;
      const double c = std::sqrt(c2);
      return ((ae * ae + be * be) * z - 2.0 * ae * be * std::sqrt(z - c) * std::sqrt(z + c)) / c2;
    }
    case DomainKind::smooth:
      throw PreconditionError("schwarz_value: no closed form for smooth domains");
  }
  return 0.0;
}

}  // namespace rkm
