// Boundary and area quadrature rules over smooth closed curves: periodic
// trapezoid contours, star-shaped radial cell charts, adaptive subdivision,
// and exact local reductions for integrable singularities.
#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "rkm/common.hpp"

namespace rkm {

// Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 5> kGL5X = {
    -0.90617984593866399280, -0.53846931010568309104, 0.0,
    0.53846931010568309104, 0.90617984593866399280};
inline constexpr std::array<double, 5> kGL5W = {
    0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
    0.47862867049936646804, 0.23692688505618908751};
inline constexpr std::array<double, 8> kGL8X = {
    -0.96028985649753623168, -0.79666647741362673959, -0.52553240991632898582,
    -0.18343464249564980494, 0.18343464249564980494, 0.52553240991632898582,
    0.79666647741362673959, 0.96028985649753623168};
inline constexpr std::array<double, 8> kGL8W = {
    0.10122853629037625915, 0.22238103445337447054, 0.31370664587788728734,
    0.36268378337836198297, 0.36268378337836198297, 0.31370664587788728734,
    0.22238103445337447054, 0.10122853629037625915};

// ---------------------------------------------------------------------------
// Boundary rule: equispaced-in-parameter trapezoid on a closed analytic curve.
// Contour integrals are computed as sum(f(nodes[j]) * dz[j]).
// ---------------------------------------------------------------------------

struct BoundaryQuadrature {
  std::vector<cplx> nodes;  // curve samples
  std::vector<cplx> dz;     // tangent * parameter step (complex line elements)
  bool ccw = true;
};

using CurveFn = std::function<cplx(double)>;

inline BoundaryQuadrature make_boundary_trapezoid(const CurveFn& g,
                                                  const CurveFn& dg, int n) {
  if (n <= 0 || n % 2 != 0)
    throw PreconditionError("boundary node count must be positive and even");
  BoundaryQuadrature q;
  q.nodes.resize(n);
  q.dz.resize(n);
  const double h = 2.0 * kPi / n;
  for (int j = 0; j < n; ++j) {
    const double t = h * j;
    q.nodes[j] = g(t);
    q.dz[j] = dg(t) * h;
  }
  return q;
}

template <typename F>
cplx integrate_boundary(const BoundaryQuadrature& q, F&& f) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) acc += f(q.nodes[j]) * q.dz[j];
  return acc;
}

// Max deviation of the discrete winding number (1/2*pi*i) * sum dz/(z - p)
// from 1 over the given interior points.
inline double winding_residual(const BoundaryQuadrature& q,
                               const std::vector<cplx>& interior_points) {
  double worst = 0.0;
  for (cplx p : interior_points) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j) acc += q.dz[j] / (q.nodes[j] - p);
    worst = std::max(worst, std::abs(acc / (2.0 * kPi * kI) - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Star chart: radial coordinates zeta = anchor + s * (g(t) - anchor), s in
// [0,1], for a curve star-shaped about the anchor. Cells are (s, t) boxes;
// the induced area element s * Im(conj(g - anchor) * g'(t)) ds dt is positive
// exactly when the star-shape condition holds.
// ---------------------------------------------------------------------------

class StarChart {
 public:
  StarChart() = default;
  StarChart(CurveFn g, CurveFn dg, cplx anchor)
      : g_(std::move(g)), dg_(std::move(dg)), anchor_(anchor) {}

  cplx anchor() const { return anchor_; }
  cplx curve(double t) const { return g_(t); }
  cplx dcurve(double t) const { return dg_(t); }

  cplx point(double s, double t) const { return anchor_ + s * (g_(t) - anchor_); }

  // Inverts z = point(s, t) by Newton iteration on the angular residual.
  // Returns (s, t) with t in [0, 2*pi). Valid for star-shaped charts.
  std::pair<double, double> param_of(cplx z) const {
    const cplx w = z - anchor_;
    double t = std::arg(w);
    for (int it = 0; it < 60; ++it) {
      const cplx gv = g_(t) - anchor_;
      const double f = std::imag(std::conj(gv) * w);
      const double df = std::imag(std::conj(dg_(t)) * w);
      const double step = f / df;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const cplx gv = g_(t) - anchor_;
    t = std::fmod(t, 2.0 * kPi);
    if (t < 0) t += 2.0 * kPi;
    return {std::abs(w) / std::abs(gv), t};
  }

  struct CellNodes {
    std::array<cplx, 25> z;
    std::array<double, 25> w;
  };

  // 5x5 Gauss-Legendre tensor rule on the (s, t) box.
  CellNodes cell_nodes(double s0, double s1, double t0, double t1) const {
    CellNodes out;
    std::array<double, 5> sv, wv_s, tv, wv_t;
    for (int i = 0; i < 5; ++i) {
      sv[i] = 0.5 * (s1 - s0) * kGL5X[i] + 0.5 * (s0 + s1);
      wv_s[i] = 0.5 * (s1 - s0) * kGL5W[i];
      tv[i] = 0.5 * (t1 - t0) * kGL5X[i] + 0.5 * (t0 + t1);
      wv_t[i] = 0.5 * (t1 - t0) * kGL5W[i];
    }
    std::array<cplx, 5> gv, dgv;
    for (int j = 0; j < 5; ++j) {
      gv[j] = g_(tv[j]);
      dgv[j] = dg_(tv[j]);
    }
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const cplx rad = gv[j] - anchor_;
        out.z[5 * i + j] = anchor_ + sv[i] * rad;
        out.w[5 * i + j] = wv_s[i] * wv_t[j] * sv[i] * std::imag(std::conj(rad) * dgv[j]);
      }
    }
    return out;
  }

  struct CellEdges {
    std::array<cplx, 64> pts;
    std::array<cplx, 64> dls;
  };

  // Counterclockwise boundary of the (s, t) box: outer arc (t up), radial
  // (s down at t1), inner arc (t down), radial (s up at t0). Two 8-point
  // Gauss-Legendre panels per edge.
  CellEdges cell_edges(double s0, double s1, double t0, double t1) const {
    CellEdges e;
    std::size_t idx = 0;
    auto arc = [&](double ta, double tb, double sv) {
      for (int k = 0; k < 2; ++k) {
        const double a = ta + (tb - ta) * k / 2.0;
        const double b = ta + (tb - ta) * (k + 1) / 2.0;
        for (int i = 0; i < 8; ++i) {
          const double t = 0.5 * (b - a) * kGL8X[i] + 0.5 * (a + b);
          const double wq = 0.5 * (b - a) * kGL8W[i];
          e.pts[idx] = anchor_ + sv * (g_(t) - anchor_);
          e.dls[idx] = wq * sv * dg_(t);
          ++idx;
        }
      }
    };
    auto radial = [&](double sa, double sb, double tv) {
      const cplx rad = g_(tv) - anchor_;
      for (int k = 0; k < 2; ++k) {
        const double a = sa + (sb - sa) * k / 2.0;
        const double b = sa + (sb - sa) * (k + 1) / 2.0;
        for (int i = 0; i < 8; ++i) {
          const double s = 0.5 * (b - a) * kGL8X[i] + 0.5 * (a + b);
          const double wq = 0.5 * (b - a) * kGL8W[i];
          e.pts[idx] = anchor_ + s * rad;
          e.dls[idx] = wq * rad;
          ++idx;
        }
      }
    };
    arc(t0, t1, s1);
    radial(s1, s0, t1);
    arc(t1, t0, s0);
    radial(s0, s1, t0);
    return e;
  }

 private:
  CurveFn g_, dg_;
  cplx anchor_{0.0};
};

struct Cell {
  double s0, s1, t0, t1;
};

inline bool tparam_in(double t, double t0, double t1) {
  double d = std::fmod(t - t0, 2.0 * kPi);
  if (d < 0) d += 2.0 * kPi;
  return d <= (t1 - t0) + 1e-14;
}

// integral over the cell of dA(u)/(u - z), exact up to edge-rule error, valid
// for z inside or outside the cell. The (conj(u) - conj(z)) form keeps the
// integrand bounded; expanding it through conj(u)/(u-z) - pi*conj(z) loses all
// accuracy once z sits near the cell.
inline cplx cell_recip(const StarChart& chart, const Cell& c, cplx z) {
  const auto e = chart.cell_edges(c.s0, c.s1, c.t0, c.t1);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < e.pts.size(); ++i) {
    if (std::abs(e.pts[i] - z) < 1e-300) continue;  // degenerate node hit
    acc += (std::conj(e.pts[i]) - std::conj(z)) * e.dls[i] / (e.pts[i] - z);
  }
  return acc / (2.0 * kI);
}

// Signed integral of dA(u)/|u - p| over the triangle (p, A, B); orientation
// gives the sign. Closed form via the wedge parametrization about p.
inline double tri_recip_abs(cplx p, cplx A, cplx B) {
  const cplx a = A - p, b = B - p;
  const double cross = std::imag(std::conj(a) * b);
  if (cross == 0.0) return 0.0;
  const double len = std::abs(b - a);
  if (len < 1e-300) return 0.0;
  const cplx d = (b - a) / len;
  const double t0 = -(a.real() * d.real() + a.imag() * d.imag());
  const double h = std::abs(a + t0 * d);
  if (h < 1e-300) return 0.0;
  const double sa = -t0, sb = len - t0;
  const double val = h * (std::asinh(sb / h) - std::asinh(sa / h));
  return cross > 0 ? val : -val;
}

// integral of dA(u)/|u - p| over the straight quadrilateral with the given
// counterclockwise corners; exact for p inside or outside.
inline double quad_recip_abs(const std::array<cplx, 4>& corners, cplx p) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += tri_recip_abs(p, corners[i], corners[(i + 1) % 4]);
  return acc;
}

// Corners in counterclockwise order (matching cell_edges orientation).
inline std::array<cplx, 4> cell_corners(const StarChart& chart, const Cell& c) {
  return {chart.point(c.s1, c.t0), chart.point(c.s1, c.t1), chart.point(c.s0, c.t1),
          chart.point(c.s0, c.t0)};
}

inline double cell_diameter(const std::array<cplx, 4>& corners) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) d = std::max(d, std::abs(corners[i] - corners[j]));
  return d;
}

// ---------------------------------------------------------------------------
// Realized area quadrature: flattened cell nodes/weights. Retains the chart
// and cell list so that refine_near can re-subdivide without losing the exact
// partition (weight sums are preserved by construction).
// ---------------------------------------------------------------------------

struct AreaQuadrature {
  StarChart chart;
  std::vector<Cell> cells;
  std::vector<cplx> nodes;
  std::vector<double> weights;

  void realize() {
    nodes.clear();
    weights.clear();
    nodes.reserve(cells.size() * 25);
    weights.reserve(cells.size() * 25);
    for (const Cell& c : cells) {
      const auto cn = chart.cell_nodes(c.s0, c.s1, c.t0, c.t1);
      nodes.insert(nodes.end(), cn.z.begin(), cn.z.end());
      weights.insert(weights.end(), cn.w.begin(), cn.w.end());
    }
  }

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

inline AreaQuadrature make_area_quadrature(const StarChart& chart, int ns, int nt) {
  AreaQuadrature q;
  q.chart = chart;
  q.cells.reserve(static_cast<std::size_t>(ns) * nt);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j)
      q.cells.push_back(Cell{static_cast<double>(i) / ns, (i + 1.0) / ns,
                             2.0 * kPi * j / nt, 2.0 * kPi * (j + 1) / nt});
  q.realize();
  return q;
}

template <typename F>
cplx integrate_area(const AreaQuadrature& q, F&& f) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) acc += f(q.nodes[j]) * q.weights[j];
  return acc;
}

// Splits every cell whose closed box comes within `radius` of one of the
// points until its diameter drops below `radius`. Points outside the chart
// (radial coordinate s > 1) are rejected. Weight sums are preserved exactly
// because cells always partition the domain.
inline AreaQuadrature refine_near(const AreaQuadrature& q, const std::vector<cplx>& points,
                                  double radius, int max_depth = 12) {
  if (radius <= 0) throw PreconditionError("refine_near: radius must be positive");
  std::vector<std::pair<double, double>> params;
  params.reserve(points.size());
  for (cplx p : points) {
    auto st = q.chart.param_of(p);
    if (st.first > 1.0 + 1e-9)
      throw GeometryError("refine_near: point lies outside the closed domain");
    params.push_back(st);
  }
  AreaQuadrature out;
  out.chart = q.chart;
  std::vector<std::pair<Cell, int>> stack;
  for (const Cell& c : q.cells) stack.push_back({c, 0});
  while (!stack.empty()) {
    auto [c, d] = stack.back();
    stack.pop_back();
    const auto corners = cell_corners(q.chart, c);
    const double diam = cell_diameter(corners);
    double dist = 1e300;
    for (cplx p : points) {
      for (const cplx& cr : corners) dist = std::min(dist, std::abs(cr - p));
      dist = std::min(dist, std::abs(q.chart.point(0.5 * (c.s0 + c.s1),
                                                   0.5 * (c.t0 + c.t1)) -
                                     p));
    }
    const bool close = dist <= radius + 0.5 * diam;
    if (close && diam > radius && d < max_depth) {
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      stack.push_back({{c.s0, sm, c.t0, tm}, d + 1});
      stack.push_back({{c.s0, sm, tm, c.t1}, d + 1});
      stack.push_back({{sm, c.s1, c.t0, tm}, d + 1});
      stack.push_back({{sm, c.s1, tm, c.t1}, d + 1});
    } else {
      out.cells.push_back(c);
    }
  }
  out.realize();
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive cell integration with optional integrable |u - p|^{-1} factors.
// Declared singularities drive a distance-based refinement rule; a cell that
// still contains a declared point at the depth cap is finished with the exact
// straight-quad reduction for the 1/|u - p| part.
// ---------------------------------------------------------------------------

struct AbsSingularity {
  cplx p;
  // f(u) = cofactor(u) / |u - p| near p; cofactor must be smooth on the cell.
  std::function<cplx(cplx)> cofactor;
};

struct AdaptiveResult {
  cplx value;
  double err_est;
  int cells_used;
};

namespace detail {

template <typename F>
cplx plain_cell_sum(const StarChart& chart, const Cell& c, F&& f) {
  const auto cn = chart.cell_nodes(c.s0, c.s1, c.t0, c.t1);
  cplx acc = 0.0;
  for (int i = 0; i < 25; ++i) acc += f(cn.z[i]) * cn.w[i];
  return acc;
}

}  // namespace detail

// Integrates f over the chart. `singular` lists integrable 1/|u-p| factors of
// f; `near_points` only steer refinement (bounded integrand assumed there).
// Throws AccuracyError when an unresolved plain cell remains above tol at the
// depth cap.
template <typename F>
AdaptiveResult adaptive_area_integrate(const StarChart& chart, F&& f,
                                       const std::vector<AbsSingularity>& singular,
                                       const std::vector<cplx>& near_points,
                                       double tol = 1e-10, int max_depth = 12,
                                       int base_ns = 6, int base_nt = 12) {
  struct Item {
    Cell c;
    int d;
  };
  std::vector<Item> stack;
  stack.reserve(256);
  for (int i = 0; i < base_ns; ++i)
    for (int j = 0; j < base_nt; ++j)
      stack.push_back({{static_cast<double>(i) / base_ns, (i + 1.0) / base_ns,
                        2.0 * kPi * j / base_nt, 2.0 * kPi * (j + 1) / base_nt},
                       0});
  std::vector<std::pair<cplx, std::pair<double, double>>> sing_params;
  for (const auto& s : singular) sing_params.push_back({s.p, chart.param_of(s.p)});

  cplx total = 0.0;
  double worst_defer = 0.0;
  int ncells = 0;
  while (!stack.empty()) {
    const auto [c, d] = stack.back();
    stack.pop_back();
    const auto corners = cell_corners(chart, c);
    const cplx center = chart.point(0.5 * (c.s0 + c.s1), 0.5 * (c.t0 + c.t1));
    const double diam = cell_diameter(corners);

    int n_inside = 0;
    const AbsSingularity* inside = nullptr;
    for (std::size_t k = 0; k < singular.size(); ++k) {
      const auto& [s, t] = sing_params[k].second;
      if (c.s0 - 1e-12 <= s && s <= c.s1 + 1e-12 && tparam_in(t, c.t0 - 1e-12, c.t1 + 1e-12)) {
        inside = &singular[k];
        ++n_inside;
      }
    }
    // Nearest and second-nearest declared singular points.
    const AbsSingularity* nearest = nullptr;
    double sdist1 = 1e300, sdist2 = 1e300;
    for (const auto& s : singular) {
      double ds = std::abs(center - s.p);
      for (const cplx& cr : corners) ds = std::min(ds, std::abs(cr - s.p));
      if (ds < sdist1) {
        sdist2 = sdist1;
        sdist1 = ds;
        nearest = &s;
      } else {
        sdist2 = std::min(sdist2, ds);
      }
    }
    double ndist = 1e300;
    for (cplx p : near_points) {
      for (const cplx& cr : corners) ndist = std::min(ndist, std::abs(cr - p));
      ndist = std::min(ndist, std::abs(center - p));
    }

    auto split = [&](int depth) {
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      stack.push_back({{c.s0, sm, c.t0, tm}, depth});
      stack.push_back({{c.s0, sm, tm, c.t1}, depth});
      stack.push_back({{sm, c.s1, c.t0, tm}, depth});
      stack.push_back({{sm, c.s1, tm, c.t1}, depth});
    };

    // Exact reduction of the 1/|u - p| part over the straight quad; valid for
    // p inside or outside the cell, and the remainder (cofactor variation) is
    // bounded, so adjacent cells do not cascade to the depth cap.
    auto patched_sum = [&](const Cell& cc, const std::array<cplx, 4>& crn, const cplx p,
                           const cplx g0) {
      cplx v = g0 * quad_recip_abs(crn, p);
      const auto cn = chart.cell_nodes(cc.s0, cc.s1, cc.t0, cc.t1);
      for (int i = 0; i < 25; ++i) {
        const double dd = std::abs(cn.z[i] - p);
        v += cn.w[i] * (f(cn.z[i]) - g0 / dd);
      }
      return v;
    };

    if (n_inside >= 2) {
      // Distinct singular points in one cell: split until they separate.
      if (d < max_depth + 10) {
        split(d + 1);
        continue;
      }
      throw AccuracyError("adaptive_area_integrate: singular points failed to separate",
                          0.0, diam);
    }

    const bool near_sing =
        nearest != nullptr && (inside != nullptr || sdist1 <= 2.0 * diam) && sdist2 > 2.0 * diam;
    if (nearest != nullptr && sdist1 <= 2.0 * diam && sdist2 <= 2.0 * diam) {
      // Two singular points crowd the cell without both being inside it.
      if (d < max_depth + 10) {
        split(d + 1);
        continue;
      }
    }

    if (near_sing) {
      if (inside != nullptr && d < max_depth && diam >= 3e-5) {
        split(d + 1);
        continue;
      }
      const cplx p = nearest->p;
      const cplx g0 = nearest->cofactor(p);
      const cplx v1 = patched_sum(c, corners, p, g0);
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      const Cell ch[4] = {{c.s0, sm, c.t0, tm},
                          {c.s0, sm, tm, c.t1},
                          {sm, c.s1, c.t0, tm},
                          {sm, c.s1, tm, c.t1}};
      cplx v2 = 0.0;
      for (const Cell& cc : ch) v2 += patched_sum(cc, cell_corners(chart, cc), p, g0);
      if (inside == nullptr && d < max_depth && std::abs(v2 - v1) > tol) {
        split(d + 1);
        continue;
      }
      worst_defer = std::max(worst_defer, std::abs(v2 - v1));
      total += v2;
      ++ncells;
      continue;
    }

    if (d < max_depth && diam > std::max(std::min(ndist, sdist1), 1e-9) / 1.5) {
      split(d + 1);
      continue;
    }
    const cplx v1 = detail::plain_cell_sum(chart, c, f);
    {
      cplx v2 = 0.0;
      const double sm = 0.5 * (c.s0 + c.s1), tm = 0.5 * (c.t0 + c.t1);
      v2 += detail::plain_cell_sum(chart, Cell{c.s0, sm, c.t0, tm}, f);
      v2 += detail::plain_cell_sum(chart, Cell{c.s0, sm, tm, c.t1}, f);
      v2 += detail::plain_cell_sum(chart, Cell{sm, c.s1, c.t0, tm}, f);
      v2 += detail::plain_cell_sum(chart, Cell{sm, c.s1, tm, c.t1}, f);
      if (d < max_depth && std::abs(v2 - v1) > tol) {
        split(d + 1);
        continue;
      }
      if (d >= max_depth) worst_defer = std::max(worst_defer, std::abs(v2 - v1));
      total += v2;
    }
    ++ncells;
  }
  if (worst_defer > 10.0 * tol)
    throw AccuracyError("adaptive_area_integrate: tolerance not met at depth cap",
                        std::abs(total), worst_defer);
  return {total, worst_defer, ncells};
}

}  // namespace rkm
