#pragma once
// Exterior velocity fields generated by sources, sinks and vortices inside
// the domain. A field sample is f = u + i v with f the transform of the
// generator; f is analytic outside the closed domain, which the residual
// check 2 df/dzbar = div - i curl certifies on the grid.

#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"
#include "rkm/hilbert.hpp"
#include "rkm/kernels.hpp"
#include "rkm/laurent.hpp"

namespace rkm {

// Rectangular lattice of spacing h. Sites inside the closed domain, or whose
// clearance from it cannot be certified to be at least h, are masked.
struct FieldGrid {
  cplx origin;  // lower-left corner
  double h = 0.0;
  int nx = 0, ny = 0;
  std::vector<char> mask;  // 1 = excluded

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  cplx point(int i, int j) const { return origin + cplx(i * h, j * h); }
  bool masked(int i, int j) const { return mask[index(i, j)] != 0; }
  int unmasked_count() const {
    int c = 0;
    for (char m : mask) c += (m == 0);
    return c;
  }
};

// Builds the lattice covering [lo, hi] and masks every site that is inside
// the closed domain or within h of it. The boundary is sampled densely and
// the sample gap is charged against the measured clearance, so an unmasked
// site is guaranteed exterior with distance >= h.
inline FieldGrid make_field_grid(const DomainSpec& d, cplx lo, cplx hi, double h) {
  if (!(h > 0.0)) throw UsageError("field grid: spacing must be positive");
  if (!(hi.real() > lo.real()) || !(hi.imag() > lo.imag()))
    throw UsageError("field grid: box must have positive extent");
  FieldGrid g;
  g.origin = lo;
  g.h = h;
  g.nx = static_cast<int>(std::floor((hi.real() - lo.real()) / h + 1e-12)) + 1;
  g.ny = static_cast<int>(std::floor((hi.imag() - lo.imag()) / h + 1e-12)) + 1;
  g.mask.assign(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny), 0);

  const int nb = 4096;
  std::vector<cplx> bd(nb);
  for (int s = 0; s < nb; ++s) bd[s] = d.curve(2.0 * kPi * s / nb);
  double gap = 0.0;
  for (int s = 0; s < nb; ++s) gap = std::max(gap, std::abs(bd[(s + 1) % nb] - bd[s]));

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const cplx z = g.point(i, j);
      bool out = !d.contains(z);
      if (out) {
        double md = std::abs(z - bd[0]);
        for (int s = 1; s < nb; ++s) md = std::min(md, std::abs(z - bd[s]));
        out = md - gap >= h;
      }
      if (!out) g.mask[g.index(i, j)] = 1;
    }
  return g;
}

// f = C[mu](z) = (1/pi) * integral dmu(u) / (z - u), the same normalization
// as the model lift; valid outside the closed domain. Density parts reduce
// to a boundary integral once.
inline std::function<cplx(cplx)> exterior_transform(const HElement& el,
                                                    const DomainSpec& d) {
  for (const auto& pm : el.points)
    if (!d.contains(pm.location))
      throw RegionError("exterior transform: sources must lie inside the domain");
  std::shared_ptr<std::vector<std::pair<cplx, cplx>>> pre;  // (node, Q * dz)
  if (!el.poly.empty()) {
    const auto q = boundary_quadrature(d, 4096);
    pre = std::make_shared<std::vector<std::pair<cplx, cplx>>>();
    pre->reserve(q.nodes.size());
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      pre->emplace_back(q.nodes[j],
                        poly_antiderivative(el.poly, q.nodes[j],
                                            std::conj(q.nodes[j])) *
                            q.dz[j]);
  }
  return [d, pts = el.points, tail = el.tail, pre](cplx z) {
    if (d.contains(z))
      throw RegionError("exterior transform: sample point inside the domain");
    cplx acc = 0.0;
    for (const auto& pm : pts) acc += (pm.weight / kPi) / (z - pm.location);
    if (pre) {
      cplx b = 0.0;
      for (const auto& [node, qdz] : *pre) b += qdz / (node - z);
      acc += -b / (2.0 * kPi * kI);
    }
    if (tail && !tail->a.empty()) acc += evaluate_finite(*tail, z);
    return acc;
  };
}

struct FieldSamples {
  FieldGrid grid;
  std::vector<cplx> f;  // per lattice site; masked sites hold 0
};

// Evaluates fn on every unmasked site. Sites are independent, so the work is
// split across hardware threads; fn must be safe to call concurrently.
inline FieldSamples sample_field(const FieldGrid& grid,
                                 const std::function<cplx(cplx)>& fn) {
  FieldSamples out{grid, std::vector<cplx>(grid.mask.size(), cplx(0.0))};
  std::vector<std::pair<int, int>> sites;
  sites.reserve(grid.mask.size());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (!grid.masked(i, j)) sites.emplace_back(i, j);

  const auto run = [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s)
      out.f[grid.index(sites[s].first, sites[s].second)] =
          fn(grid.point(sites[s].first, sites[s].second));
  };
  const std::size_t nthreads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                            std::max<std::size_t>(1, sites.size() / 64));
  if (nthreads <= 1) {
    run(0, sites.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (sites.size() + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t)
      pool.emplace_back(run, t * chunk, std::min(sites.size(), (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  return out;
}

inline FieldSamples velocity_field(const HElement& mu, const DomainSpec& d,
                                   const FieldGrid& grid) {
  return sample_field(grid, exterior_transform(mu, d));
}

// Union of two generators; the exterior field superposes accordingly.
inline HElement superpose(HElement a, const HElement& b) {
  a.points.insert(a.points.end(), b.points.begin(), b.points.end());
  a.poly.insert(a.poly.end(), b.poly.begin(), b.poly.end());
  if (b.tail && !b.tail->a.empty()) {
    if (!a.tail) a.tail = LaurentTail{};
    if (a.tail->a.size() < b.tail->a.size()) a.tail->a.resize(b.tail->a.size(), 0.0);
    for (std::size_t k = 0; k < b.tail->a.size(); ++k) a.tail->a[k] += b.tail->a[k];
  }
  return a;
}

inline double max_field_difference(const FieldSamples& a, const FieldSamples& b) {
  if (a.grid.nx != b.grid.nx || a.grid.ny != b.grid.ny ||
      a.grid.h != b.grid.h || a.grid.origin != b.grid.origin)
    throw UsageError("field difference: grids do not match");
  double m = 0.0;
  for (int j = 0; j < a.grid.ny; ++j)
    for (int i = 0; i < a.grid.nx; ++i) {
      if (a.grid.masked(i, j) || b.grid.masked(i, j)) continue;
      m = std::max(m, std::abs(a.f[a.grid.index(i, j)] - b.f[b.grid.index(i, j)]));
    }
  return m;
}

struct DivCurlReport {
  double max_residual = 0.0;
  int checked = 0;
  int skipped = 0;  // stencil left the grid or touched a masked site
};

// Central-difference 2 df/dzbar = (d/dx + i d/dy) f on every unmasked site
// with a full 4-neighbor stencil. With f = u + i v the vector field is
// u d/dx - v d/dy (the 1-form u dx - v dy), and the residual is the complex
// combination div - i curl; it vanishes to second order in h when f is
// analytic, i.e. when the flow is incompressible and free of vorticity.
inline DivCurlReport div_curl_check(const FieldSamples& s) {
  const FieldGrid& g = s.grid;
  DivCurlReport out;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.masked(i, j)) continue;
      const bool full = i > 0 && i + 1 < g.nx && j > 0 && j + 1 < g.ny &&
                        !g.masked(i - 1, j) && !g.masked(i + 1, j) &&
                        !g.masked(i, j - 1) && !g.masked(i, j + 1);
      if (!full) {
        ++out.skipped;
        continue;
      }
      const cplx fx = (s.f[g.index(i + 1, j)] - s.f[g.index(i - 1, j)]) / (2.0 * g.h);
      const cplx fy = (s.f[g.index(i, j + 1)] - s.f[g.index(i, j - 1)]) / (2.0 * g.h);
      out.max_residual = std::max(out.max_residual, std::abs(fx + kI * fy));
      ++out.checked;
    }
  return out;
}

// Shortest decimal digits that round-trip the IEEE double exactly.
inline std::string roundtrip_decimal(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

inline void write_field_csv(const FieldSamples& s, std::ostream& os) {
  const FieldGrid& g = s.grid;
  os << "x,y,u,v,speed\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.masked(i, j)) continue;
      const cplx z = g.point(i, j);
      const cplx f = s.f[g.index(i, j)];
      os << roundtrip_decimal(z.real()) << ',' << roundtrip_decimal(z.imag())
         << ',' << roundtrip_decimal(f.real()) << ','
         << roundtrip_decimal(f.imag()) << ',' << roundtrip_decimal(std::abs(f))
         << '\n';
    }
}

inline void write_field_csv(const FieldSamples& s, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw UsageError("field csv: cannot open " + path);
  write_field_csv(s, os);
  os.flush();
  if (!os) throw UsageError("field csv: write failed for " + path);
}

}  // namespace rkm
