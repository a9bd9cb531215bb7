// Model operators on truncated expansions at infinity: the shift, its
// adjoint realized through the two-sided germ, boundary-integral forms of
// both, resolvents, the commutator, and finite matrix truncations.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"
#include "rkm/laurent.hpp"
#include "rkm/quadrature.hpp"

namespace rkm {

// Decaying boundary-conjugate part as a tail: a_k is the k-th exterior moment.
inline LaurentTail s_minus_tail(const DomainSpec& d, int N = LaurentTail::kDefaultOrder) {
  LaurentTail t;
  t.a = exterior_moments(d, N - 1);
  return t;
}

// Forward shift: (z f)(z) with the emerging constant removed.
inline LaurentTail op_Z(const LaurentTail& f) { return multiply_by_z_minus(f).first; }

// Adjoint shift through the germ: decaying part of S * f.
inline LaurentTail op_Z_star(const TwoSidedSeries& S, const LaurentTail& f, int n_out) {
  return convolve_schwarz_minus(S, f, n_out);
}

struct BoundaryOpResult {
  cplx value;
  bool near_boundary;  // within 1e-6 of the curve: accuracy is degraded
};

namespace detail {

// Shared boundary loop: value = -(1/(2 pi i)) oint w(zeta) f(zeta) dzeta / (zeta - z)
// for exterior z, with node doubling when z crowds the curve.
template <class W>
BoundaryOpResult boundary_shift_integral(const DomainSpec& d,
                                         const std::function<cplx(cplx)>& f, cplx z,
                                         int nodes, W&& weight) {
  if (d.contains(z))
    throw RegionError("boundary shift integral: evaluation point must lie outside");
  const auto [sz, tz] = d.chart().param_of(z);
  const double bdist = std::abs(z - d.curve(tz));
  int n = nodes;
  if (bdist < 0.02 * d.diam()) n = std::max(n, 8192);
  const auto q = boundary_quadrature(d, n);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j)
    acc += weight(q.nodes[j]) * f(q.nodes[j]) / (q.nodes[j] - z) * q.dz[j];
  return {-acc / (2.0 * kPi * kI), bdist < 1e-6};
}

}  // namespace detail

// Boundary realization of the forward shift at an exterior point.
inline BoundaryOpResult op_Z_boundary(const DomainSpec& d,
                                      const std::function<cplx(cplx)>& f, cplx z,
                                      int nodes = 2048) {
  return detail::boundary_shift_integral(d, f, z, nodes, [](cplx zeta) { return zeta; });
}

// Boundary realization of the adjoint shift at an exterior point.
inline BoundaryOpResult op_Z_star_boundary(const DomainSpec& d,
                                           const std::function<cplx(cplx)>& f, cplx z,
                                           int nodes = 2048) {
  return detail::boundary_shift_integral(d, f, z, nodes,
                                         [](cplx zeta) { return std::conj(zeta); });
}

// Tail solving (Z - a) g = f coefficientwise: g_k = -sum_j f_{k+j} a^{-(j+1)}.
// The representation lives in the exterior, so the parameter must as well.
inline LaurentTail resolvent_Z_tail(const DomainSpec& d, const LaurentTail& f, cplx a) {
  if (d.contains(a))
    throw PreconditionError(
        "resolvent_Z_tail: parameter inside the domain; use the boundary-integral form");
  if (std::abs(a) < 1e-300)
    throw PreconditionError("resolvent_Z_tail: parameter must be nonzero");
  const int L = f.order();
  const cplx ai = 1.0 / a;
  LaurentTail g;
  g.a.assign(static_cast<std::size_t>(L), 0.0);
  for (int k = 0; k < L; ++k) {
    cplx acc = 0.0;  // Horner over j from the top: acc = sum_j f_{k+j} a^{-j}
    for (int j = L - 1 - k; j >= 0; --j)
      acc = acc * ai + f.a[static_cast<std::size_t>(k + j)];
    g.a[static_cast<std::size_t>(k)] = -acc * ai;
  }
  return g;
}

// d/dz of the finite truncation, as a value.
inline cplx tail_derivative_value(const LaurentTail& f, cplx z) {
  if (std::abs(z) < 1e-300)
    throw SingularityError("tail_derivative_value: pole of the truncation at the origin");
  const cplx zi = 1.0 / z;
  cplx acc = 0.0;  // Horner: acc = sum_k (k+1) a_k z^{-(k+1)}
  for (int k = f.order() - 1; k >= 0; --k)
    acc = (acc + static_cast<double>(k + 1) * f.a[static_cast<std::size_t>(k)]) * zi;
  return -acc * zi;
}

// Difference-quotient resolvent value (f(z) - f(a)) / (z - a); the confluent
// point z = a is the series derivative, never a small-offset division.
inline cplx resolvent_Z(const DomainSpec& d, const LaurentTail& f, cplx a, cplx z) {
  if (d.contains(a))
    throw PreconditionError(
        "resolvent_Z: parameter inside the domain; use the boundary-integral form");
  if (std::abs(z - a) <= 1e-12 * std::max(1.0, std::abs(a)))
    return tail_derivative_value(f, a);
  const cplx fz = evaluate(f, z, d.R_bound()).value;
  const cplx fa = evaluate(f, a, d.R_bound()).value;
  return (fz - fa) / (z - a);
}

// Boundary-integral resolvent, defined for any parameter a off the curve.
inline BoundaryOpResult resolvent_Z_boundary(const DomainSpec& d,
                                             const std::function<cplx(cplx)>& f, cplx a,
                                             cplx z, int nodes = 2048) {
  return detail::boundary_shift_integral(d, f, z, nodes,
                                         [a](cplx zeta) { return 1.0 / (zeta - a); });
}

// Adjoint resolvent by boundary quadrature; both arguments exterior.
inline BoundaryOpResult resolvent_Z_star(const DomainSpec& d,
                                         const std::function<cplx(cplx)>& f, cplx a,
                                         cplx z, int nodes = 2048) {
  if (d.contains(a))
    throw RegionError("resolvent_Z_star: parameter must lie outside the domain");
  const cplx ab = std::conj(a);
  return detail::boundary_shift_integral(
      d, f, z, nodes, [ab](cplx zeta) { return 1.0 / (std::conj(zeta) - ab); });
}

// Z*_O Z_O f - Z_O Z*_O f. Compositions run through the series with the
// intermediate order widened by one, so the result is exact at every kept
// index rather than a finite-section product.
inline LaurentTail commutator_apply(const TwoSidedSeries& S, const LaurentTail& f) {
  const int L = f.order();
  const LaurentTail g1 = convolve_schwarz_minus(S, op_Z(f), L);
  const LaurentTail g2 = op_Z(convolve_schwarz_minus(S, f, L + 1));
  LaurentTail out;
  out.a.assign(static_cast<std::size_t>(L), 0.0);
  for (int k = 0; k < L; ++k)
    out.a[static_cast<std::size_t>(k)] = g1.coeff(k) - g2.coeff(k);
  return out;
}

enum class ModelOp { Z, Z_star, commutator };

struct OperatorMatrix {
  int N = 0;
  std::vector<cplx> entries;  // row-major, acting on (a_0 .. a_{N-1})

  cplx at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(N) +
                   static_cast<std::size_t>(j)];
  }
  std::vector<cplx> apply(const std::vector<cplx>& v) const {
    if (static_cast<int>(v.size()) != N)
      throw UsageError("OperatorMatrix::apply: vector length mismatch");
    std::vector<cplx> out(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < N; ++j) acc += at(i, j) * v[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
  }
};

// N x N truncation in the basis {z^{-(k+1)}}. Columns are images of basis
// tails carried at order N+1 through the series compositions, then cut, so
// the commutator column is exact rather than a product of finite sections.
inline OperatorMatrix matrix_truncation(ModelOp op, const DomainSpec& d, int N,
                                        int nodes = 2048) {
  if (N <= 0) throw UsageError("matrix_truncation: order must be positive");
  OperatorMatrix M;
  M.N = N;
  M.entries.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(N), 0.0);
  TwoSidedSeries S;
  if (op != ModelOp::Z) {
    const int kint = d.kind == DomainKind::smooth ? std::max(48, N + 2) : 2;
    S = schwarz_series(d, kint, N + 2, nodes);
  }
  for (int j = 0; j < N; ++j) {
    LaurentTail e;
    e.a.assign(static_cast<std::size_t>(N + 1), 0.0);
    e.a[static_cast<std::size_t>(j)] = 1.0;
    LaurentTail col;
    switch (op) {
      case ModelOp::Z:
        col = op_Z(e);
        break;
      case ModelOp::Z_star:
        col = op_Z_star(S, e, N);
        break;
      case ModelOp::commutator:
        col = commutator_apply(S, e);
        break;
    }
    for (int i = 0; i < N; ++i)
      M.entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(N) +
                static_cast<std::size_t>(j)] = col.coeff(i);
  }
  return M;
}

}  // namespace rkm
