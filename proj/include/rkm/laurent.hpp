// Truncated expansions at infinity: f(z) = sum_{k>=0} a_k z^{-(k+1)}.
// These carry the coefficient algebra used by the model operators.
#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "rkm/common.hpp"
#include "rkm/domain.hpp"

namespace rkm {

struct LaurentTail {
  std::vector<cplx> a;  // coefficient of z^{-(k+1)}

  static constexpr int kDefaultOrder = 64;

  int order() const { return static_cast<int>(a.size()); }
  cplx coeff(int k) const {
    if (k < 0) throw UsageError("LaurentTail: negative coefficient index");
    return k < order() ? a[static_cast<std::size_t>(k)] : cplx(0.0);
  }
};

inline cplx residue_at_infinity(const LaurentTail& f) {
  return f.a.empty() ? cplx(0.0) : -f.a[0];
}

// z * f with the emerging constant term removed; the dropped coefficient is
// returned alongside (it equals -residue_at_infinity(f)).
inline std::pair<LaurentTail, cplx> multiply_by_z_minus(const LaurentTail& f) {
  LaurentTail g;
  if (f.a.empty()) return {g, 0.0};
  g.a.assign(f.a.begin() + 1, f.a.end());
  return {g, f.a[0]};
}

// Coefficients of the decaying part of S * f, where S is the two-sided germ:
// b_k = sum_{l>=0} M_{k-1-l} a_l. Indices below the stored interior range are
// zero only when the interior side is complete.
inline LaurentTail convolve_schwarz_minus(const TwoSidedSeries& S, const LaurentTail& f,
                                          int n_out) {
  if (n_out < 0) throw UsageError("convolve_schwarz_minus: negative output order");
  if (n_out > S.K_ext + 1)
    throw TruncationError(
        "convolve_schwarz_minus: output order exceeds the stored exterior range");
  if (!S.interior_complete && f.order() > S.K_int)
    throw TruncationError(
        "convolve_schwarz_minus: incomplete interior side is too short for this tail");
  LaurentTail g;
  g.a.assign(static_cast<std::size_t>(n_out), 0.0);
  for (int k = 0; k < n_out; ++k) {
    cplx acc = 0.0;
    for (int l = 0; l < f.order(); ++l) {
      const int m = k - 1 - l;
      if (!S.interior_complete && m < -S.K_int) break;
      if (m > S.K_ext) continue;
      acc += S.M(m) * f.a[static_cast<std::size_t>(l)];
    }
    g.a[static_cast<std::size_t>(k)] = acc;
  }
  return g;
}

struct TailEvaluation {
  cplx value;
  double tail_bound;  // geometric bound on the discarded terms
};

// Horner evaluation in 1/z, restricted to the exterior |z| > R_domain where
// a tail can represent anything.
inline TailEvaluation evaluate(const LaurentTail& f, cplx z, double R_domain) {
  if (!(std::abs(z) > R_domain))
    throw RegionError("evaluate: point must lie outside the exterior radius");
  const cplx zi = 1.0 / z;
  cplx acc = 0.0;
  for (int k = f.order() - 1; k >= 0; --k) acc = (acc + f.a[static_cast<std::size_t>(k)]) * zi;
  double amax = 0.0;
  for (const cplx& c : f.a) amax = std::max(amax, std::abs(c));
  const double q = R_domain / std::abs(z);
  const double bound = amax * std::pow(q, f.order()) / (std::abs(z) - R_domain);
  return {acc, bound};
}

// Value of the finite truncation itself, defined for every z != 0. No region
// guard and no tail bound: this treats f as a Laurent polynomial, which is
// what boundary-integral realizations need on the curve itself.
inline cplx evaluate_finite(const LaurentTail& f, cplx z) {
  if (std::abs(z) < 1e-300)
    throw SingularityError("evaluate_finite: pole of the truncation at the origin");
  const cplx zi = 1.0 / z;
  cplx acc = 0.0;
  for (int k = f.order() - 1; k >= 0; --k) acc = (acc + f.a[static_cast<std::size_t>(k)]) * zi;
  return acc;
}

struct TailFit {
  LaurentTail tail;
  double residual;  // max reconstruction deviation on the sample circle
};

// Recovers a_k = (R^{k+1}/n) * sum_j f(z_j) e^{i(k+1)theta_j} from uniform
// samples on |z| = R. Requires at least 2N samples; a reconstruction residual
// above tol means the data is not of tail form at this order.
inline TailFit tail_from_samples(const std::function<cplx(cplx)>& f, double R_sample,
                                 int N, int count, double tol = 1e-8) {
  if (N <= 0) throw UsageError("tail_from_samples: order must be positive");
  if (count < 2 * N)
    throw PreconditionError("tail_from_samples: need at least 2N samples");
  std::vector<cplx> vals(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j)
    vals[static_cast<std::size_t>(j)] = f(std::polar(R_sample, 2.0 * kPi * j / count));
  TailFit out;
  out.tail.a.assign(static_cast<std::size_t>(N), 0.0);
  for (int k = 0; k < N; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < count; ++j)
      acc += vals[static_cast<std::size_t>(j)] *
             std::polar(1.0, (k + 1) * 2.0 * kPi * j / count);
    out.tail.a[static_cast<std::size_t>(k)] =
        acc * std::pow(R_sample, k + 1) / static_cast<double>(count);
  }
  double worst = 0.0;
  for (int j = 0; j < count; ++j) {
    const cplx z = std::polar(R_sample, 2.0 * kPi * j / count);
    const cplx zi = 1.0 / z;
    cplx acc = 0.0;
    for (int k = N - 1; k >= 0; --k) acc = (acc + out.tail.a[static_cast<std::size_t>(k)]) * zi;
    worst = std::max(worst, std::abs(acc - vals[static_cast<std::size_t>(j)]));
  }
  out.residual = worst;
  if (worst > tol)
    throw ConditioningError("tail_from_samples: reconstruction residual " +
                            format_double(worst) + " exceeds tolerance " + format_double(tol));
  return out;
}

}  // namespace rkm
