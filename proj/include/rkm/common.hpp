// Shared scalar types, error taxonomy, deterministic RNG, and formatting helpers.
#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkm {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cplx kI{0.0, 1.0};

inline double sqr(double x) { return x * x; }
inline double abs2(cplx z) { return std::norm(z); }

// ---------------------------------------------------------------------------
// Error taxonomy. Every failure mode surfaces as a typed exception so the CLI
// can map it to its exit-code contract (usage -> 2, everything else -> 3).
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument lies in the wrong region for the requested kernel/operation.
struct RegionError : Error {
  using Error::Error;
};

// Geometric precondition violated (non-star-shaped shrink, anchor outside, ...).
struct GeometryError : Error {
  using Error::Error;
};

// Tolerance not reached at the refinement cap; carries the best estimate.
struct AccuracyError : Error {
  double estimate;
  double bound;
  AccuracyError(const std::string& msg, double est, double bnd)
      : Error(msg), estimate(est), bound(bnd) {}
};

// Requested coefficients beyond the reliable truncation range.
struct TruncationError : Error {
  using Error::Error;
};

// Evaluation at a non-integrable singular point.
struct SingularityError : Error {
  using Error::Error;
};

// Generic precondition violation (wrong representation, missing data, ...).
struct PreconditionError : Error {
  using Error::Error;
};

// Extrapolation sequence failed to converge.
struct ConvergenceError : Error {
  using Error::Error;
};

// Ill-conditioned recovery (sample aliasing and similar).
struct ConditioningError : Error {
  using Error::Error;
};

// Two independent indicators that must agree disagreed beyond the allowed band.
struct ConsistencyError : Error {
  using Error::Error;
};

// Bad user input (CLI/config); maps to exit code 2.
struct UsageError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. Draws are mapped from raw engine output so that the same
// seed yields the same points on every standard library implementation.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

  std::uint64_t next_u64() {
    // splitmix64; stable across platforms.
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on the annulus r_lo <= |z| <= r_hi (area measure).
  cplx annulus(double r_lo, double r_hi) {
    double u = uniform();
    double r = std::sqrt(r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo));
    double t = uniform(0.0, 2.0 * kPi);
    return std::polar(r, t);
  }

  cplx on_circle(double r) { return std::polar(r, uniform(0.0, 2.0 * kPi)); }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Round-trip decimal formatting: shortest representation that parses back to
// the identical IEEE-754 value.
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string format_complex(cplx z) {
  std::string s = format_double(z.real());
  if (z.imag() >= 0 || std::isnan(z.imag()))
    s += "+";
  s += format_double(z.imag()) + "i";
  return s;
}

// Accepts "1.5", "2i", "1e6i", "0.3-0.25j", "-1+2i". Throws UsageError on junk.
inline cplx parse_complex(const std::string& text) {
  if (text.empty()) throw UsageError("empty complex literal");
  std::string s = text;
  for (char& c : s)
    if (c == 'j' || c == 'I' || c == 'J') c = 'i';
  // Split into one or two signed terms.
  std::vector<std::string> terms;
  std::size_t start = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      terms.push_back(s.substr(start, i - start));
      start = i;
    }
  }
  terms.push_back(s.substr(start));
  if (terms.size() > 2) throw UsageError("malformed complex literal: " + text);
  double re = 0.0, im = 0.0;
  for (std::string term : terms) {
    bool imag = !term.empty() && term.back() == 'i';
    if (imag) term.pop_back();
    if (term.empty() || term == "+" || term == "-") term += "1";
    double v = 0.0;
    auto res = std::from_chars(term.data(), term.data() + term.size(), v);
    if (res.ec != std::errc{} || res.ptr != term.data() + term.size())
      throw UsageError("malformed complex literal: " + text);
    (imag ? im : re) += v;
  }
  return {re, im};
}

}  // namespace rkm
