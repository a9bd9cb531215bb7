#pragma once
// Verification records and report writers. A record captures one identity
// check: what was computed, what was expected, the error, the tolerance and
// the verdict. Reports serialize to a JSON document and an aligned table;
// both are deterministic for a fixed config and seed once runtimes are
// excluded.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rkm/common.hpp"

namespace rkm {

struct CheckRecord {
  std::string name;    // identity name, kebab-case
  std::string anchor;  // stable catalog anchor for the identity
  std::string domain;
  cplx computed = 0.0;
  cplx expected = 0.0;
  double abs_err = 0.0;
  double tol = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
  std::string note;
};

struct VerificationReport {
  std::string suite;
  std::string domain;
  double sigma = 0.0;   // calibrated sign
  std::string backend;  // kernel backend used by the run
  std::uint64_t seed = 0;
  std::vector<CheckRecord> records;

  bool all_pass() const {
    return std::all_of(records.begin(), records.end(),
                       [](const CheckRecord& r) { return r.pass; });
  }
  int failures() const {
    int n = 0;
    for (const auto& r : records) n += !r.pass;
    return n;
  }
};

namespace detail {

inline std::string fmt_double(double x, int prec = 12) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

inline std::string fmt_cplx(cplx v) {
  std::ostringstream os;
  os << std::setprecision(12) << v.real();
  if (v.imag() != 0.0)
    os << (v.imag() < 0 ? " - " : " + ") << std::setprecision(12)
       << std::abs(v.imag()) << "i";
  return os.str();
}

}  // namespace detail

// include_runtimes = false produces the byte-stable form used for
// determinism comparisons.
inline nlohmann::json report_to_json(const VerificationReport& rep,
                                     bool include_runtimes = true) {
  nlohmann::json j;
  j["suite"] = rep.suite;
  j["domain"] = rep.domain;
  j["sign"] = rep.sigma;
  j["backend"] = rep.backend;
  j["seed"] = rep.seed;
  j["all_pass"] = rep.all_pass();
  j["failures"] = rep.failures();
  j["records"] = nlohmann::json::array();
  for (const auto& r : rep.records) {
    nlohmann::json e;
    e["name"] = r.name;
    e["anchor"] = r.anchor;
    e["domain"] = r.domain;
    e["computed"] = {r.computed.real(), r.computed.imag()};
    e["expected"] = {r.expected.real(), r.expected.imag()};
    e["abs_err"] = r.abs_err;
    e["tol"] = r.tol;
    e["pass"] = r.pass;
    if (include_runtimes) e["runtime_ms"] = r.runtime_ms;
    if (!r.note.empty()) e["note"] = r.note;
    j["records"].push_back(std::move(e));
  }
  return j;
}

inline void write_report_json(const VerificationReport& rep, std::ostream& os,
                              bool include_runtimes = true) {
  os << report_to_json(rep, include_runtimes).dump(2) << '\n';
}

inline void write_report_text(const VerificationReport& rep, std::ostream& os,
                              bool include_runtimes = true) {
  os << "suite: " << rep.suite << "   domain: " << rep.domain
     << "   sign: " << detail::fmt_double(rep.sigma, 6)
     << "   backend: " << rep.backend << "   seed: " << rep.seed << '\n';
  std::size_t wname = 4;
  for (const auto& r : rep.records) wname = std::max(wname, r.name.size());
  os << std::left << std::setw(static_cast<int>(wname) + 2) << "name"
     << std::setw(13) << "abs_err" << std::setw(13) << "tol" << std::setw(6)
     << "pass";
  if (include_runtimes) os << std::setw(10) << "ms";
  os << "anchor\n";
  for (const auto& r : rep.records) {
    std::ostringstream ae, tl, ms;
    ae << std::setprecision(3) << std::scientific << r.abs_err;
    tl << std::setprecision(1) << std::scientific << r.tol;
    ms << std::setprecision(1) << std::fixed << r.runtime_ms;
    os << std::left << std::setw(static_cast<int>(wname) + 2) << r.name
       << std::setw(13) << ae.str() << std::setw(13) << tl.str() << std::setw(6)
       << (r.pass ? "ok" : "FAIL");
    if (include_runtimes) os << std::setw(10) << ms.str();
    os << r.anchor;
    if (!r.note.empty()) os << "  (" << r.note << ")";
    os << '\n';
  }
  os << (rep.all_pass() ? "all checks passed"
                        : std::to_string(rep.failures()) + " check(s) failed")
     << '\n';
}

inline void write_report_files(const VerificationReport& rep,
                               const std::string& dir) {
  {
    std::ofstream os(dir + "/report.json");
    if (!os) throw UsageError("report: cannot open " + dir + "/report.json");
    write_report_json(rep, os);
  }
  {
    std::ofstream os(dir + "/report.txt");
    if (!os) throw UsageError("report: cannot open " + dir + "/report.txt");
    write_report_text(rep, os);
  }
}

}  // namespace rkm
