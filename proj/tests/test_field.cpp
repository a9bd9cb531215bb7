#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rkm/field.hpp"

using namespace rkm;

namespace {

DomainSpec generic_spec() {
  return DomainSpec::smooth_domain({{1, 1.0}, {-1, 0.12}, {2, 0.05}}, 0.0);
}

double boundary_distance(const DomainSpec& d, cplx z, int n = 16384) {
  double md = 1e300;
  for (int s = 0; s < n; ++s)
    md = std::min(md, std::abs(z - d.curve(2.0 * kPi * s / n)));
  return md;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

TEST_CASE("field grid masks the closed domain with clearance", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const double h = 0.1;
  const auto g = make_field_grid(d, {-2.0, -2.0}, {2.0, 2.0}, h);
  REQUIRE(g.nx == 41);
  REQUIRE(g.ny == 41);
  REQUIRE(g.unmasked_count() > 0);
  REQUIRE(g.unmasked_count() < g.nx * g.ny);
  int interior_masked = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const cplx z = g.point(i, j);
      if (!g.masked(i, j)) {
        REQUIRE(std::abs(z) - 1.0 >= h - 1e-9);
      } else if (std::abs(z) <= 1.0) {
        ++interior_masked;
      }
    }
  REQUIRE(interior_masked > 200);

  const auto gs = make_field_grid(generic_spec(), {-2.0, -2.0}, {2.0, 2.0}, 0.08);
  const auto ds = generic_spec();
  for (int j = 0; j < gs.ny; ++j)
    for (int i = 0; i < gs.nx; ++i)
      if (!gs.masked(i, j)) {
        REQUIRE_FALSE(ds.contains(gs.point(i, j)));
        REQUIRE(boundary_distance(ds, gs.point(i, j)) >= 0.08 - 1e-6);
      }

  REQUIRE_THROWS_AS(make_field_grid(d, {0.0, 0.0}, {1.0, 1.0}, 0.0), UsageError);
  REQUIRE_THROWS_AS(make_field_grid(d, {1.0, 0.0}, {0.0, 1.0}, 0.1), UsageError);
}

TEST_CASE("point source field on the disk matches the radial oracle", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const auto g = make_field_grid(d, {-2.0, -2.0}, {2.0, 2.0}, 0.1);
  const auto s = velocity_field(HElement::point_mass(0.0, kPi), d, g);
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (!g.masked(i, j))
        worst = std::max(worst,
                         std::abs(s.f[g.index(i, j)] - 1.0 / g.point(i, j)));
  REQUIRE(worst < 1e-13);
}

TEST_CASE("sources outside the domain are rejected", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  REQUIRE_THROWS_AS(exterior_transform(HElement::point_mass(1.5, 1.0), d),
                    RegionError);
  const auto fn = exterior_transform(HElement::point_mass(0.0, 1.0), d);
  REQUIRE_THROWS_AS(fn(0.5), RegionError);
}

TEST_CASE("null area density generates an invisible field", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const auto g = make_field_grid(d, {-2.0, -2.0}, {2.0, 2.0}, 0.1);
  const auto s =
      velocity_field(HElement::density({Monomial{1, 0, 1.0}}), d, g);
  double worst = 0.0;
  for (const cplx& v : s.f) worst = std::max(worst, std::abs(v));
  REQUIRE(worst < 1e-7);
}

TEST_CASE("generators in one equivalence class share the exterior field", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const InnerProductEngine eng(d);
  const auto null_el = HElement::density({Monomial{1, 0, 1.0}});
  const auto verdict = null_test(null_el, eng);
  REQUIRE(verdict.is_null);

  const auto g = make_field_grid(d, {-2.0, -2.0}, {2.0, 2.0}, 0.1);
  const auto mu = HElement::point_mass(0.3, 2.0);
  const auto base = velocity_field(mu, d, g);
  const auto shifted = velocity_field(superpose(mu, null_el), d, g);
  REQUIRE(max_field_difference(base, shifted) < 1e-7);
}

TEST_CASE("analytic fields pass the residual check at second order", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const auto fn = [](cplx z) { return 1.0 / z; };

  const auto g1 = make_field_grid(d, {1.5, 1.5}, {3.0, 3.0}, 0.05);
  REQUIRE(g1.unmasked_count() == g1.nx * g1.ny);
  const auto r1 = div_curl_check(sample_field(g1, fn));
  REQUIRE(r1.checked > 0);
  REQUIRE(r1.max_residual < 1e-3);

  const auto g2 = make_field_grid(d, {1.5, 1.5}, {3.0, 3.0}, 0.025);
  const auto r2 = div_curl_check(sample_field(g2, fn));
  REQUIRE(r1.max_residual / r2.max_residual >= 3.5);

  FieldSamples zero{g1, std::vector<cplx>(g1.mask.size(), cplx(0.0))};
  REQUIRE(div_curl_check(zero).max_residual == 0.0);
}

TEST_CASE("stencils touching the mask are skipped and counted", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const auto g = make_field_grid(d, {-2.0, -2.0}, {2.0, 2.0}, 0.1);
  const auto s = velocity_field(HElement::point_mass(0.0, kPi), d, g);
  const auto r = div_curl_check(s);
  REQUIRE(r.skipped > 0);
  REQUIRE(r.checked > 0);
  REQUIRE(r.checked + r.skipped == g.unmasked_count());
  REQUIRE(r.max_residual < 1e-2);
}

TEST_CASE("csv export round trips every sample exactly", "[field]") {
  const auto d = DomainSpec::disk_domain(0.0, 1.0);
  const auto g = make_field_grid(d, {-1.6, -1.2}, {1.7, 1.3}, 0.3);
  const auto mu = superpose(HElement::point_mass(0.0, kPi),
                            HElement::point_mass(0.2, cplx(0.0, kPi)));
  const auto s = velocity_field(mu, d, g);

  std::ostringstream os;
  write_field_csv(s, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  REQUIRE(line == "x,y,u,v,speed");
  int rows = 0;
  while (std::getline(is, line)) {
    const auto cols = split(line, ',');
    REQUIRE(cols.size() == 5);
    double vals[5];
    for (int c = 0; c < 5; ++c) {
      char* end = nullptr;
      vals[c] = std::strtod(cols[c].c_str(), &end);
      REQUIRE(end == cols[c].c_str() + cols[c].size());
    }
    const cplx z{vals[0], vals[1]};
    int i = static_cast<int>(std::lround((z.real() - g.origin.real()) / g.h));
    int j = static_cast<int>(std::lround((z.imag() - g.origin.imag()) / g.h));
    REQUIRE(z == g.point(i, j));
    const cplx f = s.f[g.index(i, j)];
    REQUIRE(vals[2] == f.real());
    REQUIRE(vals[3] == f.imag());
    REQUIRE(vals[4] == std::abs(f));
    ++rows;
  }
  REQUIRE(rows == g.unmasked_count());

  const std::string path = "/tmp/rkm_field_test.csv";
  write_field_csv(s, path);
  std::ifstream fin(path);
  std::stringstream buf;
  buf << fin.rdbuf();
  REQUIRE(buf.str() == os.str());
  std::remove(path.c_str());
}
