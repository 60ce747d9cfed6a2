#include <doctest.h>

#include <cmath>

#include "mazt/errors.hpp"
#include "mazt/hele_shaw.hpp"

using namespace mazt;

namespace {

struct Disc {
  TorusGrid grid;
  BackgroundForm omega;
  DivisorData z;
};

Disc disc(int n, double v = 1.0) {
  const TorusGrid grid(n);
  return {grid, make_background(ScalarField(grid, v), true),
          make_divisor(grid, {{n / 2, n / 2, 1}})};
}

}  // namespace

TEST_CASE("empty domain at lambda = 0, area law at lambda = 0.1") {
  const Disc d = disc(64);
  const HeleShawFamily fam = run_family(d.omega, d.z, {0.0, 0.1});
  CHECK(fam.members[0].domain_nodes == 0);
  CHECK(fam.members[0].area == 0.0);
  CHECK_FALSE(fam.members[0].boundary.has_value());
  CHECK(fam.members[1].area == doctest::Approx(0.1).epsilon(0.1));
  CHECK(fam.members[1].contains_divisor);
  REQUIRE(fam.members[1].boundary.has_value());
  CHECK(fam.members[1].boundary->lines.size() == 1);
  CHECK(fam.members[1].boundary->lines[0].circularity() > 0.95);
}

TEST_CASE("area law, nesting and exhaustion on the unit torus") {
  const Disc d = disc(128);
  std::vector<double> lambdas;
  for (int k = 1; k <= 9; ++k) lambdas.push_back(0.1 * k);
  const HeleShawFamily fam = run_family(d.omega, d.z, lambdas);
  const AreaLawReport al = area_law(fam, 0.02);
  CHECK(al.pass);
  CHECK(al.max_abs_error <= 0.02);
  CHECK(check_nesting(fam).pass);
  CHECK(fam.members.back().area >= 0.88);
  for (const HeleShawMember& m : fam.members) CHECK(m.mass_identity_error <= 1e-8);
  const ExhaustionVerdict ex = exhaustion_check(fam);
  CHECK(ex.monotone);
  CHECK(ex.pass);
}

TEST_CASE("exhaustion needs V = m") {
  const Disc d = disc(32, 2.0);
  const HeleShawFamily fam = run_family(d.omega, d.z, {0.2, 0.4});
  try {
    exhaustion_check(fam);
    FAIL("expected WrongRegime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WrongRegime);
  }
}

TEST_CASE("warm start and independent solves agree") {
  const Disc d = disc(48);
  HeleShawOptions cold;
  cold.warm_start = false;
  cold.threads = 4;
  const HeleShawFamily a = run_family(d.omega, d.z, {0.1, 0.3, 0.5});
  const HeleShawFamily b = run_family(d.omega, d.z, {0.1, 0.3, 0.5}, cold);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.members[k].domain == b.members[k].domain);
    CHECK((a.members[k].solution.u - b.members[k].solution.u).sup_norm() <= 1e-9);
  }
}

TEST_CASE("lambda outside [0, V/m) is rejected") {
  const Disc d = disc(16);
  try {
    run_family(d.omega, d.z, {0.5, 1.0});
    FAIL("expected SeshadriViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeshadriViolation);
    CHECK(std::string(e.what()).find("lambda=1") != std::string::npos);
  }
}

TEST_CASE("nesting detects a shrinking domain") {
  const Disc d = disc(32);
  HeleShawFamily fam = run_family(d.omega, d.z, {0.2, 0.4});
  std::swap(fam.members[0].domain, fam.members[1].domain);
  CHECK_FALSE(check_nesting(fam).pass);
}
