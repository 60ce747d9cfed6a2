#include <doctest.h>

#include <cmath>
#include <string>

#include "mazt/config.hpp"
#include "mazt/errors.hpp"

using namespace mazt;

namespace {

Error error_of(const std::string& text, std::optional<ScenarioKind> kind) {
  try {
    parse_scenario_text(text, kind);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorCode::InvalidArgument, "");
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("minimal solve config") {
  const Scenario s = parse_scenario_text(
      "[grid]\nN = 64\n[forms]\nf_theta = \"1+2*cos(2*pi*x)\"\ng = 1\n[params]\nbeta = [64]\n",
      ScenarioKind::Solve);
  CHECK(s.kind == ScenarioKind::Solve);
  CHECK(s.n == 64);
  CHECK(s.f_theta == "1+2*cos(2*pi*x)");
  CHECK(s.betas == std::vector<double>{64});
  CHECK(s.tol.lcp_tol == 1e-10);
  const Recipe r = Recipe::compile(s.f_theta);
  CHECK(r(0.0, 0.3) == doctest::Approx(3.0));
  CHECK(r(0.5, 0.9) == doctest::Approx(-1.0));
}

TEST_CASE("hele-shaw needs a divisor") {
  const Error e = error_of("[grid]\nN = 32\n", ScenarioKind::HeleShaw);
  CHECK(e.code() == ErrorCode::ValidationError);
  CHECK(contains(e.what(), "divisor"));
}

TEST_CASE("beta must exceed 1") {
  const Error e = error_of("[params]\nbeta = [0.5]\n", ScenarioKind::Solve);
  CHECK(e.code() == ErrorCode::ValidationError);
  CHECK(contains(e.what(), "beta must exceed 1"));
}

TEST_CASE("unknown keys are named with their position") {
  const Error e = error_of("[grid]\nN = 32\n[tolerances]\n  lcp_tol = 1e-10\n  lcp_tl = 1\n",
                           ScenarioKind::Envelope);
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(contains(e.what(), "line 5, column 3"));
  CHECK(contains(e.what(), "lcp_tl"));
  CHECK(error_of("[nope]\n", ScenarioKind::Envelope).code() == ErrorCode::ParseError);
}

TEST_CASE("bad recipes report the column") {
  const Error e = error_of("[forms]\nf_theta = 1 + * x\n", ScenarioKind::Envelope);
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(contains(e.what(), "line 2, column 15"));
  try {
    Recipe::compile("cos(2*pi*x");
    FAIL("expected ParseError");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ParseError);
  }
}

TEST_CASE("recipe arithmetic") {
  const Recipe r = Recipe::compile("-2^2 + exp(0) * sin(pi/2) - e + y/4");
  CHECK(r(0.0, 2.0) == doctest::Approx(-4.0 + 1.0 - std::exp(1.0) + 0.5));
}

TEST_CASE("divisor points and kind agreement") {
  const Scenario s = parse_scenario_text(
      "[scenario]\nkind = hele-shaw\n[divisor]\npoints = (0.5, 0.5, 1), (0.1, 0.2, 2)\n", std::nullopt);
  CHECK(s.kind == ScenarioKind::HeleShaw);
  REQUIRE(s.divisor.has_value());
  REQUIRE(s.divisor->points.size() == 2);
  CHECK(s.divisor->points[1].multiplicity == 2);
  const Error e = error_of("[scenario]\nkind = envelope\n", ScenarioKind::Solve);
  CHECK(e.code() == ErrorCode::ValidationError);
  CHECK(contains(e.what(), "scenario.kind"));
}

TEST_CASE("kind defaults") {
  const Scenario sweep = parse_scenario_text("", ScenarioKind::SweepBeta);
  CHECK(sweep.betas.front() == 8);
  CHECK(sweep.betas.back() == 1024);
  const Scenario geo = parse_scenario_text("[divisor]\npoints = (0.5,0.5,1)\n", ScenarioKind::Geodesic);
  CHECK(geo.ts.size() >= 3);
}

TEST_CASE("range validation") {
  CHECK(error_of("[grid]\nN = 4\n", ScenarioKind::Solve).code() == ErrorCode::ValidationError);
  CHECK(error_of("[params]\nbeta = 64, 8\n", ScenarioKind::SweepBeta).code() == ErrorCode::ValidationError);
  CHECK(error_of("[tolerances]\nomega_relax = 2.5\n", ScenarioKind::Envelope).code() == ErrorCode::ValidationError);
  CHECK(error_of("[grid]\nN = abc\n", ScenarioKind::Envelope).code() == ErrorCode::ParseError);
}
