#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mazt/errors.hpp"
#include "mazt/forms.hpp"

using namespace mazt;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("background volumes") {
  const TorusGrid grid(64);
  CHECK(make_background(grid, [](double, double) { return 1.0; }, true).volume ==
        doctest::Approx(1.0));
  const BackgroundForm c = make_background(
      grid, [](double x, double) { return 1 + 2 * std::cos(2 * kPi * x); }, true);
  CHECK(c.volume == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.density.min() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(c.is_kahler());
  CHECK(code_of([&] {
          make_background(grid, [](double, double) { return -1.0; }, true);
        }) == ErrorCode::NonKahler);
}

TEST_CASE("volume density is normalised and positive") {
  const TorusGrid grid(16);
  const VolumeDensity g = make_volume(ScalarField(grid, 3.0));
  CHECK(integrate(g.density) == doctest::Approx(1.0));
  CHECK(code_of([&] { make_volume(ScalarField(grid, 0.0)); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("single-point divisor gives the Green function") {
  const TorusGrid grid(64);
  const DivisorData z = make_divisor(grid, {{20, 30, 1}});
  CHECK(z.total_multiplicity == 1);
  CHECK(z.log_norm.max() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::isfinite(z.log_norm.min()));
  CHECK(z.log_norm.at(20, 30) == z.log_norm.min());
  // κΔh_s = δ_Z - f_L.
  const ScalarField lhs = kKappa * laplacian(z.log_norm);
  const ScalarField rhs = dirac_density(z) - z.curvature;
  CHECK((lhs - rhs).sup_norm() <= 1e-8 * rhs.sup_norm());
}

TEST_CASE("antipodal divisor is half-period symmetric") {
  const TorusGrid grid(32);
  const DivisorData z = make_divisor(grid, {{0, 0, 1}, {16, 16, 1}});
  CHECK(z.total_multiplicity == 2);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      CHECK(z.log_norm.at(i, j) == doctest::Approx(z.log_norm.at(i + 16, j + 16)).epsilon(1e-12));
}

TEST_CASE("curvature of the wrong mass is rejected") {
  const TorusGrid grid(16);
  CHECK(code_of([&] { make_divisor(grid, {{0, 0, 1}}, ScalarField(grid, 2.0)); }) ==
        ErrorCode::BadMass);
}

TEST_CASE("twisting lowers the volume linearly") {
  const TorusGrid grid(32);
  const BackgroundForm omega = make_background(ScalarField(grid, 1.0), true);
  const DivisorData z = make_divisor(grid, {{5, 5, 1}});
  const BackgroundForm same = twist(omega, z, 0.0, true);
  CHECK((same.density - omega.density).sup_norm() == 0.0);
  CHECK(twist(omega, z, 0.5, true).volume == doctest::Approx(0.5));
  CHECK(twist(omega, z, 1.0, false).volume == doctest::Approx(0.0));
  CHECK(code_of([&] { twist(omega, z, 1.0, true); }) == ErrorCode::NonKahler);
  const SeshadriEstimate eps = seshadri_constant(omega, z);
  CHECK(eps.value == doctest::Approx(1.0));
  CHECK(eps.exact);
}

TEST_CASE("snapping reports the distance") {
  const TorusGrid grid(10);
  const SnappedNode a = snap_to_node(grid, 0.3, 0.7);
  CHECK(a.i == 3);
  CHECK(a.j == 7);
  CHECK(a.distance == doctest::Approx(0.0).epsilon(1e-12));
  const SnappedNode b = snap_to_node(grid, 0.98, 0.04);
  CHECK(b.i == 0);
  CHECK(b.j == 0);
  CHECK(b.distance == doctest::Approx(std::hypot(0.02, 0.04)).epsilon(1e-9));
}
