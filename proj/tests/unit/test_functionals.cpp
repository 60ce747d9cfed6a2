#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mazt/envelope.hpp"
#include "mazt/functionals.hpp"
#include "mazt/ma_solver.hpp"

using namespace mazt;

namespace {

constexpr double kPi = std::numbers::pi;

BackgroundForm cosine_form(const TorusGrid& grid) {
  return make_background(
      grid, [](double x, double) { return 1 + 2 * std::cos(2 * kPi * x); }, true);
}

}  // namespace

TEST_CASE("energy of constants") {
  const TorusGrid grid(32);
  const BackgroundForm theta = make_background(
      grid, [](double x, double y) { return 2 + std::sin(2 * kPi * x) * std::cos(2 * kPi * y); },
      true);
  CHECK(energy(ScalarField(grid), theta) == 0.0);
  CHECK(energy(ScalarField(grid, 0.7), theta) == doctest::Approx(0.7 * theta.volume));
}

TEST_CASE("energy is a primitive of the MA operator") {
  const TorusGrid grid(48);
  const BackgroundForm theta = cosine_form(grid);
  const ScalarField u = ScalarField::sample(grid, [](double x, double y) {
    return 0.05 * std::sin(2 * kPi * x) + 0.02 * std::cos(4 * kPi * y);
  });
  const PrimitiveReport r =
      check_energy_primitive(u, theta, random_probes(grid, 20, 42));
  CHECK(r.holds);
  CHECK(r.max_rel_error <= 1e-6);

  // Hand-rolled centred difference along one probe as a second route.
  const ScalarField v = random_probes(grid, 1, 7)[0];
  const double t = 1e-4;
  const double fd = (energy(u + t * v, theta) - energy(u + (-t) * v, theta)) / (2 * t);
  const double pairing = inner(v, theta.density + kKappa * laplacian(u));
  CHECK(fd == doctest::Approx(pairing).epsilon(1e-8));
}

TEST_CASE("L_beta of a constant") {
  const TorusGrid grid(16);
  const VolumeDensity g = make_volume(ScalarField::sample(
      grid, [](double x, double) { return 1.5 + std::cos(2 * kPi * x); }));
  for (double beta : {2.0, 100.0, 5000.0})
    CHECK(l_beta(ScalarField(grid, -0.4), g, beta) == doctest::Approx(-0.4).epsilon(1e-13));
}

TEST_CASE("G_beta is stationary at the normalised solution") {
  const TorusGrid grid(32);
  const BackgroundForm theta = cosine_form(grid);
  const VolumeDensity g = make_volume(ScalarField(grid, 1.0));
  const BetaSolution s = solve_beta(theta, g, 16.0);
  const std::vector<ScalarField> probes = {
      ScalarField(grid, 1.0),
      ScalarField::sample(grid, [](double x, double) { return std::cos(2 * kPi * x); })};
  const StationarityReport r = g_beta_stationarity(s, g, theta, probes);
  // Exactly affine along constants; only cancellation error ~ eps |G| / t remains.
  CHECK(std::fabs(r.probes[0].derivative) <= 1e-10);
  CHECK(std::fabs(r.probes[1].derivative) <= 1e-6);
  CHECK(r.holds);
  // Concave along probes: second differences non-positive up to roundoff.
  CHECK(r.max_second_difference <= 1e-9);
}

TEST_CASE("relative entropy") {
  const TorusGrid grid(20);
  const VolumeDensity mu0 = make_volume(ScalarField(grid, 1.0));
  CHECK(std::fabs(relative_entropy(mu0.density, mu0)) <= 1e-14);
  ScalarField half(grid);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 20; ++j) half.at(i, j) = 2.0;
  CHECK(relative_entropy(half, mu0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("energy report and contact-set entropy are finite") {
  const TorusGrid grid(64);
  const BackgroundForm theta = cosine_form(grid);
  const VolumeDensity g = make_volume(ScalarField(grid, 1.0));
  const EnvelopeSolution env = envelope_theta(theta);
  const EnergyReport rep = energy_report(env.u, theta, g, 32.0, true);
  REQUIRE(rep.entropy.has_value());
  CHECK(std::isfinite(*rep.entropy));
  CHECK(rep.g_beta == doctest::Approx(rep.energy - theta.volume * rep.l_beta));
  const double closed = contact_set_entropy(theta, env, g);
  CHECK(std::isfinite(closed));
  CHECK(closed > 0.0);
}
