#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mazt/errors.hpp"
#include "mazt/zero_temp.hpp"
#include "oracles.hpp"

using namespace mazt;

namespace {

constexpr double kPi = std::numbers::pi;

double cosine(double x) { return 1 + 2 * std::cos(2 * kPi * x); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

struct Setup {
  TorusGrid grid;
  BackgroundForm theta;
  VolumeDensity g;
};

Setup cosine_setup(int n) {
  const TorusGrid grid(n);
  return {grid,
          make_background(grid, [](double x, double) { return cosine(x); }, true),
          make_volume(ScalarField(grid, 1.0))};
}

}  // namespace

TEST_CASE("positive density: log expansion and unit rate") {
  const TorusGrid grid(32);
  const auto f = [](double x, double) { return 1 + 0.5 * std::cos(2 * kPi * x); };
  const BackgroundForm theta = make_background(grid, f, true);
  const VolumeDensity g = make_volume(ScalarField(grid, 1.0));
  const SweepReport rep = sweep_beta(theta, g, default_betas());
  CHECK(rep.envelope.u.sup_norm() == 0.0);
  double sup_log = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    sup_log = std::max(sup_log, std::fabs(std::log(theta.density[k])));
  CHECK(rep.sup_err.back() * rep.betas.back() == doctest::Approx(sup_log).epsilon(0.01));
  CHECK(rep.rate.p == doctest::Approx(1.0).epsilon(0.02));
  const PositiveCaseReport pc = positive_case(rep, theta, g);
  CHECK(pc.decreasing);
  CHECK(pc.expansion_err.back() <= 0.05);
}

TEST_CASE("cosine sweep converges monotonically") {
  const Setup s = cosine_setup(64);
  const SweepReport rep = sweep_beta(s.theta, s.g, default_betas());
  CHECK(strictly_decreasing(rep.sup_err));
  CHECK(non_increasing(rep.energy_gap, 1e-9));
  CHECK(rep.rate.p == doctest::Approx(1.0).epsilon(0.2));

  // The β sweep agrees with the same-grid 1-D oracle at every β.
  const std::vector<double> f1 = oracle::sample(64, cosine);
  for (std::size_t k = 0; k < rep.betas.size(); k += 3) {
    const std::vector<double> ref =
        oracle::solve_beta_1d(f1, std::vector<double>(64, 1.0), rep.betas[k]);
    for (int i = 0; i < 64; ++i) CHECK(rep.solutions[k].u.at(i, 5) == doctest::Approx(ref[i]).epsilon(1e-8));
  }
}

TEST_CASE("continuation does not change the answer") {
  const Setup s = cosine_setup(32);
  SweepOptions warm, cold;
  cold.continuation = false;
  cold.threads = 3;
  const SweepReport a = sweep_beta(s.theta, s.g, {16, 64, 256}, warm);
  const SweepReport b = sweep_beta(s.theta, s.g, {16, 64, 256}, cold);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.sup_err[k] == doctest::Approx(b.sup_err[k]).epsilon(1e-8));
}

TEST_CASE("refined bound: tight for constants, holds for the cosine, fails when corrupted") {
  const TorusGrid grid(16);
  const BackgroundForm two = make_background(ScalarField(grid, 2.0), true);
  const VolumeDensity g = make_volume(ScalarField(grid, 1.0));
  const SweepReport c = sweep_beta(two, g, {8, 64, 512});
  CHECK(c.refined_c == doctest::Approx(std::log(2.0)));
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(c.max_excess[k] == doctest::Approx(std::log(2.0) / c.betas[k]).epsilon(1e-9));
  CHECK(refined_bound_check(c, 1e-12).pass);

  const Setup s = cosine_setup(64);
  SweepReport rep = sweep_beta(s.theta, s.g, default_betas());
  CHECK(refined_bound_check(rep).worst_margin > -1e-4);
  for (std::size_t k = 0; k < rep.betas.size(); ++k) rep.max_excess[k] += 1 / std::sqrt(rep.betas[k]);
  CHECK_FALSE(refined_bound_check(rep).pass);
}

TEST_CASE("MA decay off the contact set") {
  // K_δ is resolved to about |∇u_θ|·h, so the rate only settles near δ on a
  // fine grid (45% off at N = 64, 16% at 128, 3% at 256).
  const Setup s = cosine_setup(256);
  const SweepReport rep = sweep_beta(s.theta, s.g, default_betas());
  const double delta = 0.1 * rep.envelope.u.sup_norm();
  const DecayVerdict v = ma_decay_check(rep, s.g, delta, 0.10);
  CHECK(v.bound_holds);
  CHECK(v.rate_ok);
  CHECK(code_of([&] { ma_decay_check(rep, s.g, 2 * rep.envelope.u.sup_norm()); }) ==
        ErrorCode::EmptyRegion);

  const TorusGrid grid(16);
  const BackgroundForm pos = make_background(ScalarField(grid, 1.0), true);
  const VolumeDensity g16 = make_volume(ScalarField(grid, 1.0));
  const SweepReport p = sweep_beta(pos, g16, {8, 16});
  CHECK(code_of([&] { ma_decay_check(p, g16, 1e-3); }) == ErrorCode::EmptyRegion);
}

TEST_CASE("sweep input validation") {
  const Setup s = cosine_setup(16);
  CHECK(code_of([&] { sweep_beta(s.theta, s.g, {0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { sweep_beta(s.theta, s.g, {16, 8}); }) == ErrorCode::InvalidArgument);
  try {
    sweep_beta(s.theta, s.g, {0.5});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("beta must exceed 1") != std::string::npos);
  }
}

TEST_CASE("rate fit recovers a power law") {
  const std::vector<double> b = {8, 16, 32, 64, 128, 256};
  std::vector<double> e;
  for (double x : b) e.push_back(3.0 * std::pow(x, -1.3));
  const RateFit r = fit_rate(b, e);
  CHECK(r.p == doctest::Approx(1.3));
  CHECK(r.c == doctest::Approx(3.0));
}
