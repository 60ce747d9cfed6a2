#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mazt/mazt.h"

TEST_CASE("status names and errors") {
  CHECK(std::string(mazt_status_name(MAZT_OK)) == "Ok");
  CHECK(std::string(mazt_status_name(MAZT_NON_KAHLER)) == "NonKahler");
  mazt_grid* grid = nullptr;
  CHECK(mazt_grid_create(64, nullptr) == MAZT_INVALID_ARGUMENT);
  CHECK(std::strlen(mazt_last_error()) > 0);
  REQUIRE(mazt_grid_create(16, &grid) == MAZT_OK);
  CHECK(std::strlen(mazt_last_error()) == 0);

  mazt_field* neg = nullptr;
  REQUIRE(mazt_field_from_recipe(grid, "-1", &neg) == MAZT_OK);
  mazt_form* form = nullptr;
  CHECK(mazt_form_create(neg, 1, &form) == MAZT_NON_KAHLER);
  CHECK(form == nullptr);
  mazt_field* bad = nullptr;
  CHECK(mazt_field_from_recipe(grid, "1 +", &bad) == MAZT_PARSE_ERROR);
  mazt_field_destroy(neg);
  mazt_grid_destroy(grid);
}

TEST_CASE("solve and envelope through the C interface") {
  mazt_grid* grid = nullptr;
  REQUIRE(mazt_grid_create(32, &grid) == MAZT_OK);
  mazt_field *f = nullptr, *one = nullptr;
  REQUIRE(mazt_field_from_recipe(grid, "1 + 2*cos(2*pi*x)", &f) == MAZT_OK);
  REQUIRE(mazt_field_from_recipe(grid, "1", &one) == MAZT_OK);
  mazt_form* theta = nullptr;
  mazt_volume* g = nullptr;
  REQUIRE(mazt_form_create(f, 1, &theta) == MAZT_OK);
  REQUIRE(mazt_volume_create(one, &g) == MAZT_OK);
  CHECK(mazt_form_volume(theta) == doctest::Approx(1.0));

  const mazt_solve_options opts = mazt_solve_options_default();
  mazt_beta_solution* sol = nullptr;
  REQUIRE(mazt_solve_beta(theta, g, 64.0, &opts, nullptr, &sol) == MAZT_OK);
  CHECK(mazt_beta_solution_residual(sol) <= 1e-9);

  mazt_envelope* env = nullptr;
  REQUIRE(mazt_envelope_theta(theta, nullptr, &env) == MAZT_OK);
  CHECK(mazt_envelope_comp_residual(env) <= 1e-10);
  std::vector<double> u(mazt_field_size(mazt_envelope_u(env)));
  REQUIRE(mazt_field_copy_values(mazt_envelope_u(env), u.data(), u.size()) == MAZT_OK);
  double mn = 0.0;
  for (double v : u) mn = std::min(mn, v);
  CHECK(mn < -0.2);
  std::vector<unsigned char> contact(u.size());
  CHECK(mazt_envelope_contact(env, contact.data(), contact.size()) == MAZT_OK);
  CHECK(mazt_envelope_contact(env, contact.data(), 3) == MAZT_INVALID_ARGUMENT);

  // At β = 64 the solution is already close to the envelope.
  std::vector<double> ub(u.size());
  mazt_field_copy_values(mazt_beta_solution_u(sol), ub.data(), ub.size());
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(std::fabs(ub[k] - u[k]) <= 0.05);

  double e = 0.0, l = 0.0;
  CHECK(mazt_energy(mazt_envelope_u(env), theta, &e) == MAZT_OK);
  CHECK(mazt_l_beta(one, g, 8.0, &l) == MAZT_OK);
  CHECK(l == doctest::Approx(1.0));

  mazt_field *lap = nullptr, *back = nullptr;
  REQUIRE(mazt_field_laplacian(f, &lap) == MAZT_OK);
  REQUIRE(mazt_poisson_solve(lap, &back) == MAZT_OK);
  double integral = 1.0;
  mazt_field_integrate(back, &integral);
  CHECK(std::fabs(integral) <= 1e-12);
  CHECK(mazt_poisson_solve(one, &back) == MAZT_NON_ZERO_MEAN);

  mazt_field_destroy(lap);
  mazt_field_destroy(back);
  mazt_envelope_destroy(env);
  mazt_beta_solution_destroy(sol);
  mazt_volume_destroy(g);
  mazt_form_destroy(theta);
  mazt_field_destroy(one);
  mazt_field_destroy(f);
  mazt_grid_destroy(grid);
}

TEST_CASE("divisor calls") {
  mazt_grid* grid = nullptr;
  mazt_grid_create(32, &grid);
  mazt_field* one = nullptr;
  mazt_field_from_recipe(grid, "1", &one);
  mazt_form* omega = nullptr;
  mazt_volume* g = nullptr;
  mazt_form_create(one, 1, &omega);
  mazt_volume_create(one, &g);
  const int i[] = {16}, j[] = {16}, m[] = {1};
  mazt_divisor* z = nullptr;
  REQUIRE(mazt_divisor_create(grid, i, j, m, 1, nullptr, &z) == MAZT_OK);
  mazt_envelope* env = nullptr;
  CHECK(mazt_envelope_divisor(omega, z, 1.0, nullptr, &env) == MAZT_SESHADRI_VIOLATION);
  REQUIRE(mazt_envelope_divisor(omega, z, 0.2, nullptr, &env) == MAZT_OK);
  std::vector<unsigned char> contact(32 * 32);
  mazt_envelope_contact(env, contact.data(), contact.size());
  CHECK(contact[16 * 32 + 16] == 0);
  mazt_beta_solution* sol = nullptr;
  CHECK(mazt_solve_beta_divisor(omega, z, 0.2, 64.0, g, nullptr, &sol) == MAZT_OK);
  mazt_beta_solution_destroy(sol);
  mazt_envelope_destroy(env);
  mazt_divisor_destroy(z);
  mazt_volume_destroy(g);
  mazt_form_destroy(omega);
  mazt_field_destroy(one);
  mazt_grid_destroy(grid);
}

TEST_CASE("scenario entry point") {
  const auto dir = std::filesystem::temp_directory_path() / "mazt_capi_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "env.ini") << "[grid]\nN = 16\n[forms]\nf_theta = 1\n";
  int code = -1;
  char* summary = nullptr;
  char* message = nullptr;
  REQUIRE(mazt_scenario_run("envelope", (dir / "env.ini").c_str(), 1,
                            (dir / "out").c_str(), &code, &summary, &message) == MAZT_OK);
  CHECK(code == 0);
  CHECK(std::string(summary).find("\"status\": \"pass\"") != std::string::npos);
  mazt_string_free(summary);
  mazt_string_free(message);
  CHECK(mazt_scenario_run(nullptr, "x", 1, nullptr, &code, nullptr, nullptr) == MAZT_INVALID_ARGUMENT);
}
