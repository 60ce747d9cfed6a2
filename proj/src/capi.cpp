#include "mazt/mazt.h"

#include <cstring>
#include <string>

#include "mazt/config.hpp"
#include "mazt/envelope.hpp"
#include "mazt/errors.hpp"
#include "mazt/forms.hpp"
#include "mazt/functionals.hpp"
#include "mazt/grid.hpp"
#include "mazt/ma_solver.hpp"
#include "mazt/scenario.hpp"

struct mazt_grid {
  mazt::TorusGrid grid;
};
struct mazt_field {
  mazt::ScalarField field;
};
struct mazt_form {
  mazt::BackgroundForm form;
};
struct mazt_volume {
  mazt::VolumeDensity volume;
};
struct mazt_divisor {
  mazt::DivisorData divisor;
};
struct mazt_beta_solution {
  mazt::BetaSolution solution;
  mazt_field u;
};
struct mazt_envelope {
  mazt::EnvelopeSolution solution;
  mazt_field u;
};

namespace {

thread_local std::string last_error;

template <class F>
mazt_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MAZT_OK;
  } catch (const mazt::Error& e) {
    last_error = e.what();
    return static_cast<mazt_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    last_error = e.what();
    return MAZT_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return MAZT_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw mazt::Error(mazt::ErrorCode::InvalidArgument, what);
}

mazt::SolveOptions to_cpp(const mazt_solve_options* o) {
  mazt::SolveOptions s;
  if (o) {
    s.newton_tol = o->newton_tol;
    s.max_iters = o->max_iters;
    s.linear_tol = o->linear_tol;
  }
  return s;
}

mazt::EnvelopeOptions to_cpp(const mazt_envelope_options* o) {
  mazt::EnvelopeOptions e;
  if (o) {
    e.omega_relax = o->omega_relax;
    e.psor_tol = o->psor_tol;
    e.lcp_tol = o->lcp_tol;
    e.contact_tol = o->contact_tol;
  }
  return e;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* mazt_version(void) { return "1.0.0"; }

const char* mazt_status_name(mazt_status status) {
  if (status == MAZT_OK) return "Ok";
  if (status == MAZT_INTERNAL) return "Internal";
  const int v = static_cast<int>(status);
  if (v >= 1 && v <= static_cast<int>(mazt::ErrorCode::IoError)) {
    return mazt::error_code_name(static_cast<mazt::ErrorCode>(v));
  }
  return "Unknown";
}

const char* mazt_last_error(void) { return last_error.c_str(); }

mazt_solve_options mazt_solve_options_default(void) {
  const mazt::SolveOptions s;
  return {s.newton_tol, s.max_iters, s.linear_tol};
}

mazt_envelope_options mazt_envelope_options_default(void) {
  const mazt::EnvelopeOptions e;
  return {e.omega_relax, e.psor_tol, e.lcp_tol, e.contact_tol};
}

mazt_status mazt_grid_create(int n, mazt_grid** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new mazt_grid{mazt::TorusGrid(n)};
  });
}

void mazt_grid_destroy(mazt_grid* grid) { delete grid; }

int mazt_grid_n(const mazt_grid* grid) { return grid ? grid->grid.n() : 0; }

mazt_status mazt_field_from_values(const mazt_grid* grid, const double* values,
                                   mazt_field** out) {
  return guarded([&] {
    require(grid && values && out, "null argument");
    std::vector<double> v(values, values + grid->grid.size());
    *out = new mazt_field{mazt::ScalarField(grid->grid, std::move(v))};
  });
}

mazt_status mazt_field_from_recipe(const mazt_grid* grid, const char* recipe,
                                   mazt_field** out) {
  return guarded([&] {
    require(grid && recipe && out, "null argument");
    const mazt::Recipe r = mazt::Recipe::compile(recipe);
    *out = new mazt_field{mazt::ScalarField::sample(grid->grid, r.function())};
  });
}

void mazt_field_destroy(mazt_field* field) { delete field; }

size_t mazt_field_size(const mazt_field* field) {
  return field ? field->field.size() : 0;
}

mazt_status mazt_field_copy_values(const mazt_field* field, double* out,
                                   size_t count) {
  return guarded([&] {
    require(field && out, "null argument");
    require(count >= field->field.size(), "output buffer too small");
    std::memcpy(out, field->field.data(), field->field.size() * sizeof(double));
  });
}

mazt_status mazt_field_laplacian(const mazt_field* field, mazt_field** out) {
  return guarded([&] {
    require(field && out, "null argument");
    *out = new mazt_field{mazt::laplacian(field->field)};
  });
}

mazt_status mazt_field_integrate(const mazt_field* field, double* out) {
  return guarded([&] {
    require(field && out, "null argument");
    *out = mazt::integrate(field->field);
  });
}

mazt_status mazt_poisson_solve(const mazt_field* rhs, mazt_field** out) {
  return guarded([&] {
    require(rhs && out, "null argument");
    *out = new mazt_field{mazt::poisson_solve(rhs->field)};
  });
}

mazt_status mazt_form_create(const mazt_field* density, int require_kahler,
                             mazt_form** out) {
  return guarded([&] {
    require(density && out, "null argument");
    *out = new mazt_form{mazt::make_background(density->field, require_kahler != 0)};
  });
}

void mazt_form_destroy(mazt_form* form) { delete form; }

double mazt_form_volume(const mazt_form* form) {
  return form ? form->form.volume : 0.0;
}

mazt_status mazt_volume_create(const mazt_field* density, mazt_volume** out) {
  return guarded([&] {
    require(density && out, "null argument");
    *out = new mazt_volume{mazt::make_volume(density->field)};
  });
}

void mazt_volume_destroy(mazt_volume* volume) { delete volume; }

mazt_status mazt_divisor_create(const mazt_grid* grid, const int* i,
                                const int* j, const int* multiplicity,
                                size_t count, const mazt_field* curvature,
                                mazt_divisor** out) {
  return guarded([&] {
    require(grid && out, "null argument");
    require(count == 0 || (i && j && multiplicity), "null point arrays");
    std::vector<mazt::DivisorPoint> pts;
    for (size_t k = 0; k < count; ++k) pts.push_back({i[k], j[k], multiplicity[k]});
    std::optional<mazt::ScalarField> fl;
    if (curvature) fl = curvature->field;
    *out = new mazt_divisor{mazt::make_divisor(grid->grid, std::move(pts), std::move(fl))};
  });
}

void mazt_divisor_destroy(mazt_divisor* divisor) { delete divisor; }

mazt_status mazt_solve_beta(const mazt_form* theta, const mazt_volume* g,
                            double beta, const mazt_solve_options* options,
                            const mazt_field* initial,
                            mazt_beta_solution** out) {
  return guarded([&] {
    require(theta && g && out, "null argument");
    mazt::BetaSolution s = mazt::solve_beta(theta->form, g->volume, beta,
                                            to_cpp(options),
                                            initial ? &initial->field : nullptr);
    mazt::ScalarField u = s.u;
    *out = new mazt_beta_solution{std::move(s), mazt_field{std::move(u)}};
  });
}

mazt_status mazt_solve_beta_divisor(const mazt_form* omega,
                                    const mazt_divisor* divisor, double lambda,
                                    double beta, const mazt_volume* g,
                                    const mazt_solve_options* options,
                                    mazt_beta_solution** out) {
  return guarded([&] {
    require(omega && divisor && g && out, "null argument");
    mazt::BetaSolution s = mazt::solve_beta_divisor(
        omega->form, divisor->divisor, lambda, beta, g->volume, to_cpp(options));
    mazt::ScalarField u = s.u;
    *out = new mazt_beta_solution{std::move(s), mazt_field{std::move(u)}};
  });
}

void mazt_beta_solution_destroy(mazt_beta_solution* solution) { delete solution; }

const mazt_field* mazt_beta_solution_u(const mazt_beta_solution* s) {
  return s ? &s->u : nullptr;
}

double mazt_beta_solution_residual(const mazt_beta_solution* s) {
  return s ? s->solution.residual_sup : 0.0;
}

int mazt_beta_solution_iterations(const mazt_beta_solution* s) {
  return s ? s->solution.iters : 0;
}

mazt_status mazt_envelope_theta(const mazt_form* theta,
                                const mazt_envelope_options* options,
                                mazt_envelope** out) {
  return guarded([&] {
    require(theta && out, "null argument");
    mazt::EnvelopeSolution s = mazt::envelope_theta(theta->form, to_cpp(options));
    mazt::ScalarField u = s.u;
    *out = new mazt_envelope{std::move(s), mazt_field{std::move(u)}};
  });
}

mazt_status mazt_envelope_divisor(const mazt_form* omega,
                                  const mazt_divisor* divisor, double lambda,
                                  const mazt_envelope_options* options,
                                  mazt_envelope** out) {
  return guarded([&] {
    require(omega && divisor && out, "null argument");
    mazt::DivisorEnvelope d = mazt::envelope_divisor(
        omega->form, divisor->divisor, lambda, to_cpp(options));
    mazt::ScalarField u = d.solution.u;
    *out = new mazt_envelope{std::move(d.solution), mazt_field{std::move(u)}};
  });
}

void mazt_envelope_destroy(mazt_envelope* envelope) { delete envelope; }

const mazt_field* mazt_envelope_u(const mazt_envelope* envelope) {
  return envelope ? &envelope->u : nullptr;
}

mazt_status mazt_envelope_contact(const mazt_envelope* envelope,
                                  unsigned char* out, size_t count) {
  return guarded([&] {
    require(envelope && out, "null argument");
    const auto& c = envelope->solution.contact;
    require(count >= c.size(), "output buffer too small");
    std::memcpy(out, c.data(), c.size());
  });
}

double mazt_envelope_comp_residual(const mazt_envelope* envelope) {
  return envelope ? envelope->solution.comp_residual : 0.0;
}

mazt_status mazt_energy(const mazt_field* u, const mazt_form* theta,
                        double* out) {
  return guarded([&] {
    require(u && theta && out, "null argument");
    *out = mazt::energy(u->field, theta->form);
  });
}

mazt_status mazt_l_beta(const mazt_field* u, const mazt_volume* g, double beta,
                        double* out) {
  return guarded([&] {
    require(u && g && out, "null argument");
    *out = mazt::l_beta(u->field, g->volume, beta);
  });
}

mazt_status mazt_scenario_run(const char* kind, const char* config, int threads,
                              const char* out_dir, int* exit_code,
                              char** summary_json, char** message) {
  return guarded([&] {
    require(kind && config && exit_code, "null argument");
    std::optional<std::filesystem::path> out;
    if (out_dir) out = out_dir;
    const mazt::ScenarioOutcome o =
        mazt::run_scenario_file(kind, config, threads, out);
    *exit_code = o.exit_code;
    if (summary_json) *summary_json = dup_string(o.summary_json);
    if (message) *message = dup_string(o.message);
  });
}

void mazt_string_free(char* s) { delete[] s; }

}  // extern "C"
