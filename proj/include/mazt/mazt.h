#ifndef MAZT_MAZT_H
#define MAZT_MAZT_H

#include <stddef.h>

#if defined(MAZT_BUILDING_LIBRARY)
#define MAZT_API __attribute__((visibility("default")))
#else
#define MAZT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mazt_status {
  MAZT_OK = 0,
  MAZT_INVALID_ARGUMENT = 1,
  MAZT_NON_ZERO_MEAN,
  MAZT_NON_KAHLER,
  MAZT_BAD_MASS,
  MAZT_NO_CONVERGENCE,
  MAZT_SESHADRI_VIOLATION,
  MAZT_NOT_CLASSIFIABLE,
  MAZT_BAD_REFERENCE,
  MAZT_INFEASIBLE_CLASS,
  MAZT_EMPTY_BOUNDARY,
  MAZT_EMPTY_REGION,
  MAZT_WRONG_REGIME,
  MAZT_CONCAVITY_VIOLATION,
  MAZT_PARSE_ERROR,
  MAZT_VALIDATION_ERROR,
  MAZT_IO_ERROR,
  MAZT_INTERNAL = 100
} mazt_status;

typedef struct mazt_grid mazt_grid;
typedef struct mazt_field mazt_field;
typedef struct mazt_form mazt_form;
typedef struct mazt_volume mazt_volume;
typedef struct mazt_divisor mazt_divisor;
typedef struct mazt_beta_solution mazt_beta_solution;
typedef struct mazt_envelope mazt_envelope;

typedef struct mazt_solve_options {
  double newton_tol;
  int max_iters;
  double linear_tol;
} mazt_solve_options;

typedef struct mazt_envelope_options {
  double omega_relax;
  double psor_tol;
  double lcp_tol;
  double contact_tol;
} mazt_envelope_options;

MAZT_API const char* mazt_version(void);
MAZT_API const char* mazt_status_name(mazt_status status);
/* Message of the last failing call on this thread; empty after success. */
MAZT_API const char* mazt_last_error(void);

MAZT_API mazt_solve_options mazt_solve_options_default(void);
MAZT_API mazt_envelope_options mazt_envelope_options_default(void);

MAZT_API mazt_status mazt_grid_create(int n, mazt_grid** out);
MAZT_API void mazt_grid_destroy(mazt_grid* grid);
MAZT_API int mazt_grid_n(const mazt_grid* grid);

/* values has n*n entries in storage order (index i*n + j). */
MAZT_API mazt_status mazt_field_from_values(const mazt_grid* grid,
                                            const double* values,
                                            mazt_field** out);
/* Samples a recipe such as "1 + 0.5*cos(2*pi*x)" at the nodes. */
MAZT_API mazt_status mazt_field_from_recipe(const mazt_grid* grid,
                                            const char* recipe,
                                            mazt_field** out);
MAZT_API void mazt_field_destroy(mazt_field* field);
MAZT_API size_t mazt_field_size(const mazt_field* field);
MAZT_API mazt_status mazt_field_copy_values(const mazt_field* field,
                                            double* out, size_t count);
MAZT_API mazt_status mazt_field_laplacian(const mazt_field* field,
                                          mazt_field** out);
MAZT_API mazt_status mazt_field_integrate(const mazt_field* field, double* out);
/* Zero-mean solution of Δu = rhs; rhs must have zero mean. */
MAZT_API mazt_status mazt_poisson_solve(const mazt_field* rhs, mazt_field** out);

MAZT_API mazt_status mazt_form_create(const mazt_field* density,
                                      int require_kahler, mazt_form** out);
MAZT_API void mazt_form_destroy(mazt_form* form);
MAZT_API double mazt_form_volume(const mazt_form* form);

MAZT_API mazt_status mazt_volume_create(const mazt_field* density,
                                        mazt_volume** out);
MAZT_API void mazt_volume_destroy(mazt_volume* volume);

/* Points as node indices; curvature may be NULL for the constant density. */
MAZT_API mazt_status mazt_divisor_create(const mazt_grid* grid, const int* i,
                                         const int* j, const int* multiplicity,
                                         size_t count,
                                         const mazt_field* curvature,
                                         mazt_divisor** out);
MAZT_API void mazt_divisor_destroy(mazt_divisor* divisor);

/* options and initial may be NULL. */
MAZT_API mazt_status mazt_solve_beta(const mazt_form* theta,
                                     const mazt_volume* g, double beta,
                                     const mazt_solve_options* options,
                                     const mazt_field* initial,
                                     mazt_beta_solution** out);
MAZT_API mazt_status mazt_solve_beta_divisor(
    const mazt_form* omega, const mazt_divisor* divisor, double lambda,
    double beta, const mazt_volume* g, const mazt_solve_options* options,
    mazt_beta_solution** out);
MAZT_API void mazt_beta_solution_destroy(mazt_beta_solution* solution);
/* Borrowed pointer, valid while the solution lives. */
MAZT_API const mazt_field* mazt_beta_solution_u(const mazt_beta_solution* s);
MAZT_API double mazt_beta_solution_residual(const mazt_beta_solution* s);
MAZT_API int mazt_beta_solution_iterations(const mazt_beta_solution* s);

MAZT_API mazt_status mazt_envelope_theta(const mazt_form* theta,
                                         const mazt_envelope_options* options,
                                         mazt_envelope** out);
MAZT_API mazt_status mazt_envelope_divisor(const mazt_form* omega,
                                           const mazt_divisor* divisor,
                                           double lambda,
                                           const mazt_envelope_options* options,
                                           mazt_envelope** out);
MAZT_API void mazt_envelope_destroy(mazt_envelope* envelope);
MAZT_API const mazt_field* mazt_envelope_u(const mazt_envelope* envelope);
/* Writes n*n bytes, 1 on the contact set. */
MAZT_API mazt_status mazt_envelope_contact(const mazt_envelope* envelope,
                                           unsigned char* out, size_t count);
MAZT_API double mazt_envelope_comp_residual(const mazt_envelope* envelope);

MAZT_API mazt_status mazt_energy(const mazt_field* u, const mazt_form* theta,
                                 double* out);
MAZT_API mazt_status mazt_l_beta(const mazt_field* u, const mazt_volume* g,
                                 double beta, double* out);

/* Runs a scenario from a config file. exit_code receives 0, 2, 3 or 4 and
   summary_json (may be NULL) the summary text, to be released with
   mazt_string_free. out_dir may be NULL. The return value is MAZT_OK unless
   the arguments themselves are invalid. */
MAZT_API mazt_status mazt_scenario_run(const char* kind, const char* config,
                                       int threads, const char* out_dir,
                                       int* exit_code, char** summary_json,
                                       char** message);
MAZT_API void mazt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
