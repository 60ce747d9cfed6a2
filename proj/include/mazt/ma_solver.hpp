#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mazt/forms.hpp"
#include "mazt/grid.hpp"

namespace mazt {

struct SolveOptions {
  double newton_tol = 1e-9;    // sup-norm residual target
  int max_iters = 200;
  double linear_tol = 1e-12;   // floor on the relative PCG tolerance
  int max_linear_iters = 4000;
  double min_step = 0x1p-30;
  double exponent_cap = 700.0;
};

struct NewtonRecord {
  int iteration;
  double residual_sup;
  double step;
  int linear_iters;
};

struct BetaSolution {
  ScalarField u;
  double beta;
  double residual_sup;
  int iters;
  std::vector<NewtonRecord> history;
  std::size_t capped_nodes = 0;      // exponent clamped at +exponent_cap
  std::size_t underflow_nodes = 0;   // exponent below -exponent_cap, RHS set to 0
};

/// Solves f_θ + κΔu = e^{βu} g by damped Newton. The Newton systems are solved
/// matrix-free by PCG preconditioned with the spectral inverse of σ - κΔ.
/// Default initial guess is the constant log(max(V, 1e-12))/β.
BetaSolution solve_beta(const BackgroundForm& theta, const VolumeDensity& g,
                        double beta, const SolveOptions& opts = {},
                        const ScalarField* initial = nullptr);

/// Divisor-degenerate equation on θ_λ = ω - λθ_L:
///   f_{θ_λ} + κΔu = e^{βu} e^{λβ h_s} g,
/// with the weight fused into the exponent. Throws SeshadriViolation if
/// V - λm <= 0.
BetaSolution solve_beta_divisor(const BackgroundForm& omega,
                                const DivisorData& z, double lambda,
                                double beta, const VolumeDensity& g,
                                const SolveOptions& opts = {},
                                const ScalarField* initial = nullptr);

/// f_θ + κΔu - e^{βu + w} g, where w is an optional log-weight field.
ScalarField ma_residual(const BackgroundForm& theta, const VolumeDensity& g,
                        double beta, const ScalarField& u,
                        const ScalarField* log_weight = nullptr);

/// Density of MA(u) = (f_θ + κΔu) dA.
ScalarField ma_density(const BackgroundForm& theta, const ScalarField& u);

struct ComparisonVerdict {
  bool holds;
  std::size_t violations;  // nodes with v > u + comparison_tol
  double worst_gap;        // max(v - u)
};

/// Given v with MA(v) >= e^{βv} dV and u with MA(u) <= e^{βu} dV (checked
/// from residual signs up to residual_tol), verifies v <= u. Throws
/// NotClassifiable if the residual signs do not allow the classification.
ComparisonVerdict check_comparison(const BackgroundForm& theta,
                                   const VolumeDensity& g, double beta,
                                   const ScalarField& u, const ScalarField& v,
                                   double residual_tol = 1e-8,
                                   double comparison_tol = 1e-10);

struct LaplacianBoundReport {
  double beta;
  double prefactor;         // (1 - 1/β)^{-1}
  double sup_trace_theta;   // sup f_θ / ω_ref
  double bound;             // prefactor * sup_trace_theta (B = 0 on the flat torus)
  double max_trace_ratio;   // max (f_θ + κΔu) / ω_ref
  double min_trace_ratio;
  double osc_u_minus_v;     // osc of u - v, κΔv = ω_ref - f_θ
  double slack;             // bound - max_trace_ratio
  bool holds;
};

/// Pointwise trace bound tr_ω ω_u <= (1-1/β)^{-1} sup tr_ω θ for the flat
/// reference (bisectional curvature bound B = 0). Requires β > 1 and a
/// strictly positive reference density in the class of θ.
LaplacianBoundReport laplacian_bound_report(const BackgroundForm& theta,
                                            const BetaSolution& solution,
                                            const BackgroundForm& reference,
                                            double tol = 1e-9);

}  // namespace mazt
