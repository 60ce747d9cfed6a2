#pragma once

#include <vector>

#include "mazt/envelope.hpp"
#include "mazt/forms.hpp"
#include "mazt/ma_solver.hpp"

namespace mazt {

struct RayOptions {
  EnvelopeOptions envelope;
  SolveOptions solve;
  double conc_tol = 1e-6;  // allowed positive second difference in μ
};

/// ψ_μ for μ = λ - c, from the divisor envelopes φ_λ = u_λ + λ h_s.
struct PsiFamily {
  double c;
  std::vector<double> lambdas;
  std::vector<double> mus;
  std::vector<ScalarField> psi;
  double max_psi;                    // should be <= 0
  double max_second_difference;      // concavity defect in μ
};

/// Uniform grid of `count` values in [0, c].
std::vector<double> uniform_lambdas(double c, int count);

/// Throws ConcavityViolation when a second difference in μ exceeds conc_tol.
PsiFamily build_psi_family(const BackgroundForm& omega, const DivisorData& z,
                           double c, std::vector<double> lambdas,
                           const RayOptions& opts = {});

/// {0, 0.25, ..., 2, 4, 8, 16, 32, 64}.
std::vector<double> default_times();

struct Ray {
  std::vector<double> ts;
  std::vector<ScalarField> phi;             // φᵗ = max_k ψ_k + μ_k t
  std::vector<std::vector<int>> argmax;     // per t, per node
};

Ray legendre_ray(const PsiFamily& family, const std::vector<double>& ts);

/// Per node, transforms t ↦ φᵗ back to μ over all real t, using the exact
/// breakpoints of the piecewise-affine ray. Returns one field per μ.
std::vector<ScalarField> double_legendre(const PsiFamily& family);

/// Upper concave hull of (xs, ys) with xs strictly increasing, evaluated back
/// at every xs (monotone chain plus linear interpolation).
std::vector<double> upper_concave_hull(const std::vector<double>& xs,
                                       const std::vector<double>& ys);

struct RayShapeReport {
  double min_convexity;        // min divided second difference in t
  bool argmax_monotone;        // argmax index non-decreasing in t
  double min_psh_density;      // min over t, x of f_ω + κΔφᵗ
};
RayShapeReport ray_shape(const BackgroundForm& omega, const Ray& ray);

struct Subgeodesic {
  double beta;
  std::vector<ScalarField> phi_lambda;  // φ_{β,λ} = u_{β,λ} + λ h_s
  std::vector<double> weights;          // trapezoid weights in λ
  std::vector<double> ts;
  std::vector<ScalarField> phi;         // φ_βᵗ per t
  std::size_t underflow_nodes;
};

/// Solves the divisor equation at each λ (warm-started across λ) and
/// integrates in λ with log-sum-exp trapezoid weights. A single λ gets weight 1.
Subgeodesic subgeodesic(const BackgroundForm& omega, const DivisorData& z,
                        double c, double beta, std::vector<double> lambdas,
                        std::vector<double> ts, const VolumeDensity& g,
                        const RayOptions& opts = {});

/// Trapezoid weights for a sorted grid; a single node gets weight 1.
std::vector<double> trapezoid_weights(const std::vector<double>& xs);

struct DeviationReport {
  std::vector<double> per_t;  // sup_x |φ_βᵗ - φᵗ|
  double sup_dev;
  double tail_change;         // |per_t(last) - per_t(second last)|
};
DeviationReport ray_deviation(const Subgeodesic& sub, const Ray& ray);

struct EnergySlopeReport {
  std::vector<double> ts;
  std::vector<double> energies;     // E(φᵗ)
  double window_t;                  // slope fitted on t <= window_t
  std::size_t window_points;
  double slope_measured;
  double intercept;
  double affine_dev;                // max |E - fit| inside the window
  double affine_tol;
  double slope_paper;               // ∫_0^c (λ-c)(V-λm) dλ
  double slope_dh;                  // ∫_0^c ((V-λm) - V) dλ = -m c²/2
  double slope_rel_error;           // vs slope_paper
  double tail_spread;               // max - min of E beyond the window
  bool affine;
  bool slope_ok;
};

/// Window defaults to (-min h_s)/2: beyond the depth of the discrete Green
/// function the argmax saturates and E(φᵗ) flattens.
EnergySlopeReport energy_slope_check(const BackgroundForm& omega,
                                     const DivisorData& z,
                                     const PsiFamily& family, const Ray& ray,
                                     double slope_tol = 0.02,
                                     double window_t = -1.0);

/// ∫_0^c (λ-c)(V-λm) dλ by composite Simpson.
double paper_energy_slope(double volume, int multiplicity, double c);

}  // namespace mazt
