#pragma once

#include <optional>
#include <vector>

#include "mazt/envelope.hpp"
#include "mazt/forms.hpp"
#include "mazt/grid.hpp"
#include "mazt/ma_solver.hpp"

namespace mazt {

/// Monge-Ampère energy with E(0) = 0: ∫u f_θ + (κ/2)∫u Δu.
double energy(const ScalarField& u, const BackgroundForm& theta);

/// (1/β) log ∫ e^{βu} μ₀, evaluated as max u + (1/β) log ∫ e^{β(u - max u)} μ₀.
double l_beta(const ScalarField& u, const VolumeDensity& mu0, double beta);

/// E(u) - V·L_β(u). Invariant under u -> u + c; maximised by the solution of
/// f_θ + κΔu = e^{βu} μ₀ (up to constants).
double g_beta(const ScalarField& u, const BackgroundForm& theta,
              const VolumeDensity& mu0, double beta);

/// ∫ log(μ/μ₀) μ over nodes with μ > 0.
double relative_entropy(const ScalarField& mu, const VolumeDensity& mu0);

struct EnergyReport {
  double energy;
  double l_beta;
  double g_beta;
  std::optional<double> entropy;  // of MA(u) relative to μ₀
};

EnergyReport energy_report(const ScalarField& u, const BackgroundForm& theta,
                           const VolumeDensity& mu0, double beta,
                           bool with_entropy);

struct ProbeResult {
  double derivative;         // centred difference of G_β(U + tv) at t = 0
  double second_difference;  // G(U+tv) - 2G(U) + G(U-tv)
};

struct StationarityReport {
  std::vector<ProbeResult> probes;
  double max_abs_derivative;
  double max_second_difference;
  double stat_tol;
  double concavity_tol;
  bool holds;
};

/// Probes G_β at U_β = u_β - sup u_β along each direction. A non-positive
/// step t selects 1e-3/β.
StationarityReport g_beta_stationarity(const BetaSolution& solution,
                                       const VolumeDensity& mu0,
                                       const BackgroundForm& theta,
                                       const std::vector<ScalarField>& probes,
                                       double t = 0.0, double stat_tol = 1e-6,
                                       double concavity_tol = 1e-9);

struct PrimitiveReport {
  std::vector<double> rel_errors;  // |(E(u+tv)-E(u-tv))/2t - ∫v MA(u)| / |∫v MA(u)|
  double max_rel_error;
  double tol;
  bool holds;
};

/// Checks dE = MA along the given directions.
PrimitiveReport check_energy_primitive(const ScalarField& u,
                                       const BackgroundForm& theta,
                                       const std::vector<ScalarField>& probes,
                                       double t = 1e-3, double tol = 1e-6);

/// ∫_D log(f_θ/g) f_θ over the contact set of an envelope solution, the value
/// the entropy of MA(u_θ) takes when MA(u_θ) = 1_D f_θ dA.
double contact_set_entropy(const BackgroundForm& theta,
                           const EnvelopeSolution& sol,
                           const VolumeDensity& g);

/// Deterministic random probe fields with nodal values uniform in [0, 1).
std::vector<ScalarField> random_probes(const TorusGrid& grid, int count,
                                       unsigned long long seed);

}  // namespace mazt
