#include "mazt/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mazt/errors.hpp"

namespace mazt {

double energy(const ScalarField& u, const BackgroundForm& theta) {
  const ScalarField lap = laplacian(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    s += u[k] * (theta.density[k] + 0.5 * kKappa * lap[k]);
  }
  return s * u.grid().cell_area();
}

double l_beta(const ScalarField& u, const VolumeDensity& mu0, double beta) {
  if (!(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "L_beta needs beta > 0");
  }
  const double top = u.max();
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    s += std::exp(beta * (u[k] - top)) * mu0.density[k];
  }
  return top + std::log(s * u.grid().cell_area()) / beta;
}

double g_beta(const ScalarField& u, const BackgroundForm& theta,
              const VolumeDensity& mu0, double beta) {
  return energy(u, theta) - theta.volume * l_beta(u, mu0, beta);
}

double relative_entropy(const ScalarField& mu, const VolumeDensity& mu0) {
  if (!(integrate(mu) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "entropy needs positive mass");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (mu[k] > 0.0) s += std::log(mu[k] / mu0.density[k]) * mu[k];
  }
  return s * mu.grid().cell_area();
}

EnergyReport energy_report(const ScalarField& u, const BackgroundForm& theta,
                           const VolumeDensity& mu0, double beta,
                           bool with_entropy) {
  EnergyReport r{};
  r.energy = energy(u, theta);
  r.l_beta = l_beta(u, mu0, beta);
  r.g_beta = r.energy - theta.volume * r.l_beta;
  if (with_entropy) r.entropy = relative_entropy(ma_density(theta, u), mu0);
  return r;
}

StationarityReport g_beta_stationarity(const BetaSolution& solution,
                                       const VolumeDensity& mu0,
                                       const BackgroundForm& theta,
                                       const std::vector<ScalarField>& probes,
                                       double t, double stat_tol,
                                       double concavity_tol) {
  const double beta = solution.beta;
  // The centred-difference error grows like (tβ)², so the default step shrinks with β.
  if (!(t > 0.0)) t = 1e-3 / beta;
  const ScalarField big_u = solution.u + (-solution.u.max());
  const double g0 = g_beta(big_u, theta, mu0, beta);
  StationarityReport rep{{}, 0.0, -INFINITY, stat_tol, concavity_tol, true};
  for (const ScalarField& v : probes) {
    const double gp = g_beta(big_u + t * v, theta, mu0, beta);
    const double gm = g_beta(big_u + (-t) * v, theta, mu0, beta);
    ProbeResult p{(gp - gm) / (2.0 * t), gp - 2.0 * g0 + gm};
    rep.max_abs_derivative = std::max(rep.max_abs_derivative,
                                      std::fabs(p.derivative));
    rep.max_second_difference =
        std::max(rep.max_second_difference, p.second_difference);
    rep.probes.push_back(p);
  }
  rep.holds = rep.max_abs_derivative <= stat_tol &&
              rep.max_second_difference <= concavity_tol;
  return rep;
}

PrimitiveReport check_energy_primitive(const ScalarField& u,
                                       const BackgroundForm& theta,
                                       const std::vector<ScalarField>& probes,
                                       double t, double tol) {
  const ScalarField ma = ma_density(theta, u);
  PrimitiveReport rep{{}, 0.0, tol, true};
  for (const ScalarField& v : probes) {
    const double fd =
        (energy(u + t * v, theta) - energy(u + (-t) * v, theta)) / (2.0 * t);
    const double pairing = inner(v, ma);
    const double rel =
        std::fabs(fd - pairing) / std::max(std::fabs(pairing), 1e-300);
    rep.rel_errors.push_back(rel);
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
  }
  rep.holds = rep.max_rel_error <= tol;
  return rep;
}

double contact_set_entropy(const BackgroundForm& theta,
                           const EnvelopeSolution& sol,
                           const VolumeDensity& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < sol.u.size(); ++k) {
    const double f = theta.density[k];
    if (sol.contact[k] && f > 0.0) s += std::log(f / g.density[k]) * f;
  }
  return s * sol.u.grid().cell_area();
}

std::vector<ScalarField> random_probes(const TorusGrid& grid, int count,
                                       unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    ScalarField v(grid);
    for (double& x : v.values()) x = unit(rng);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mazt
