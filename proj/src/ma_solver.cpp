#include "mazt/ma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mazt/errors.hpp"

namespace mazt {

namespace {

struct RhsEval {
  ScalarField value;  // e^{a} g
  std::size_t capped = 0;
  std::size_t underflow = 0;
};

// e^{βu + w} g with the exponent clamped to [-cap, cap]; below -cap the value
// is exactly 0.
void eval_rhs(const ScalarField& u, const ScalarField& g, double beta,
              const ScalarField* w, double cap, RhsEval& out) {
  out.capped = out.underflow = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double a = beta * u[k] + (w ? (*w)[k] : 0.0);
    if (a > cap) {
      a = cap;
      ++out.capped;
    }
    if (a < -cap) {
      out.value[k] = 0.0;
      ++out.underflow;
      continue;
    }
    out.value[k] = std::exp(a) * g[k];
  }
}

double sup_norm_or_inf(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) {
    if (!std::isfinite(v)) return INFINITY;
    s = std::max(s, std::fabs(v));
  }
  return s;
}

// F = f + κΔu - rhs.
void residual_into(const ScalarField& f, const ScalarField& u,
                   const ScalarField& rhs, ScalarField& lap,
                   ScalarField& out) {
  laplacian_into(u, lap);
  for (std::size_t k = 0; k < u.size(); ++k) {
    out[k] = f[k] + kKappa * lap[k] - rhs[k];
  }
}

// PCG for (-κΔ + diag(d)) x = b with preconditioner (σ - κΔ)^{-1}.
int pcg(const SpectralSolver& spectral, const ScalarField& d,
        const ScalarField& b, double rel_tol, int max_iters, ScalarField& x) {
  const TorusGrid& grid = b.grid();
  double sigma = 0.0;
  for (double v : d.values()) sigma += v;
  sigma /= static_cast<double>(d.size());
  sigma = std::max(sigma, 1e-12);

  auto apply = [&](const ScalarField& p, ScalarField& out) {
    laplacian_into(p, out);
    for (std::size_t k = 0; k < p.size(); ++k) {
      out[k] = -kKappa * out[k] + d[k] * p[k];
    }
  };
  auto dot = [](const ScalarField& a, const ScalarField& c) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * c[k];
    return s;
  };

  x = ScalarField(grid);
  ScalarField r = b;
  ScalarField z(grid), p(grid), ap(grid);
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) return 0;
  spectral.shifted_inverse(r, kKappa, sigma, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iters; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) return it;
    const double alpha = rz / pap;
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * b_norm) return it;
    spectral.shifted_inverse(r, kKappa, sigma, z);
    const double rz_new = dot(r, z);
    const double beta_cg = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = z[k] + beta_cg * p[k];
  }
  return max_iters;
}

std::string history_text(const std::vector<NewtonRecord>& h) {
  std::ostringstream os;
  os << "residual history:";
  for (const auto& r : h) os << ' ' << r.residual_sup;
  return os.str();
}

BetaSolution newton_solve(const ScalarField& f, const ScalarField& g,
                          double beta, const ScalarField* log_weight,
                          double volume, const SolveOptions& opts,
                          const ScalarField* initial) {
  if (!(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  }
  if (opts.newton_tol <= 0.0 || opts.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad solve options");
  }
  const TorusGrid& grid = f.grid();
  const SpectralSolver& spectral = spectral_solver_for(grid);

  ScalarField u = initial ? *initial
                          : ScalarField(grid, std::log(std::max(volume, 1e-12)) / beta);
  if (!(u.grid() == grid)) {
    throw Error(ErrorCode::InvalidArgument, "initial guess on a different grid");
  }

  RhsEval rhs{ScalarField(grid)};
  ScalarField lap(grid), res(grid), d(grid), delta(grid), trial(grid);
  RhsEval trial_rhs{ScalarField(grid)};
  ScalarField trial_res(grid);

  eval_rhs(u, g, beta, log_weight, opts.exponent_cap, rhs);
  residual_into(f, u, rhs.value, lap, res);
  double res_sup = sup_norm_or_inf(res);

  BetaSolution sol{u, beta, res_sup, 0, {}, rhs.capped, rhs.underflow};
  sol.history.push_back({0, res_sup, 0.0, 0});
  for (int it = 1; it <= opts.max_iters; ++it) {
    if (res_sup <= opts.newton_tol) break;
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = beta * rhs.value[k];
    const double eta =
        std::max(opts.linear_tol, std::min(1e-4, 1e-2 * res_sup));
    const int lin = pcg(spectral, d, res, eta, opts.max_linear_iters, delta);

    double step = 1.0;
    bool accepted = false;
    while (step >= opts.min_step) {
      for (std::size_t k = 0; k < u.size(); ++k) trial[k] = u[k] + step * delta[k];
      eval_rhs(trial, g, beta, log_weight, opts.exponent_cap, trial_rhs);
      residual_into(f, trial, trial_rhs.value, lap, trial_res);
      const double trial_sup = sup_norm_or_inf(trial_res);
      if (trial_sup < res_sup) {
        std::swap(u, trial);
        std::swap(rhs, trial_rhs);
        std::swap(res, trial_res);
        res_sup = trial_sup;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    sol.history.push_back({it, res_sup, accepted ? step : 0.0, lin});
    sol.iters = it;
    if (!accepted) {
      throw Error(ErrorCode::NoConvergence,
                  "line search failed at beta=" + std::to_string(beta) + "; " +
                      history_text(sol.history));
    }
  }
  if (!(res_sup <= opts.newton_tol)) {
    throw Error(ErrorCode::NoConvergence,
                "iteration budget exhausted at beta=" + std::to_string(beta) +
                    "; " + history_text(sol.history));
  }
  sol.u = std::move(u);
  sol.residual_sup = res_sup;
  sol.capped_nodes = rhs.capped;
  sol.underflow_nodes = rhs.underflow;
  return sol;
}

}  // namespace

BetaSolution solve_beta(const BackgroundForm& theta, const VolumeDensity& g,
                        double beta, const SolveOptions& opts,
                        const ScalarField* initial) {
  if (!theta.is_kahler()) {
    throw Error(ErrorCode::NonKahler, "solve_beta needs V > 0");
  }
  return newton_solve(theta.density, g.density, beta, nullptr, theta.volume,
                      opts, initial);
}

BetaSolution solve_beta_divisor(const BackgroundForm& omega,
                                const DivisorData& z, double lambda,
                                double beta, const VolumeDensity& g,
                                const SolveOptions& opts,
                                const ScalarField* initial) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  }
  const double twisted = omega.volume - lambda * z.total_multiplicity;
  if (!(twisted > 0.0)) {
    throw Error(ErrorCode::SeshadriViolation,
                "V - lambda*m = " + std::to_string(twisted) + " <= 0");
  }
  const BackgroundForm theta = twist(omega, z, lambda, false);
  if (lambda == 0.0) {
    return newton_solve(theta.density, g.density, beta, nullptr, theta.volume,
                        opts, initial);
  }
  const ScalarField w = (lambda * beta) * z.log_norm;
  return newton_solve(theta.density, g.density, beta, &w, theta.volume, opts,
                      initial);
}

ScalarField ma_density(const BackgroundForm& theta, const ScalarField& u) {
  ScalarField out = laplacian(u);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = theta.density[k] + kKappa * out[k];
  }
  return out;
}

ScalarField ma_residual(const BackgroundForm& theta, const VolumeDensity& g,
                        double beta, const ScalarField& u,
                        const ScalarField* log_weight) {
  ScalarField out = ma_density(theta, u);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = beta * u[k] + (log_weight ? (*log_weight)[k] : 0.0);
    out[k] -= std::exp(a) * g.density[k];
  }
  return out;
}

ComparisonVerdict check_comparison(const BackgroundForm& theta,
                                   const VolumeDensity& g, double beta,
                                   const ScalarField& u, const ScalarField& v,
                                   double residual_tol,
                                   double comparison_tol) {
  if (!u.all_finite() || !v.all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "comparison fields must be finite");
  }
  const ScalarField ru = ma_residual(theta, g, beta, u);
  const ScalarField rv = ma_residual(theta, g, beta, v);
  if (rv.min() < -residual_tol) {
    throw Error(ErrorCode::NotClassifiable,
                "v is not a supersolution: min residual " +
                    std::to_string(rv.min()));
  }
  if (ru.max() > residual_tol) {
    throw Error(ErrorCode::NotClassifiable,
                "u is not a subsolution: max residual " +
                    std::to_string(ru.max()));
  }
  ComparisonVerdict verdict{true, 0, -INFINITY};
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double gap = v[k] - u[k];
    verdict.worst_gap = std::max(verdict.worst_gap, gap);
    if (gap > comparison_tol) ++verdict.violations;
  }
  verdict.holds = verdict.violations == 0;
  return verdict;
}

LaplacianBoundReport laplacian_bound_report(const BackgroundForm& theta,
                                            const BetaSolution& solution,
                                            const BackgroundForm& reference,
                                            double tol) {
  const double beta = solution.beta;
  if (!(beta > 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "Laplacian bound needs beta > 1 (the estimate degenerates at 1)");
  }
  if (!(reference.density.min() > 0.0)) {
    throw Error(ErrorCode::BadReference,
                "reference form density must be strictly positive");
  }
  if (std::fabs(reference.volume - theta.volume) >
      1e-8 * std::max(1.0, std::fabs(theta.volume))) {
    throw Error(ErrorCode::BadReference,
                "reference form is not in the class of theta");
  }
  ScalarField rhs = reference.density - theta.density;
  rhs += -mean(rhs);
  rhs *= 1.0 / kKappa;
  const ScalarField v = poisson_solve(rhs, 1e-8);

  const ScalarField ma = ma_density(theta, solution.u);
  LaplacianBoundReport rep{};
  rep.beta = beta;
  rep.prefactor = 1.0 / (1.0 - 1.0 / beta);
  rep.sup_trace_theta = -INFINITY;
  rep.max_trace_ratio = -INFINITY;
  rep.min_trace_ratio = INFINITY;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < ma.size(); ++k) {
    const double w = reference.density[k];
    rep.sup_trace_theta = std::max(rep.sup_trace_theta, theta.density[k] / w);
    const double tr = ma[k] / w;
    rep.max_trace_ratio = std::max(rep.max_trace_ratio, tr);
    rep.min_trace_ratio = std::min(rep.min_trace_ratio, tr);
    const double diff = solution.u[k] - v[k];
    lo = std::min(lo, diff);
    hi = std::max(hi, diff);
  }
  rep.osc_u_minus_v = hi - lo;
  rep.bound = rep.prefactor * rep.sup_trace_theta;
  rep.slack = rep.bound - rep.max_trace_ratio;
  rep.holds = rep.slack >= -tol;
  return rep;
}

}  // namespace mazt
