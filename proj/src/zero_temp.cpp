#include "mazt/zero_temp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "mazt/errors.hpp"
#include "mazt/functionals.hpp"
#include "mazt/parallel.hpp"

namespace mazt {

namespace {

std::string beta_text(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

BetaSolution solve_at(const BackgroundForm& theta, const VolumeDensity& g,
                      double beta, const SolveOptions& opts,
                      const ScalarField* initial) {
  try {
    return solve_beta(theta, g, beta, opts, initial);
  } catch (const Error& e) {
    throw Error(e.code(), "beta=" + beta_text(beta) + ": " + e.what());
  }
}

// Least-squares slope and intercept of y against x.
std::pair<double, double> line_fit(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace

std::vector<double> default_betas() {
  std::vector<double> b;
  for (double x = 8.0; x <= 1024.0; x *= 2.0) b.push_back(x);
  return b;
}

SweepReport sweep_beta(const BackgroundForm& theta, const VolumeDensity& g,
                       std::vector<double> betas, const SweepOptions& opts) {
  if (!theta.is_kahler()) {
    throw Error(ErrorCode::NonKahler, "beta sweep needs V > 0");
  }
  if (betas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "beta list is empty");
  }
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (!(betas[k] > 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "beta must exceed 1");
    }
    if (k > 0 && !(betas[k] > betas[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "betas must increase strictly");
    }
  }

  SweepReport rep{betas, {}, {}, {}, {}, {}, {},
                  envelope_theta(theta, opts.envelope), 0.0, {}, 0.0, 0.0};
  const std::size_t nb = betas.size();
  rep.solutions.reserve(nb);
  if (opts.continuation) {
    for (std::size_t k = 0; k < nb; ++k) {
      const ScalarField* init = k > 0 ? &rep.solutions.back().u : nullptr;
      rep.solutions.push_back(solve_at(theta, g, betas[k], opts.solve, init));
    }
  } else {
    std::vector<std::optional<BetaSolution>> slots(nb);
    parallel_for(nb, opts.threads, [&](std::size_t k) {
      slots[k] = solve_at(theta, g, betas[k], opts.solve, nullptr);
    });
    for (auto& s : slots) rep.solutions.push_back(std::move(*s));
  }

  const ScalarField& ut = rep.envelope.u;
  rep.energy_theta = energy(ut, theta);
  for (const BetaSolution& s : rep.solutions) {
    const ScalarField d = s.u - ut;
    rep.sup_err.push_back(d.sup_norm());
    rep.grad_err.push_back(grad_sup_norm(d));
    rep.energy_gap.push_back(std::fabs(energy(s.u, theta) - rep.energy_theta));
    rep.max_excess.push_back(d.max());
    rep.sup_abs.push_back(s.u.sup_norm());
  }
  rep.rate = fit_rate(rep.betas, rep.sup_err);

  rep.refined_c = -INFINITY;
  for (std::size_t k = 0; k < ut.size(); ++k) {
    if (!rep.envelope.contact[k]) continue;
    const double f = theta.density[k];
    if (f > 0.0) {
      rep.refined_c = std::max(rep.refined_c, std::log(f / g.density[k]));
    }
  }
  rep.refined_c_normalised = rep.refined_c - std::log(theta.volume);
  return rep;
}

RateFit fit_rate(const std::vector<double>& betas,
                 const std::vector<double>& errs) {
  const std::size_t n = betas.size();
  const std::size_t start = n / 2;
  std::vector<double> x, y;
  for (std::size_t k = start; k < n; ++k) {
    if (errs[k] <= 0.0) continue;
    x.push_back(std::log(betas[k]));
    y.push_back(std::log(errs[k]));
  }
  if (x.size() < 2) return {0.0, 0.0};
  const auto [slope, icpt] = line_fit(x, y);
  return {std::exp(icpt), -slope};
}

bool strictly_decreasing(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1] - slack)) return false;
  }
  return true;
}

bool non_increasing(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] + slack) return false;
  }
  return true;
}

RefinedBoundVerdict refined_bound_check(const SweepReport& report,
                                        double grid_slack) {
  if (report.envelope.contact_count() == 0) {
    throw Error(ErrorCode::EmptyRegion, "contact set is empty");
  }
  RefinedBoundVerdict v{report.refined_c, grid_slack, {}, INFINITY, true};
  for (std::size_t k = 0; k < report.betas.size(); ++k) {
    const double m =
        report.refined_c / report.betas[k] + grid_slack - report.max_excess[k];
    v.margins.push_back(m);
    v.worst_margin = std::min(v.worst_margin, m);
  }
  v.pass = v.worst_margin >= 0.0;
  return v;
}

SlackCalibration calibrate_grid_slack(
    const std::function<double(double, double)>& f_theta,
    const std::function<double(double, double)>& g, std::vector<double> betas,
    std::vector<int> ns, const SweepOptions& opts) {
  if (ns.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "calibration needs two grids");
  }
  SlackCalibration cal{ns, std::vector<double>(ns.size()), 0.0, 0.0, false};
  SweepOptions inner = opts;
  inner.threads = 1;
  parallel_for(ns.size(), opts.threads, [&](std::size_t k) {
    const TorusGrid grid(ns[k]);
    const BackgroundForm theta = make_background(grid, f_theta, true);
    const VolumeDensity vol = make_volume(ScalarField::sample(grid, g));
    const SweepReport rep = sweep_beta(theta, vol, betas, inner);
    double worst = -INFINITY;
    for (std::size_t b = 0; b < rep.betas.size(); ++b) {
      worst = std::max(worst,
                       rep.max_excess[b] - rep.refined_c / rep.betas[b]);
    }
    cal.violations[k] = worst;
  });
  std::vector<double> hs;
  for (int n : ns) hs.push_back(1.0 / n);
  const auto [slope, icpt] = line_fit(hs, cal.violations);
  cal.c1 = slope;
  cal.v0 = icpt;
  cal.extrapolated_ok = cal.v0 <= 0.0;
  return cal;
}

DecayVerdict ma_decay_check(const SweepReport& report, const VolumeDensity& g,
                            double delta, double rate_tol) {
  const ScalarField& ut = report.envelope.u;
  std::vector<std::size_t> region;
  for (std::size_t k = 0; k < ut.size(); ++k) {
    if (ut[k] <= -delta) region.push_back(k);
  }
  if (region.empty()) {
    throw Error(ErrorCode::EmptyRegion,
                "no node with u_theta <= -" + std::to_string(delta));
  }
  DecayVerdict v{delta, region.size(), {}, {}, 0.0, 0.0, true, false};
  const double gmax = g.density.max();
  std::vector<double> logs;
  for (std::size_t b = 0; b < report.betas.size(); ++b) {
    const double beta = report.betas[b];
    const ScalarField& u = report.solutions[b].u;
    double best = 0.0;
    for (std::size_t k : region) {
      best = std::max(best, std::exp(beta * u[k]) * g.density[k]);
    }
    v.sup_density.push_back(best);
    const double bound =
        gmax * std::exp(report.refined_c) * std::exp(-beta * delta);
    v.bound.push_back(bound);
    if (best > bound) v.bound_holds = false;
    logs.push_back(std::log(best));
  }
  if (report.betas.size() >= 2) {
    v.fitted_rate = -line_fit(report.betas, logs).first;
  }
  v.rate_rel_error = std::fabs(v.fitted_rate - delta) / delta;
  v.rate_ok = v.rate_rel_error <= rate_tol;
  return v;
}

PositiveCaseReport positive_case(const SweepReport& report,
                                 const BackgroundForm& theta,
                                 const VolumeDensity& g) {
  if (!(theta.density.min() > 0.0)) {
    throw Error(ErrorCode::WrongRegime, "positive case needs f_theta > 0");
  }
  PositiveCaseReport p{report.betas, {}, false};
  for (std::size_t b = 0; b < report.betas.size(); ++b) {
    const ScalarField& u = report.solutions[b].u;
    double worst = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double lead = std::log(theta.density[k] / g.density[k]);
      worst = std::max(worst, std::fabs(report.betas[b] * u[k] - lead));
    }
    p.expansion_err.push_back(worst);
  }
  p.decreasing = strictly_decreasing(p.expansion_err);
  return p;
}

}  // namespace mazt
