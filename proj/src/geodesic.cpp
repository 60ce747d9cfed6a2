#include "mazt/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "mazt/errors.hpp"
#include "mazt/functionals.hpp"

namespace mazt {

namespace {

std::string num_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require_lambda_grid(const std::vector<double>& lambdas, double c) {
  if (lambdas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "lambda grid is empty");
  }
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (lambdas[k] < 0.0 || lambdas[k] > c) {
      throw Error(ErrorCode::InvalidArgument,
                  "lambda=" + num_text(lambdas[k]) + " outside [0, c]");
    }
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "lambdas must increase strictly");
    }
  }
}

}  // namespace

std::vector<double> uniform_lambdas(double c, int count) {
  if (count < 1) {
    throw Error(ErrorCode::InvalidArgument, "lambda count must be >= 1");
  }
  if (count == 1) return {c};
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(c * k / (count - 1));
  return out;
}

PsiFamily build_psi_family(const BackgroundForm& omega, const DivisorData& z,
                           double c, std::vector<double> lambdas,
                           const RayOptions& opts) {
  if (!(c < omega.volume / z.total_multiplicity)) {
    throw Error(ErrorCode::SeshadriViolation, "c must be below V/m");
  }
  require_lambda_grid(lambdas, c);
  PsiFamily fam{c, lambdas, {}, {}, -INFINITY, -INFINITY};
  const ScalarField* init = nullptr;
  std::vector<EnvelopeSolution> sols;
  sols.reserve(lambdas.size());
  for (double lambda : lambdas) {
    DivisorEnvelope env = [&] {
      try {
        return envelope_divisor(omega, z, lambda, opts.envelope, init);
      } catch (const Error& e) {
        throw Error(e.code(), "lambda=" + num_text(lambda) + ": " + e.what());
      }
    }();
    fam.mus.push_back(lambda - c);
    fam.max_psi = std::max(fam.max_psi, env.phi.max());
    fam.psi.push_back(std::move(env.phi));
    sols.push_back(std::move(env.solution));
    init = &sols.back().u;
  }
  const std::size_t kn = fam.psi.size();
  for (std::size_t k = 1; k + 1 < kn; ++k) {
    const double dl = fam.mus[k] - fam.mus[k - 1];
    const double dr = fam.mus[k + 1] - fam.mus[k];
    const double half = 0.5 * (dl + dr);
    for (std::size_t x = 0; x < fam.psi[k].size(); ++x) {
      const double sl = (fam.psi[k][x] - fam.psi[k - 1][x]) / dl;
      const double sr = (fam.psi[k + 1][x] - fam.psi[k][x]) / dr;
      fam.max_second_difference =
          std::max(fam.max_second_difference, (sr - sl) * half);
    }
  }
  if (kn < 3) fam.max_second_difference = 0.0;
  if (fam.max_second_difference > opts.conc_tol) {
    throw Error(ErrorCode::ConcavityViolation,
                "psi second difference " +
                    num_text(fam.max_second_difference) +
                    " exceeds tolerance; refine the lambda grid or the mesh");
  }
  return fam;
}

std::vector<double> default_times() {
  std::vector<double> ts;
  for (int k = 0; k <= 8; ++k) ts.push_back(0.25 * k);
  for (double t = 4.0; t <= 64.0; t *= 2.0) ts.push_back(t);
  return ts;
}

Ray legendre_ray(const PsiFamily& family, const std::vector<double>& ts) {
  if (family.psi.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty psi family");
  }
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (!(ts[k] > ts[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "times must increase strictly");
    }
  }
  const TorusGrid& grid = family.psi.front().grid();
  const std::size_t kn = family.psi.size();
  Ray ray{ts, {}, {}};
  for (double t : ts) {
    ScalarField phi(grid);
    std::vector<int> arg(grid.size());
    for (std::size_t x = 0; x < grid.size(); ++x) {
      int best = 0;
      double val = family.psi[0][x] + family.mus[0] * t;
      // Ties go to the larger μ so the recorded argmax is well defined.
      for (std::size_t k = 1; k < kn; ++k) {
        const double v = family.psi[k][x] + family.mus[k] * t;
        if (v >= val) {
          val = v;
          best = static_cast<int>(k);
        }
      }
      phi[x] = val;
      arg[x] = best;
    }
    ray.phi.push_back(std::move(phi));
    ray.argmax.push_back(std::move(arg));
  }
  return ray;
}

std::vector<ScalarField> double_legendre(const PsiFamily& family) {
  const std::size_t kn = family.psi.size();
  if (kn == 0) throw Error(ErrorCode::InvalidArgument, "empty psi family");
  const TorusGrid& grid = family.psi.front().grid();
  const std::vector<double>& mu = family.mus;
  std::vector<ScalarField> out(kn, ScalarField(grid));
  std::vector<double> kink_t, kink_val;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    auto psi = [&](std::size_t k) { return family.psi[k][x]; };
    // Walk the breakpoints of t ↦ max_k ψ_k + μ_k t from t = -∞ upwards.
    kink_t.clear();
    kink_val.clear();
    std::size_t i = 0;
    while (i + 1 < kn) {
      double best_t = INFINITY;
      std::size_t best_j = kn;
      for (std::size_t j = i + 1; j < kn; ++j) {
        const double tj = (psi(i) - psi(j)) / (mu[j] - mu[i]);
        if (tj <= best_t) {
          best_t = tj;
          best_j = j;
        }
      }
      kink_t.push_back(best_t);
      kink_val.push_back(psi(i) + mu[i] * best_t);
      i = best_j;
    }
    for (std::size_t k = 0; k < kn; ++k) {
      double v = INFINITY;
      if (k == 0) v = psi(0);
      if (k == kn - 1) v = std::min(v, psi(kn - 1));
      for (std::size_t q = 0; q < kink_t.size(); ++q) {
        v = std::min(v, kink_val[q] - mu[k] * kink_t[q]);
      }
      out[k][x] = v;
    }
  }
  return out;
}

std::vector<double> upper_concave_hull(const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> hull;
  for (std::size_t k = 0; k < n; ++k) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      // Drop b when it lies on or below the chord from a to k.
      const double cross = (xs[b] - xs[a]) * (ys[k] - ys[a]) -
                           (ys[b] - ys[a]) * (xs[k] - xs[a]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }
  std::vector<double> out(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (seg + 1 < hull.size() && hull[seg + 1] < k) ++seg;
    if (seg + 1 >= hull.size() || hull[seg] == k) {
      out[k] = ys[hull[seg]];
      continue;
    }
    const std::size_t a = hull[seg], b = hull[seg + 1];
    const double w = (xs[k] - xs[a]) / (xs[b] - xs[a]);
    out[k] = (1.0 - w) * ys[a] + w * ys[b];
  }
  return out;
}

RayShapeReport ray_shape(const BackgroundForm& omega, const Ray& ray) {
  RayShapeReport r{INFINITY, true, INFINITY};
  const std::size_t nt = ray.ts.size();
  for (std::size_t k = 1; k + 1 < nt; ++k) {
    const double dl = ray.ts[k] - ray.ts[k - 1];
    const double dr = ray.ts[k + 1] - ray.ts[k];
    for (std::size_t x = 0; x < ray.phi[k].size(); ++x) {
      const double sl = (ray.phi[k][x] - ray.phi[k - 1][x]) / dl;
      const double sr = (ray.phi[k + 1][x] - ray.phi[k][x]) / dr;
      r.min_convexity = std::min(r.min_convexity, sr - sl);
    }
  }
  if (nt < 3) r.min_convexity = 0.0;
  for (std::size_t k = 1; k < nt; ++k) {
    for (std::size_t x = 0; x < ray.argmax[k].size(); ++x) {
      if (ray.argmax[k][x] < ray.argmax[k - 1][x]) r.argmax_monotone = false;
    }
  }
  for (const ScalarField& phi : ray.phi) {
    r.min_psh_density =
        std::min(r.min_psh_density, ma_density(omega, phi).min());
  }
  return r;
}

std::vector<double> trapezoid_weights(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 1) return {1.0};
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double half = 0.5 * (xs[k + 1] - xs[k]);
    w[k] += half;
    w[k + 1] += half;
  }
  return w;
}

Subgeodesic subgeodesic(const BackgroundForm& omega, const DivisorData& z,
                        double c, double beta, std::vector<double> lambdas,
                        std::vector<double> ts, const VolumeDensity& g,
                        const RayOptions& opts) {
  if (!(beta > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta must exceed 1");
  }
  if (!(c < omega.volume / z.total_multiplicity)) {
    throw Error(ErrorCode::SeshadriViolation, "c must be below V/m");
  }
  require_lambda_grid(lambdas, c);
  const TorusGrid& grid = omega.grid();
  Subgeodesic sub{beta, {}, trapezoid_weights(lambdas), ts, {}, 0};
  std::optional<ScalarField> prev;
  for (double lambda : lambdas) {
    BetaSolution s = [&] {
      try {
        return solve_beta_divisor(omega, z, lambda, beta, g, opts.solve,
                                  prev ? &*prev : nullptr);
      } catch (const Error& e) {
        throw Error(e.code(), "beta=" + num_text(beta) +
                                  " lambda=" + num_text(lambda) + ": " +
                                  e.what());
      }
    }();
    sub.underflow_nodes += s.underflow_nodes;
    prev = s.u;
    sub.phi_lambda.push_back(s.u + lambda * z.log_norm);
  }
  const std::size_t kn = lambdas.size();
  std::vector<double> logw(kn), a(kn);
  for (std::size_t k = 0; k < kn; ++k) logw[k] = std::log(sub.weights[k]);
  for (double t : ts) {
    ScalarField phi(grid);
    for (std::size_t x = 0; x < grid.size(); ++x) {
      double top = -INFINITY;
      for (std::size_t k = 0; k < kn; ++k) {
        a[k] = beta * ((lambdas[k] - c) * t + sub.phi_lambda[k][x]) + logw[k];
        top = std::max(top, a[k]);
      }
      double s = 0.0;
      for (std::size_t k = 0; k < kn; ++k) s += std::exp(a[k] - top);
      phi[x] = (top + std::log(s)) / beta;
    }
    sub.phi.push_back(std::move(phi));
  }
  return sub;
}

DeviationReport ray_deviation(const Subgeodesic& sub, const Ray& ray) {
  if (sub.ts != ray.ts) {
    throw Error(ErrorCode::InvalidArgument,
                "subgeodesic and ray use different time grids");
  }
  DeviationReport r{{}, 0.0, 0.0};
  for (std::size_t k = 0; k < ray.ts.size(); ++k) {
    const double d = (sub.phi[k] - ray.phi[k]).sup_norm();
    r.per_t.push_back(d);
    r.sup_dev = std::max(r.sup_dev, d);
  }
  if (r.per_t.size() >= 2) {
    r.tail_change = std::fabs(r.per_t.back() - r.per_t[r.per_t.size() - 2]);
  }
  return r;
}

double paper_energy_slope(double volume, int multiplicity, double c) {
  const int n = 1000;
  const double h = c / n;
  auto f = [&](double l) { return (l - c) * (volume - l * multiplicity); };
  double s = f(0.0) + f(c);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

EnergySlopeReport energy_slope_check(const BackgroundForm& omega,
                                     const DivisorData& z,
                                     const PsiFamily& family, const Ray& ray,
                                     double slope_tol, double window_t) {
  if (ray.ts.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "energy slope needs 3 times");
  }
  EnergySlopeReport r{};
  r.ts = ray.ts;
  for (const ScalarField& phi : ray.phi) r.energies.push_back(energy(phi, omega));
  r.window_t = window_t > 0.0 ? window_t : -0.5 * z.log_norm.min();

  std::vector<double> xs, ys;
  double tail_lo = INFINITY, tail_hi = -INFINITY;
  for (std::size_t k = 0; k < r.ts.size(); ++k) {
    if (r.ts[k] <= r.window_t) {
      xs.push_back(r.ts[k]);
      ys.push_back(r.energies[k]);
    } else {
      tail_lo = std::min(tail_lo, r.energies[k]);
      tail_hi = std::max(tail_hi, r.energies[k]);
    }
  }
  r.window_points = xs.size();
  if (xs.size() < 3) {
    throw Error(ErrorCode::InvalidArgument,
                "fewer than 3 times inside the slope window");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  r.slope_measured = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.intercept = (sy - r.slope_measured * sx) / n;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    r.affine_dev = std::max(
        r.affine_dev, std::fabs(ys[k] - r.intercept - r.slope_measured * xs[k]));
  }
  r.slope_paper =
      paper_energy_slope(omega.volume, z.total_multiplicity, family.c);
  r.slope_dh = -0.5 * z.total_multiplicity * family.c * family.c;
  r.affine_tol = 1e-4 * std::fabs(r.slope_paper) * ray.ts.back();
  r.slope_rel_error =
      std::fabs(r.slope_measured - r.slope_paper) / std::fabs(r.slope_paper);
  r.tail_spread = tail_hi > tail_lo ? tail_hi - tail_lo : 0.0;
  r.affine = r.affine_dev <= r.affine_tol;
  r.slope_ok = r.slope_rel_error <= slope_tol;
  return r;
}

}  // namespace mazt
