#pragma once

#include <functional>
#include <vector>

#include "mazt/envelope.hpp"
#include "mazt/forms.hpp"
#include "mazt/ma_solver.hpp"

namespace mazt {

struct SweepOptions {
  SolveOptions solve;
  EnvelopeOptions envelope;
  bool continuation = true;  // warm start each β from the previous one
  int threads = 1;           // only used without continuation
};

/// Powers of two from 8 to 1024.
std::vector<double> default_betas();

struct RateFit {
  double c;  // err ≈ c·β^{-p}
  double p;
};

struct SweepReport {
  std::vector<double> betas;
  std::vector<double> sup_err;      // ‖u_β - u_θ‖_∞
  std::vector<double> grad_err;     // grad_sup_norm(u_β - u_θ)
  std::vector<double> energy_gap;   // |E(u_β) - E(u_θ)|
  std::vector<double> max_excess;   // max(u_β - u_θ)
  std::vector<double> sup_abs;      // sup |u_β|
  std::vector<BetaSolution> solutions;
  EnvelopeSolution envelope;
  double energy_theta;
  RateFit rate;
  double refined_c;             // sup_D log(f_θ/g)
  double refined_c_normalised;  // sup_D log(f_θ/(V g))
};

/// Errors propagate as mazt::Error with the offending β in the message.
SweepReport sweep_beta(const BackgroundForm& theta, const VolumeDensity& g,
                       std::vector<double> betas,
                       const SweepOptions& opts = {});

/// Least-squares line through (log β, log err) over the last half of the series.
RateFit fit_rate(const std::vector<double>& betas,
                 const std::vector<double>& errs);

/// True when every entry is below its predecessor by more than `slack`.
bool strictly_decreasing(const std::vector<double>& v, double slack = 0.0);
/// True when no entry exceeds its predecessor by more than `slack`.
bool non_increasing(const std::vector<double>& v, double slack = 0.0);

struct RefinedBoundVerdict {
  double c_paper;
  double grid_slack;
  std::vector<double> margins;  // c_paper/β + grid_slack - max(u_β - u_θ)
  double worst_margin;
  bool pass;
};

RefinedBoundVerdict refined_bound_check(const SweepReport& report,
                                        double grid_slack = 0.0);

/// Violation v(N) = max_β [max(u_β - u_θ) - C/β] measured on several grids and
/// fitted as v0 + c1·h. grid_slack(h) = max(c1, 0)·h.
struct SlackCalibration {
  std::vector<int> ns;
  std::vector<double> violations;
  double v0;
  double c1;
  bool extrapolated_ok;  // v0 <= 0
  double slack_at(double h) const { return c1 > 0.0 ? c1 * h : 0.0; }
};

SlackCalibration calibrate_grid_slack(
    const std::function<double(double, double)>& f_theta,
    const std::function<double(double, double)>& g, std::vector<double> betas,
    std::vector<int> ns, const SweepOptions& opts = {});

struct DecayVerdict {
  double delta;
  std::size_t region_nodes;          // |K_δ|
  std::vector<double> sup_density;   // sup_{K_δ} e^{βu_β} g
  std::vector<double> bound;         // max(g)·e^{C}·e^{-βδ}
  double fitted_rate;                // -slope of log sup_density against β
  double rate_rel_error;             // |fitted_rate - δ| / δ
  bool bound_holds;
  bool rate_ok;
};

/// Throws EmptyRegion when K_δ = {u_θ <= -δ} has no node.
DecayVerdict ma_decay_check(const SweepReport& report, const VolumeDensity& g,
                            double delta, double rate_tol = 0.15);

struct PositiveCaseReport {
  std::vector<double> betas;
  std::vector<double> expansion_err;  // sup |β u_β - log(f_θ/g)|
  bool decreasing;
};

/// Requires f_θ > 0 everywhere.
PositiveCaseReport positive_case(const SweepReport& report,
                                 const BackgroundForm& theta,
                                 const VolumeDensity& g);

}  // namespace mazt
