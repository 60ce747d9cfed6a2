// One line per acceptance criterion. Tolerances are pinned here; the exit
// status is non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mazt/envelope.hpp"
#include "mazt/functionals.hpp"
#include "mazt/geodesic.hpp"
#include "mazt/hele_shaw.hpp"
#include "mazt/ma_solver.hpp"
#include "mazt/scenario.hpp"
#include "mazt/zero_temp.hpp"
#include "oracles.hpp"

using namespace mazt;

namespace {

constexpr double kPi = std::numbers::pi;

// Criterion 1
constexpr int kN = 256;
constexpr int kOracleN = 8192;
constexpr double kOracleTol = 1e-6;
constexpr double kCompTol = 1e-10;
constexpr double kOrthoTol = 1e-8;
// Criterion 2
constexpr double kRateLo = 0.8, kRateHi = 1.2;
constexpr double kGradDrop = 10.0;
// Criterion 4
constexpr double kExpansionTol = 0.05;
// Criterion 5
constexpr double kDeltaFrac = 0.1;
constexpr double kDecayTol = 0.15;
// Criterion 6
constexpr int kProbeCount = 20;
constexpr double kPrimitiveTol = 1e-6;
constexpr double kStationarityTol = 1e-6;
constexpr double kEntropyTol = 1e-6;
// Criterion 7
constexpr int kDivisorN = 128;
constexpr double kUniformFactor = 2.0;
// Criterion 8
constexpr double kAreaTol = 0.02;
constexpr double kNestingTol = 0.005;
// Criterion 9
constexpr int kRayN = 128;
constexpr double kRayC = 0.5;
constexpr int kRayLambdas = 33;
constexpr double kLegendreTol = 1e-9;
constexpr double kConvexityTol = 1e-12;
constexpr double kFlatTailTol = 1e-6;
constexpr double kSlopeTol = 0.02;
constexpr double kPaperSlope = -0.104167;
constexpr double kPaperSlopeDigits = 1e-6;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] criterion %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double cosine(double x) { return 1 + 2 * std::cos(2 * kPi * x); }
double positive(double x) { return 1 + 0.5 * std::cos(2 * kPi * x); }

double gap_to_1d(const ScalarField& u, const std::vector<double>& ref) {
  const int n = u.grid().n();
  const int ratio = static_cast<int>(ref.size()) / n;
  double gap = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gap = std::max(gap, std::fabs(u.at(i, j) - ref[i * ratio]));
  return gap;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const TorusGrid grid(kN);
  const BackgroundForm theta =
      make_background(grid, [](double x, double) { return cosine(x); }, true);
  const VolumeDensity g = make_volume(ScalarField(grid, 1.0));

  // 1. Envelope against the fine 1-D oracle.
  const EnvelopeSolution env = envelope_theta(theta);
  {
    const oracle::Envelope1d fine = oracle::envelope_1d(oracle::sample(kOracleN, cosine));
    const oracle::Envelope1d same = oracle::envelope_1d(oracle::sample(kN, cosine));
    const double gap = gap_to_1d(env.u, fine.u);
    const double same_gap = gap_to_1d(env.u, same.u);
    const LcpCheck lcp = check_lcp(theta, env);
    const double ortho = std::fabs(inner(env.u, ma_density(theta, env.u)));
    report(1, "envelope",
           gap <= kOracleTol && lcp.max_complementarity <= kCompTol && ortho <= kOrthoTol,
           fmt("sup|u - oracle_%d| = %.3g (tol %.0e; same-grid oracle %.3g), "
               "complementarity %.3g (tol %.0e), |int u MA(u)| = %.3g (tol %.0e)",
               kOracleN, gap, kOracleTol, same_gap, lcp.max_complementarity, kCompTol,
               ortho, kOrthoTol));
  }

  // 2. Zero-temperature limit.
  const SweepReport sweep = sweep_beta(theta, g, default_betas());
  {
    const bool mono = strictly_decreasing(sweep.sup_err);
    const double drop = sweep.grad_err.front() / sweep.grad_err.back();
    const bool rate = sweep.rate.p >= kRateLo && sweep.rate.p <= kRateHi;
    report(2, "zero-temperature limit", mono && rate && drop >= kGradDrop,
           fmt("sup_err %.4g -> %.4g strictly decreasing=%s, p_fit = %.3f (in [%.1f, %.1f]), "
               "grad_err drop %.1fx (need %.0fx)",
               sweep.sup_err.front(), sweep.sup_err.back(), mono ? "yes" : "no", sweep.rate.p,
               kRateLo, kRateHi, drop, kGradDrop));
  }

  // 3. Refined upper bound with grid slack calibrated over N = 64, 128, 256.
  {
    const SlackCalibration cal = calibrate_grid_slack(
        [](double x, double) { return cosine(x); }, [](double, double) { return 1.0; },
        default_betas(), {64, 128, 256});
    const double slack = cal.slack_at(grid.h());
    // C_paper = sup_D log(f_θ/(V g)), evaluated independently of the library.
    double c_paper = -INFINITY;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (env.contact[k]) {
        c_paper = std::max(c_paper, std::log(theta.density[k] / (theta.volume * g.density[k])));
      }
    }
    double worst = INFINITY;
    for (std::size_t b = 0; b < sweep.betas.size(); ++b) {
      const double excess = (sweep.solutions[b].u - env.u).max();
      worst = std::min(worst, c_paper / sweep.betas[b] + slack - excess);
    }
    report(3, "refined upper bound", worst >= 0.0 && cal.v0 <= 0.0,
           fmt("C_paper = %.6f, grid_slack = %.3g, worst margin %.3g (need >= 0), "
               "extrapolated violation v0 = %.3g (need <= 0)",
               c_paper, slack, worst, cal.v0));
  }

  // 4. Positive case.
  {
    const BackgroundForm pos =
        make_background(grid, [](double x, double) { return positive(x); }, true);
    const SweepReport ps = sweep_beta(pos, g, default_betas());
    std::vector<double> errs;
    for (std::size_t b = 0; b < ps.betas.size(); ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k)
        e = std::max(e, std::fabs(ps.betas[b] * ps.solutions[b].u[k] -
                                  std::log(pos.density[k] / g.density[k])));
      errs.push_back(e);
    }
    const bool dec = strictly_decreasing(errs);
    report(4, "positive case", errs.back() <= kExpansionTol && dec,
           fmt("sup|beta u_beta - log(f/g)| at beta=1024: %.3g (tol %.2f), decreasing=%s",
               errs.back(), kExpansionTol, dec ? "yes" : "no"));
  }

  // 5. MA decay off the contact set.
  {
    const double delta = kDeltaFrac * env.u.sup_norm();
    const DecayVerdict v = ma_decay_check(sweep, g, delta, kDecayTol);
    report(5, "MA decay", v.rate_ok,
           fmt("delta = %.5f, fitted rate %.5f, relative error %.2f%% (tol %.0f%%), |K_delta| = %zu",
               delta, v.fitted_rate, 100 * v.rate_rel_error, 100 * kDecayTol, v.region_nodes));
  }

  // 6. Energy layer.
  {
    const PrimitiveReport prim = check_energy_primitive(
        env.u, theta, random_probes(grid, kProbeCount, 20261016), 1e-3, kPrimitiveTol);
    std::vector<ScalarField> probes = random_probes(grid, 3, 7);
    probes.push_back(ScalarField(grid, 1.0));
    probes.push_back(ScalarField::sample(grid, [](double x, double) { return std::cos(2 * kPi * x); }));
    double stat = 0.0;
    for (const BetaSolution& s : sweep.solutions)
      stat = std::max(stat, g_beta_stationarity(s, g, theta, probes, 0.0, kStationarityTol)
                                .max_abs_derivative);
    const double entropy = relative_entropy(ma_density(theta, env.u), g);
    // Closed form: MA(u_θ) = 1_D f_θ dA, so the entropy is ∫_D log(f_θ/g) f_θ.
    double closed = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (env.contact[k] && theta.density[k] > 0)
        closed += std::log(theta.density[k] / g.density[k]) * theta.density[k] * grid.cell_area();
    const double egap = std::fabs(entropy - closed);
    report(6, "energy layer",
           prim.max_rel_error <= kPrimitiveTol && stat <= kStationarityTol &&
               std::isfinite(entropy) && egap <= kEntropyTol,
           fmt("dE vs MA max rel error %.3g (tol %.0e), G_beta stationarity %.3g (tol %.0e), "
               "entropy %.6f vs contact integral %.6f, gap %.3g (tol %.0e)",
               prim.max_rel_error, kPrimitiveTol, stat, kStationarityTol, entropy, closed, egap,
               kEntropyTol));
  }

  // 7. Divisor sweep uniform in λ.
  {
    const TorusGrid dg(kDivisorN);
    const BackgroundForm omega = make_background(ScalarField(dg, 1.0), true);
    const DivisorData z = make_divisor(dg, {{kDivisorN / 2, kDivisorN / 2, 1}});
    const VolumeDensity dv = make_volume(ScalarField(dg, 1.0));
    const std::vector<double> lambdas = {0.0, 0.1, 0.2, 0.3, 0.4};
    const std::vector<double> betas = {64, 128, 256, 512};
    std::vector<std::vector<double>> err(betas.size(), std::vector<double>(lambdas.size()));
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const ScalarField ul = envelope_divisor(omega, z, lambdas[l]).solution.u;
      for (std::size_t b = 0; b < betas.size(); ++b)
        err[b][l] = (solve_beta_divisor(omega, z, lambdas[l], betas[b], dv).u - ul).sup_norm();
    }
    std::vector<double> sup_over;
    for (const auto& row : err) sup_over.push_back(*std::max_element(row.begin() + 1, row.end()));
    const auto& last = err.back();
    const double min_pos = *std::min_element(last.begin() + 1, last.end());
    const bool uniform = sup_over.back() <= kUniformFactor * min_pos;
    const bool dec = strictly_decreasing(sup_over);
    report(7, "divisor sweep", uniform && dec,
           fmt("beta=512: sup_lambda err %.4g vs min over lambda>0 %.4g (ratio %.2f, tol %.0f), "
               "lambda=0 err %.2g, sup_lambda err decreasing in beta=%s",
               sup_over.back(), min_pos, sup_over.back() / min_pos, kUniformFactor, last[0],
               dec ? "yes" : "no"));
  }

  // 8. Hele-Shaw area law and nesting.
  {
    const BackgroundForm omega = make_background(ScalarField(grid, 1.0), true);
    const DivisorData z = make_divisor(grid, {{kN / 2, kN / 2, 1}});
    const HeleShawFamily fam = run_family(omega, z, default_lambdas(omega.volume, 1));
    double worst = 0.0;
    for (const HeleShawMember& m : fam.members) worst = std::max(worst, std::fabs(m.area - m.lambda));
    const NestingReport ne = check_nesting(fam, kNestingTol);
    report(8, "Hele-Shaw area law", worst <= kAreaTol && ne.pass,
           fmt("max |area - lambda m| = %.4g over %zu lambdas (tol %.2f), "
               "nesting reclassification %.3g%% (tol %.1f%%)",
               worst, fam.members.size(), kAreaTol, 100 * ne.worst_fraction, 100 * kNestingTol));
  }

  // 9. Geodesic ray.
  {
    const TorusGrid rg(kRayN);
    const BackgroundForm omega = make_background(ScalarField(rg, 1.0), true);
    const DivisorData z = make_divisor(rg, {{kRayN / 2, kRayN / 2, 1}});
    const VolumeDensity rv = make_volume(ScalarField(rg, 1.0));
    const std::vector<double> lambdas = uniform_lambdas(kRayC, kRayLambdas);
    const PsiFamily fam = build_psi_family(omega, z, kRayC, lambdas);
    const std::vector<double> ts = default_times();
    const Ray ray = legendre_ray(fam, ts);

    const std::vector<ScalarField> back = double_legendre(fam);
    double leg = 0.0;
    std::vector<double> col(fam.mus.size());
    for (std::size_t x = 0; x < rg.size(); ++x) {
      for (std::size_t k = 0; k < col.size(); ++k) col[k] = fam.psi[k][x];
      const std::vector<double> hull = oracle::concave_hull_brute(fam.mus, col);
      for (std::size_t k = 0; k < col.size(); ++k) leg = std::max(leg, std::fabs(back[k][x] - hull[k]));
    }
    const RayShapeReport shape = ray_shape(omega, ray);
    std::vector<double> devs;
    double tail = 0.0;
    for (double beta : {32.0, 64.0, 128.0}) {
      const DeviationReport d = ray_deviation(subgeodesic(omega, z, kRayC, beta, lambdas, ts, rv), ray);
      devs.push_back(d.sup_dev);
      tail = std::max(tail, d.tail_change);
    }
    const bool dec = strictly_decreasing(devs);
    const EnergySlopeReport es = energy_slope_check(omega, z, fam, ray, kSlopeTol);
    const bool paper_value = std::fabs(es.slope_paper - kPaperSlope) <= kPaperSlopeDigits;
    report(9, "geodesic ray",
           leg <= kLegendreTol && shape.min_convexity >= -kConvexityTol && dec &&
               tail <= kFlatTailTol && es.slope_ok && es.affine && paper_value,
           fmt("double-Legendre err %.2g (tol %.0e), min convexity %.2g, sup_dev beta=32/64/128 "
               "%.4g/%.4g/%.4g decreasing=%s, tail %.2g (tol %.0e), slope measured %.6f vs "
               "paper %.6f (rel err %.1f%%, tol %.0f%%; first-variation value %.6f), "
               "affine dev %.3g (tol %.3g)",
               leg, kLegendreTol, shape.min_convexity, devs[0], devs[1], devs[2],
               dec ? "yes" : "no", tail, kFlatTailTol, es.slope_measured, es.slope_paper,
               100 * es.slope_rel_error, 100 * kSlopeTol, es.slope_dh, es.affine_dev,
               es.affine_tol));
  }

  // 10. Determinism of scenario outputs at a fixed thread count.
  {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "mazt_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::pair<ScenarioKind, std::string>> configs = {
        {ScenarioKind::SweepBeta,
         "[grid]\nN = 64\n[forms]\nf_theta = 1 + 2*cos(2*pi*x)\n[params]\ncontinuation = false\n"},
        {ScenarioKind::HeleShaw, "[grid]\nN = 64\n[divisor]\npoints = (0.5, 0.5, 1)\n"}};
    int compared = 0, differing = 0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      std::vector<fs::path> dirs;
      for (int run = 0; run < 2; ++run) {
        Scenario s = parse_scenario_text(configs[c].second, configs[c].first);
        s.out_dir = root / (std::to_string(c) + "_" + std::to_string(run));
        run_scenario(s, 4);
        dirs.push_back(s.out_dir);
      }
      for (const auto& e : fs::directory_iterator(dirs[0])) {
        if (e.path().extension() != ".csv") continue;
        ++compared;
        if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) ++differing;
      }
    }
    report(10, "determinism", compared > 0 && differing == 0,
           fmt("%d CSV files compared across two runs with 4 threads, %d differ", compared,
               differing));
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 10 criteria failed (%.0f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
