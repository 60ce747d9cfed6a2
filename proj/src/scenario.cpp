#include "mazt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mazt/envelope.hpp"
#include "mazt/errors.hpp"
#include "mazt/forms.hpp"
#include "mazt/functionals.hpp"
#include "mazt/geodesic.hpp"
#include "mazt/hele_shaw.hpp"
#include "mazt/io.hpp"
#include "mazt/ma_solver.hpp"
#include "mazt/parallel.hpp"
#include "mazt/zero_temp.hpp"

namespace mazt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// JSON cannot hold inf/nan; those become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json num_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) {
      out_ << (k ? "," : "") << header[k];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      out_ << (k ? "," : "") << cells[k];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string cell(double v) { return format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }

class Run {
 public:
  Run(const Scenario& s, int threads)
      : s_(s), threads_(std::max(1, threads)), grid_(s.n) {
    fs::create_directories(s.out_dir);
  }

  const Scenario& scenario() const { return s_; }
  int threads() const { return threads_; }
  const TorusGrid& grid() const { return grid_; }

  fs::path artifact(const std::string& name) {
    artifacts_.push_back(name);
    return s_.out_dir / name;
  }

  void check(const std::string& name, bool pass, double margin,
             json details = json::object()) {
    json c;
    c["check"] = name;
    c["pass"] = pass;
    c["margin"] = num(margin);
    c["details"] = std::move(details);
    checks_.push_back(std::move(c));
    if (!pass) failed_ = true;
  }

  void warn(const std::string& text) { warnings_.push_back(text); }
  json& metrics() { return metrics_; }

  ScenarioOutcome finish(const std::optional<Error>& err,
                         const std::string& other_error) {
    json sum;
    sum["kind"] = scenario_kind_name(s_.kind);
    sum["threads"] = threads_;
    sum["config"] = config_json();
    int code = failed_ ? kExitCheckFailed : kExitPass;
    std::string message;
    if (err) {
      code = kExitSolverFailure;
      message = err->what();
      sum["error"] = {{"code", error_code_name(err->code())},
                      {"message", message}};
    } else if (!other_error.empty()) {
      code = kExitSolverFailure;
      message = other_error;
      sum["error"] = {{"code", "Internal"}, {"message", message}};
    }
    sum["status"] = code == kExitPass ? "pass"
                    : code == kExitCheckFailed ? "fail"
                                               : "error";
    sum["exit_code"] = code;
    sum["checks"] = checks_;
    sum["metrics"] = metrics_;
    sum["warnings"] = warnings_;
    artifacts_.push_back("summary.json");
    sum["artifacts"] = artifacts_;
    const std::string text = sum.dump(2) + "\n";
    const fs::path path = s_.out_dir / "summary.json";
    std::ofstream out(path, std::ios::binary);
    out << text;
    return {code, text, path, message};
  }

 private:
  json config_json() const {
    json c;
    c["N"] = s_.n;
    c["f_theta"] = s_.f_theta;
    c["g"] = s_.g;
    if (s_.divisor) {
      json pts = json::array();
      for (const auto& p : s_.divisor->points) {
        pts.push_back({p.x, p.y, p.multiplicity});
      }
      c["divisor"] = {{"points", pts},
                      {"f_L", s_.divisor->f_l ? json(*s_.divisor->f_l)
                                              : json(nullptr)}};
    }
    c["beta"] = num_list(s_.betas);
    c["lambda"] = num_list(s_.lambdas);
    c["c"] = s_.c;
    c["lambda_count"] = s_.lambda_count;
    c["t"] = num_list(s_.ts);
    c["delta_frac"] = s_.delta_frac;
    c["calibrate_N"] = s_.calibrate_ns;
    c["continuation"] = s_.continuation;
    c["seed"] = s_.seed;
    const Tolerances& t = s_.tol;
    c["tolerances"] = {
        {"newton_tol", t.newton_tol},   {"max_newton_iters", t.max_newton_iters},
        {"linear_tol", t.linear_tol},   {"lcp_tol", t.lcp_tol},
        {"contact_tol", t.contact_tol}, {"psor_tol", t.psor_tol},
        {"omega_relax", t.omega_relax}, {"ortho_tol", t.ortho_tol},
        {"support_tol", t.support_tol}, {"stat_tol", t.stat_tol},
        {"area_tol", t.area_tol},       {"nesting_tol", t.nesting_tol},
        {"conc_tol", t.conc_tol},       {"legendre_tol", t.legendre_tol},
        {"slope_tol", t.slope_tol},     {"decay_tol", t.decay_tol},
        {"flat_tail_tol", t.flat_tail_tol}};
    c["out_dir"] = s_.out_dir.string();
    return c;
  }

  const Scenario& s_;
  int threads_;
  TorusGrid grid_;
  std::vector<std::string> artifacts_;
  json checks_ = json::array();
  json metrics_ = json::object();
  std::vector<std::string> warnings_;
  bool failed_ = false;
};

SolveOptions solve_options(const Tolerances& t) {
  SolveOptions o;
  o.newton_tol = t.newton_tol;
  o.max_iters = t.max_newton_iters;
  o.linear_tol = t.linear_tol;
  return o;
}

EnvelopeOptions envelope_options(const Tolerances& t) {
  EnvelopeOptions o;
  o.omega_relax = t.omega_relax;
  o.psor_tol = t.psor_tol;
  o.lcp_tol = t.lcp_tol;
  o.contact_tol = t.contact_tol;
  return o;
}

BackgroundForm background(Run& run) {
  const Recipe r = Recipe::compile(run.scenario().f_theta);
  return make_background(run.grid(), r.function(), true);
}

VolumeDensity volume(Run& run) {
  const Recipe r = Recipe::compile(run.scenario().g);
  return make_volume(ScalarField::sample(run.grid(), r.function()));
}

DivisorData divisor(Run& run) {
  const DivisorSpec& spec = *run.scenario().divisor;
  std::vector<DivisorPoint> pts;
  for (const auto& p : spec.points) {
    const SnappedNode node = snap_to_node(run.grid(), p.x, p.y);
    if (node.distance > 0.0) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "divisor point (%g, %g) snapped to node (%d, %d), "
                    "distance %.3g",
                    p.x, p.y, node.i, node.j, node.distance);
      run.warn(buf);
    }
    pts.push_back({node.i, node.j, p.multiplicity});
  }
  std::optional<ScalarField> fl;
  if (spec.f_l) {
    fl = ScalarField::sample(run.grid(), Recipe::compile(*spec.f_l).function());
  }
  return make_divisor(run.grid(), std::move(pts), std::move(fl));
}

void write_telemetry(std::ofstream& out, double beta, std::optional<double> lambda,
                     const BetaSolution& s) {
  for (const NewtonRecord& r : s.history) {
    json line;
    line["beta"] = beta;
    if (lambda) line["lambda"] = *lambda;
    line["iteration"] = r.iteration;
    line["residual_sup"] = num(r.residual_sup);
    line["step"] = r.step;
    line["linear_iters"] = r.linear_iters;
    out << line.dump() << '\n';
  }
}

// ---------------------------------------------------------------- solve

void run_solve(Run& run) {
  const Scenario& s = run.scenario();
  const BackgroundForm theta = background(run);
  const VolumeDensity g = volume(run);
  const SolveOptions opts = solve_options(s.tol);
  const bool with_divisor = s.divisor && !s.lambdas.empty();
  std::optional<DivisorData> z;
  if (with_divisor) z = divisor(run);
  std::vector<double> lambdas = with_divisor ? s.lambdas : std::vector<double>{0.0};

  struct Job {
    double beta;
    double lambda;
  };
  std::vector<Job> jobs;
  for (double b : s.betas) {
    for (double l : lambdas) jobs.push_back({b, l});
  }
  std::vector<std::optional<BetaSolution>> sols(jobs.size());
  parallel_for(jobs.size(), run.threads(), [&](std::size_t k) {
    sols[k] = with_divisor
                  ? solve_beta_divisor(theta, *z, jobs[k].lambda, jobs[k].beta,
                                       g, opts)
                  : solve_beta(theta, g, jobs[k].beta, opts);
  });

  CsvWriter csv(run.artifact("solve.csv"),
                {"beta", "lambda", "residual_sup", "iters", "sup_abs_u",
                 "min_ma_density", "mass_error", "max_trace_ratio",
                 "trace_bound"});
  std::ofstream tele(run.artifact("telemetry.jsonl"), std::ios::binary);
  const BackgroundForm reference =
      make_background(ScalarField(run.grid(), theta.volume), true);
  double uniform_bound = 0.0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const BetaSolution& sol = *sols[k];
    const double beta = jobs[k].beta, lambda = jobs[k].lambda;
    const BackgroundForm th =
        with_divisor ? twist(theta, *z, lambda, false) : theta;
    const ScalarField ma = ma_density(th, sol.u);
    const double mass_err = std::fabs(integrate(ma) - th.volume);
    const double psh_tol = 10.0 * s.tol.newton_tol;
    uniform_bound = std::max(uniform_bound, sol.u.sup_norm());

    char tag[64];
    std::snprintf(tag, sizeof tag, "beta=%g lambda=%g", beta, lambda);
    run.check(std::string("converged ") + tag,
              sol.residual_sup <= s.tol.newton_tol,
              s.tol.newton_tol - sol.residual_sup,
              {{"iters", sol.iters}, {"residual_sup", sol.residual_sup},
               {"capped_nodes", sol.capped_nodes},
               {"underflow_nodes", sol.underflow_nodes}});
    run.check(std::string("theta_psh ") + tag, ma.min() >= -psh_tol,
              ma.min() + psh_tol, {{"min_ma_density", ma.min()}});
    run.check(std::string("mass_identity ") + tag,
              mass_err <= 10.0 * s.tol.newton_tol,
              10.0 * s.tol.newton_tol - mass_err, {{"mass_error", mass_err}});

    double max_trace = NAN, bound = NAN;
    if (!with_divisor || lambda == 0.0) {
      const ComparisonVerdict cmp = check_comparison(
          theta, g, beta, sol.u + 1.0 / beta, sol.u + (-1.0 / beta));
      run.check(std::string("comparison ") + tag, cmp.holds, -cmp.worst_gap,
                {{"violations", cmp.violations}, {"worst_gap", cmp.worst_gap}});
      const LaplacianBoundReport lb =
          laplacian_bound_report(theta, sol, reference);
      max_trace = lb.max_trace_ratio;
      bound = lb.bound;
      run.check(std::string("laplacian_bound ") + tag, lb.holds, lb.slack,
                {{"prefactor", lb.prefactor},
                 {"sup_trace_theta", lb.sup_trace_theta},
                 {"max_trace_ratio", lb.max_trace_ratio},
                 {"osc_u_minus_v", lb.osc_u_minus_v}});
    }
    csv.row({cell(beta), cell(lambda), cell(sol.residual_sup), cell(sol.iters),
             cell(sol.u.sup_norm()), cell(ma.min()), cell(mass_err),
             cell(max_trace), cell(bound)});
    write_telemetry(tele, beta,
                    with_divisor ? std::optional<double>(lambda) : std::nullopt,
                    sol);
    write_field_binary(sol.u, run.artifact("u_" + std::to_string(k) + ".field"));
  }
  run.metrics()["uniform_bound"] = uniform_bound;
}

// ---------------------------------------------------------------- envelope

void run_envelope(Run& run) {
  const Scenario& s = run.scenario();
  const BackgroundForm theta = background(run);
  const VolumeDensity g = volume(run);
  const EnvelopeSolution sol = envelope_theta(theta, envelope_options(s.tol));
  const LcpCheck lcp = check_lcp(theta, sol);
  const ScalarField ma = ma_density(theta, sol.u);
  const double tol = s.tol.lcp_tol;

  run.check("lcp_obstacle", lcp.max_obstacle_violation <= tol,
            tol - lcp.max_obstacle_violation,
            {{"max_u_minus_obstacle", lcp.max_obstacle_violation}});
  run.check("lcp_psh", lcp.min_ma_density >= -tol, lcp.min_ma_density + tol,
            {{"min_ma_density", lcp.min_ma_density}});
  run.check("lcp_complementarity", lcp.max_complementarity <= tol,
            tol - lcp.max_complementarity,
            {{"max_complementarity", lcp.max_complementarity}});

  const double ortho = std::fabs(inner(sol.u, ma));
  run.check("orthogonality", ortho <= s.tol.ortho_tol, s.tol.ortho_tol - ortho,
            {{"abs_integral_u_ma", ortho}});

  double off_support = 0.0, min_f_on_contact = INFINITY;
  for (std::size_t k = 0; k < ma.size(); ++k) {
    if (!sol.contact[k]) {
      off_support += std::max(0.0, ma[k]);
    } else {
      min_f_on_contact = std::min(min_f_on_contact, theta.density[k]);
    }
  }
  off_support *= run.grid().cell_area();
  run.check("ma_support", off_support <= s.tol.support_tol,
            s.tol.support_tol - off_support, {{"off_contact_mass", off_support}});

  const double mass_err = std::fabs(integrate(ma) - theta.volume);
  run.check("ma_mass", mass_err <= 1e-10 * std::max(1.0, theta.volume),
            1e-10 - mass_err, {{"mass_error", mass_err}});

  double f_plus = 0.0;
  for (double v : theta.density.values()) f_plus = std::max(f_plus, v);
  run.check("ma_density_bound", ma.max() <= f_plus + tol,
            f_plus + tol - ma.max(), {{"max_ma_density", ma.max()},
                                      {"max_f_plus", f_plus}});

  const std::size_t nc = sol.contact_count();
  if (nc > 0) {
    const double top = std::fabs(sol.u.max());
    run.check("sup_u_theta_zero", top <= s.tol.contact_tol,
              s.tol.contact_tol - top, {{"sup_u", sol.u.max()}});
  }
  if (theta.density.min() >= 0.0) {
    const double sup = sol.u.sup_norm();
    run.check("u_theta_zero", sup <= tol, tol - sup,
              {{"sup_abs_u", sup}});
  }

  const double entropy = relative_entropy(ma, g);
  const double contact_entropy = contact_set_entropy(theta, sol, g);
  json& m = run.metrics();
  m["contact_fraction"] = static_cast<double>(nc) / run.grid().size();
  m["min_u"] = sol.u.min();
  m["grad_sup_norm"] = grad_sup_norm(sol.u);
  m["comp_residual"] = sol.comp_residual;
  m["psor_sweeps"] = sol.psor_sweeps;
  m["active_set_iters"] = sol.active_set_iters;
  m["min_f_theta_on_contact"] = num(min_f_on_contact);
  m["entropy"] = entropy;
  m["contact_set_entropy"] = contact_entropy;
  m["energy"] = energy(sol.u, theta);

  write_field_binary(sol.u, run.artifact("u_theta.field"));
  write_field_csv(sol.u, run.artifact("u_theta.csv"));
  write_mask_pbm(run.grid(), sol.contact, run.artifact("contact.pbm"));
  if (nc > 0 && nc < run.grid().size()) {
    const FreeBoundary fb = free_boundary(sol);
    write_polylines_csv(fb.lines, run.artifact("free_boundary.csv"));
    m["boundary_length"] = fb.total_length;
    m["boundary_components"] = fb.lines.size();
  }
}

// ---------------------------------------------------------------- sweep-beta

void run_sweep(Run& run) {
  const Scenario& s = run.scenario();
  const BackgroundForm theta = background(run);
  const VolumeDensity g = volume(run);
  SweepOptions opts;
  opts.solve = solve_options(s.tol);
  opts.envelope = envelope_options(s.tol);
  opts.continuation = s.continuation;
  opts.threads = run.threads();
  const SweepReport rep = sweep_beta(theta, g, s.betas, opts);
  const double nt = s.tol.newton_tol;

  run.check("sup_err_monotone", non_increasing(rep.sup_err, 2.0 * nt), 0.0,
            {{"sup_err", num_list(rep.sup_err)}});
  run.check("grad_err_monotone", non_increasing(rep.grad_err, 2.0 * nt),
            0.0, {{"grad_err", num_list(rep.grad_err)},
                  {"first_over_last",
                   rep.grad_err.front() / rep.grad_err.back()}});
  run.check("energy_gap_monotone",
            non_increasing(rep.energy_gap, 2.0 * nt), 0.0,
            {{"energy_gap", num_list(rep.energy_gap)}});

  double slack = 0.0;
  if (!s.calibrate_ns.empty()) {
    const Recipe fr = Recipe::compile(s.f_theta);
    const Recipe gr = Recipe::compile(s.g);
    SweepOptions copts = opts;
    const SlackCalibration cal = calibrate_grid_slack(
        fr.function(), gr.function(), s.betas, s.calibrate_ns, copts);
    slack = cal.slack_at(run.grid().h());
    run.check("refined_bound_extrapolated", cal.extrapolated_ok,
              -cal.v0,
              {{"N", cal.ns}, {"violation", num_list(cal.violations)},
               {"v0", cal.v0}, {"c1", cal.c1}});
  }
  std::vector<double> refined_margin(rep.betas.size(), NAN);
  if (rep.envelope.contact_count() > 0) {
    const RefinedBoundVerdict rb = refined_bound_check(rep, slack);
    refined_margin = rb.margins;
    run.check("refined_bound", rb.pass, rb.worst_margin,
              {{"C", rb.c_paper},
               {"C_volume_normalised", rep.refined_c_normalised},
               {"grid_slack", slack},
               {"margins", num_list(rb.margins)}});
  }

  std::vector<double> decay(rep.betas.size(), NAN);
  const double delta = s.delta_frac * rep.envelope.u.sup_norm();
  try {
    const DecayVerdict dv = ma_decay_check(rep, g, delta, s.tol.decay_tol);
    decay = dv.sup_density;
    run.check("ma_decay_bound", dv.bound_holds, 0.0,
              {{"delta", delta}, {"sup_density", num_list(dv.sup_density)},
               {"bound", num_list(dv.bound)}});
    run.check("ma_decay_rate", dv.rate_ok, s.tol.decay_tol - dv.rate_rel_error,
              {{"delta", delta}, {"fitted_rate", dv.fitted_rate},
               {"rel_error", dv.rate_rel_error},
               {"region_nodes", dv.region_nodes}});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyRegion) throw;
    run.metrics()["ma_decay"] = std::string("skipped: ") + e.what();
  }

  if (theta.density.min() > 0.0) {
    const PositiveCaseReport pc = positive_case(rep, theta, g);
    run.check("positive_case", pc.decreasing,
              pc.expansion_err.back(),
              {{"expansion_err", num_list(pc.expansion_err)}});
  }

  const std::vector<ScalarField> probes = {
      ScalarField(run.grid(), 1.0),
      ScalarField::sample(run.grid(),
                          [](double x, double) {
                            return std::cos(2.0 * std::numbers::pi * x);
                          }),
      ScalarField::sample(run.grid(), [](double, double y) {
        return std::sin(2.0 * std::numbers::pi * y);
      })};
  double worst_stat = 0.0, worst_second = -INFINITY;
  for (const BetaSolution& sol : rep.solutions) {
    const StationarityReport st =
        g_beta_stationarity(sol, g, theta, probes, 0.0, s.tol.stat_tol);
    worst_stat = std::max(worst_stat, st.max_abs_derivative);
    worst_second = std::max(worst_second, st.max_second_difference);
  }
  run.check("g_beta_stationarity", worst_stat <= s.tol.stat_tol,
            s.tol.stat_tol - worst_stat,
            {{"max_abs_derivative", worst_stat},
             {"max_second_difference", worst_second}});

  const ScalarField ma_theta = ma_density(theta, rep.envelope.u);
  const double entropy_theta = relative_entropy(ma_theta, g);
  CsvWriter csv(run.artifact("sweep.csv"),
                {"beta", "sup_err", "grad_err", "energy_gap", "refined_margin",
                 "decay_sup", "E", "L_beta", "G_beta", "entropy_gap"});
  std::ofstream tele(run.artifact("telemetry.jsonl"), std::ios::binary);
  for (std::size_t k = 0; k < rep.betas.size(); ++k) {
    const BetaSolution& sol = rep.solutions[k];
    const EnergyReport er = energy_report(sol.u, theta, g, sol.beta, true);
    csv.row({cell(rep.betas[k]), cell(rep.sup_err[k]), cell(rep.grad_err[k]),
             cell(rep.energy_gap[k]), cell(refined_margin[k]), cell(decay[k]),
             cell(er.energy), cell(er.l_beta), cell(er.g_beta),
             cell(std::fabs(*er.entropy - entropy_theta))});
    write_telemetry(tele, rep.betas[k], std::nullopt, sol);
    write_field_binary(sol.u,
                       run.artifact("u_beta_" + std::to_string(k) + ".field"));
  }
  write_field_binary(rep.envelope.u, run.artifact("u_theta.field"));

  json& m = run.metrics();
  m["rate_c_fit"] = rep.rate.c;
  m["fitted_rate"] = rep.rate.p;
  m["refined_C"] = rep.refined_c;
  m["uniform_bound"] =
      *std::max_element(rep.sup_abs.begin(), rep.sup_abs.end());
  m["energy_theta"] = rep.energy_theta;
}

// ---------------------------------------------------------------- hele-shaw

void run_hele_shaw(Run& run) {
  const Scenario& s = run.scenario();
  const BackgroundForm omega = background(run);
  const DivisorData z = divisor(run);
  HeleShawOptions opts;
  opts.envelope = envelope_options(s.tol);
  opts.warm_start = s.continuation;
  opts.threads = run.threads();
  const std::vector<double> lambdas =
      s.lambdas.empty() ? default_lambdas(omega.volume, z.total_multiplicity)
                        : s.lambdas;
  const HeleShawFamily fam = run_family(omega, z, lambdas, opts);

  const AreaLawReport al = area_law(fam, s.tol.area_tol);
  run.check("area_law", al.pass, al.tol - al.max_abs_error,
            {{"errors", num_list(al.errors)}});
  const NestingReport ne = check_nesting(fam, s.tol.nesting_tol);
  run.check("nesting", ne.pass, ne.tol_fraction - ne.worst_fraction,
            {{"worst_count", ne.worst_count},
             {"worst_fraction", ne.worst_fraction}});
  bool contains = true, empty_at_zero = true;
  double worst_mass = 0.0;
  for (const HeleShawMember& m : fam.members) {
    if (m.lambda > 0.0 && !m.contains_divisor) contains = false;
    if (m.lambda == 0.0 && m.domain_nodes != 0) empty_at_zero = false;
    worst_mass = std::max(worst_mass, m.mass_identity_error);
  }
  run.check("contains_divisor", contains, 0.0);
  if (fam.members.front().lambda == 0.0) {
    run.check("empty_at_zero", empty_at_zero, 0.0,
              {{"nodes", fam.members.front().domain_nodes}});
  }
  const double mass_tol =
      s.tol.lcp_tol * static_cast<double>(run.grid().size());
  run.check("mass_identity", worst_mass <= mass_tol,
            mass_tol - worst_mass, {{"worst_error", worst_mass}});
  try {
    const ExhaustionVerdict ex = exhaustion_check(fam, s.tol.area_tol);
    run.check("exhaustion", ex.pass, ex.final_ratio - ex.final_target + s.tol.area_tol,
              {{"area_ratio", num_list(ex.area_ratio)},
               {"final_target", ex.final_target}});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WrongRegime) throw;
    run.metrics()["exhaustion"] = std::string("skipped: ") + e.what();
  }

  CsvWriter csv(run.artifact("hele_shaw.csv"),
                {"lambda", "area", "boundary_length", "n_components",
                 "circularity"});
  for (std::size_t k = 0; k < fam.members.size(); ++k) {
    const HeleShawMember& m = fam.members[k];
    const std::string idx = std::to_string(k);
    double length = 0.0, circ = NAN;
    std::size_t comps = 0;
    if (m.boundary) {
      length = m.boundary->total_length;
      comps = m.boundary->lines.size();
      if (comps == 1 && m.boundary->lines[0].contractible) {
        circ = m.boundary->lines[0].circularity();
      }
      write_polylines_csv(m.boundary->lines,
                          run.artifact("boundary_" + idx + ".csv"));
    }
    write_mask_pbm(run.grid(), m.domain, run.artifact("domain_" + idx + ".pbm"));
    csv.row({cell(m.lambda), cell(m.area), cell(length), cell(comps),
             cell(circ)});
  }
  run.metrics()["max_area_error"] = al.max_abs_error;
}

// ---------------------------------------------------------------- geodesic

void run_geodesic(Run& run) {
  const Scenario& s = run.scenario();
  const BackgroundForm omega = background(run);
  const VolumeDensity g = volume(run);
  const DivisorData z = divisor(run);
  RayOptions opts;
  opts.envelope = envelope_options(s.tol);
  opts.solve = solve_options(s.tol);
  opts.conc_tol = s.tol.conc_tol;
  const std::vector<double> lambdas =
      s.lambdas.empty() ? uniform_lambdas(s.c, s.lambda_count) : s.lambdas;

  const PsiFamily fam = build_psi_family(omega, z, s.c, lambdas, opts);
  run.check("psi_concave", true, opts.conc_tol - fam.max_second_difference,
            {{"max_second_difference", fam.max_second_difference}});
  run.check("psi_nonpositive", fam.max_psi <= s.tol.lcp_tol,
            s.tol.lcp_tol - fam.max_psi, {{"max_psi", fam.max_psi}});

  const Ray ray = legendre_ray(fam, s.ts);
  const std::vector<ScalarField> back = double_legendre(fam);
  double legendre_err = 0.0;
  std::vector<double> col(fam.mus.size());
  for (std::size_t x = 0; x < run.grid().size(); ++x) {
    for (std::size_t k = 0; k < col.size(); ++k) col[k] = fam.psi[k][x];
    const std::vector<double> hull = upper_concave_hull(fam.mus, col);
    for (std::size_t k = 0; k < col.size(); ++k) {
      legendre_err = std::max(legendre_err, std::fabs(back[k][x] - hull[k]));
    }
  }
  run.check("double_legendre",
            legendre_err <= s.tol.legendre_tol,
            s.tol.legendre_tol - legendre_err, {{"max_error", legendre_err}});

  const RayShapeReport shape = ray_shape(omega, ray);
  run.check("ray_convex", shape.min_convexity >= -1e-12,
            shape.min_convexity + 1e-12,
            {{"min_second_difference", shape.min_convexity}});
  run.check("argmax_monotone", shape.argmax_monotone, 0.0);
  run.metrics()["ray_min_psh_density"] = shape.min_psh_density;

  std::vector<std::optional<Subgeodesic>> subs(s.betas.size());
  parallel_for(s.betas.size(), run.threads(), [&](std::size_t k) {
    subs[k] = subgeodesic(omega, z, s.c, s.betas[k], lambdas, s.ts, g, opts);
  });
  std::vector<double> devs;
  CsvWriter conv(run.artifact("convergence.csv"),
                 {"beta", "sup_dev", "slope_measured"});
  double worst_tail = 0.0;
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const DeviationReport d = ray_deviation(*subs[k], ray);
    devs.push_back(d.sup_dev);
    worst_tail = std::max(worst_tail, d.tail_change);
    const Ray as_ray{subs[k]->ts, subs[k]->phi, {}};
    const EnergySlopeReport es =
        energy_slope_check(omega, z, fam, as_ray, s.tol.slope_tol);
    conv.row({cell(s.betas[k]), cell(d.sup_dev), cell(es.slope_measured)});
  }
  run.check("subgeodesic_convergence",
            strictly_decreasing(devs), 0.0, {{"sup_dev", num_list(devs)}});
  run.check("flat_tail", worst_tail <= s.tol.flat_tail_tol,
            s.tol.flat_tail_tol - worst_tail, {{"worst_tail_change", worst_tail}});

  const EnergySlopeReport es =
      energy_slope_check(omega, z, fam, ray, s.tol.slope_tol);
  run.check("energy_affine", es.affine,
            es.affine_tol - es.affine_dev,
            {{"affine_dev", es.affine_dev}, {"affine_tol", es.affine_tol},
             {"window_t", es.window_t}, {"window_points", es.window_points}});
  run.check("energy_slope", es.slope_ok,
            s.tol.slope_tol - es.slope_rel_error,
            {{"slope_measured", es.slope_measured},
             {"slope_paper", es.slope_paper},
             {"rel_error", es.slope_rel_error},
             {"slope_dh", es.slope_dh}});
  json& m = run.metrics();
  m["slope_measured"] = es.slope_measured;
  m["slope_paper"] = es.slope_paper;
  m["slope_dh"] = es.slope_dh;
  m["energy_tail_spread"] = es.tail_spread;

  CsvWriter rc(run.artifact("ray.csv"), {"t", "E", "argmax_histogram"});
  for (std::size_t k = 0; k < ray.ts.size(); ++k) {
    std::vector<std::size_t> hist(fam.mus.size(), 0);
    for (int a : ray.argmax[k]) ++hist[static_cast<std::size_t>(a)];
    std::string h;
    for (std::size_t q = 0; q < hist.size(); ++q) {
      h += (q ? ";" : "") + std::to_string(hist[q]);
    }
    rc.row({cell(ray.ts[k]), cell(es.energies[k]), h});
    write_field_binary(ray.phi[k],
                       run.artifact("ray_t" + std::to_string(k) + ".field"));
  }
}

}  // namespace

ScenarioOutcome run_scenario(const Scenario& s, int threads) {
  Run run(s, threads);
  std::optional<Error> err;
  std::string other;
  try {
    switch (s.kind) {
      case ScenarioKind::Solve: run_solve(run); break;
      case ScenarioKind::Envelope: run_envelope(run); break;
      case ScenarioKind::SweepBeta: run_sweep(run); break;
      case ScenarioKind::HeleShaw: run_hele_shaw(run); break;
      case ScenarioKind::Geodesic: run_geodesic(run); break;
    }
  } catch (const Error& e) {
    err = e;
  } catch (const std::exception& e) {
    other = e.what();
  }
  return run.finish(err, other);
}

ScenarioOutcome run_scenario_file(const std::string& kind,
                                  const fs::path& config, int threads,
                                  const std::optional<fs::path>& out_dir) {
  const std::optional<ScenarioKind> k = parse_scenario_kind(kind);
  if (!k) {
    return {kExitConfigError, "", {}, "unknown scenario kind '" + kind + "'"};
  }
  Scenario s;
  try {
    s = parse_scenario(config, k);
  } catch (const Error& e) {
    return {kExitConfigError, "", {},
            std::string(error_code_name(e.code())) + ": " + e.what()};
  }
  if (out_dir) s.out_dir = *out_dir;
  return run_scenario(s, threads);
}

}  // namespace mazt
