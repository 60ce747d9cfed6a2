#include "mazt/hele_shaw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "mazt/errors.hpp"
#include "mazt/ma_solver.hpp"
#include "mazt/parallel.hpp"

namespace mazt {

namespace {

std::string lambda_text(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

HeleShawMember make_member(const BackgroundForm& omega, const DivisorData& z,
                           double lambda, const EnvelopeOptions& opts,
                           const ScalarField* initial) {
  DivisorEnvelope env = [&] {
    try {
      return envelope_divisor(omega, z, lambda, opts, initial);
    } catch (const Error& e) {
      throw Error(e.code(), "lambda=" + lambda_text(lambda) + ": " + e.what());
    }
  }();
  const TorusGrid& grid = omega.grid();
  HeleShawMember m{lambda, std::move(env.solution), {}, 0, 0.0, std::nullopt,
                   true, 0.0};
  m.domain.resize(grid.size());
  double area = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    m.domain[k] = !m.solution.contact[k];
    if (m.domain[k]) {
      ++m.domain_nodes;
      area += omega.density[k];
    }
  }
  m.area = area * grid.cell_area();
  for (const DivisorPoint& p : z.points) {
    if (!m.domain[grid.index(p.i, p.j)]) m.contains_divisor = false;
  }
  const ScalarField ma = ma_density(env.theta, m.solution.u);
  double on_contact = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (m.solution.contact[k]) on_contact += ma[k];
  }
  m.mass_identity_error =
      std::fabs(on_contact * grid.cell_area() - env.theta.volume);
  if (m.domain_nodes > 0 && m.domain_nodes < grid.size()) {
    m.boundary = free_boundary(m.solution);
  }
  return m;
}

}  // namespace

std::vector<double> default_lambdas(double volume, int multiplicity) {
  std::vector<double> out;
  const double top = 0.9 * volume / multiplicity;
  for (int k = 0; k < 16; ++k) out.push_back(top * k / 15.0);
  return out;
}

HeleShawFamily run_family(const BackgroundForm& omega, const DivisorData& z,
                          std::vector<double> lambdas,
                          const HeleShawOptions& opts) {
  if (!(omega.density.min() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "Hele-Shaw family needs f_omega > 0 everywhere");
  }
  if (lambdas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "lambda list is empty");
  }
  const double eps = omega.volume / z.total_multiplicity;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (lambdas[k] < 0.0 || !(lambdas[k] < eps)) {
      throw Error(ErrorCode::SeshadriViolation,
                  "lambda=" + lambda_text(lambdas[k]) +
                      " outside [0, V/m)");
    }
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "lambdas must increase strictly");
    }
  }
  HeleShawFamily fam{{}, omega.volume, z.total_multiplicity};
  fam.members.reserve(lambdas.size());
  if (opts.warm_start) {
    for (double lambda : lambdas) {
      const ScalarField* init =
          fam.members.empty() ? nullptr : &fam.members.back().solution.u;
      fam.members.push_back(make_member(omega, z, lambda, opts.envelope, init));
    }
  } else {
    std::vector<std::optional<HeleShawMember>> slots(lambdas.size());
    parallel_for(lambdas.size(), opts.threads, [&](std::size_t k) {
      slots[k] = make_member(omega, z, lambdas[k], opts.envelope, nullptr);
    });
    for (auto& s : slots) fam.members.push_back(std::move(*s));
  }
  return fam;
}

AreaLawReport area_law(const HeleShawFamily& family, double tol) {
  AreaLawReport r{{}, 0.0, tol, true};
  for (const HeleShawMember& m : family.members) {
    const double err = m.area - m.lambda * family.multiplicity;
    r.errors.push_back(err);
    r.max_abs_error = std::max(r.max_abs_error, std::fabs(err));
  }
  r.pass = r.max_abs_error <= tol;
  return r;
}

std::size_t boundary_node_count(const TorusGrid& grid,
                                const std::vector<std::uint8_t>& domain) {
  std::size_t count = 0;
  const int n = grid.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!domain[grid.index(i, j)]) continue;
      if (!domain[grid.index(i + 1, j)] || !domain[grid.index(i - 1, j)] ||
          !domain[grid.index(i, j + 1)] || !domain[grid.index(i, j - 1)]) {
        ++count;
      }
    }
  }
  return count;
}

NestingReport check_nesting(const HeleShawFamily& family,
                            double tol_fraction) {
  NestingReport r{0, 0.0, tol_fraction, true};
  const auto& ms = family.members;
  if (ms.empty()) return r;
  const TorusGrid& grid = ms.front().solution.u.grid();
  for (std::size_t a = 0; a < ms.size(); ++a) {
    const std::size_t bnd =
        std::max<std::size_t>(1, boundary_node_count(grid, ms[a].domain));
    for (std::size_t b = a + 1; b < ms.size(); ++b) {
      std::size_t escaped = 0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        if (ms[a].domain[k] && !ms[b].domain[k]) ++escaped;
      }
      r.worst_count = std::max(r.worst_count, escaped);
      r.worst_fraction =
          std::max(r.worst_fraction, static_cast<double>(escaped) / bnd);
    }
  }
  r.pass = r.worst_fraction <= tol_fraction;
  return r;
}

ExhaustionVerdict exhaustion_check(const HeleShawFamily& family,
                                   double area_tol) {
  const double v = family.volume;
  const double m = family.multiplicity;
  if (std::fabs(v - m) > 1e-9 * std::max(1.0, std::fabs(m))) {
    throw Error(ErrorCode::WrongRegime,
                "exhaustion needs V = m (class cohomologous to Z)");
  }
  if (family.members.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty family");
  }
  ExhaustionVerdict e{{}, 0.0, 0.0, true, false};
  for (const HeleShawMember& mem : family.members) {
    e.area_ratio.push_back(mem.area / v);
  }
  for (std::size_t k = 1; k < e.area_ratio.size(); ++k) {
    if (e.area_ratio[k] < e.area_ratio[k - 1]) e.monotone = false;
  }
  e.final_ratio = e.area_ratio.back();
  e.final_target = family.members.back().lambda * m / v;
  e.pass = e.monotone && e.final_ratio >= e.final_target - area_tol;
  return e;
}

}  // namespace mazt
