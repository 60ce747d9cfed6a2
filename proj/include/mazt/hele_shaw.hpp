#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mazt/envelope.hpp"
#include "mazt/forms.hpp"

namespace mazt {

struct HeleShawOptions {
  EnvelopeOptions envelope;
  bool warm_start = true;  // start each λ from the previous u_λ
  int threads = 1;         // only used without warm start
};

/// 16 uniform values from 0 to 0.9·V/m.
std::vector<double> default_lambdas(double volume, int multiplicity);

struct HeleShawMember {
  double lambda;
  EnvelopeSolution solution;          // u_λ
  std::vector<std::uint8_t> domain;   // M_λ = non-contact set
  std::size_t domain_nodes;
  double area;                        // ∫_{M_λ} f_ω
  std::optional<FreeBoundary> boundary;
  bool contains_divisor;
  double mass_identity_error;         // |∫_D MA(u_λ) - (V - λm)|
};

struct HeleShawFamily {
  std::vector<HeleShawMember> members;
  double volume;
  int multiplicity;
};

/// Requires f_ω > 0 and every λ in [0, V/m). Errors carry the offending λ.
HeleShawFamily run_family(const BackgroundForm& omega, const DivisorData& z,
                          std::vector<double> lambdas,
                          const HeleShawOptions& opts = {});

struct AreaLawReport {
  std::vector<double> errors;  // ∫_{M_λ} f_ω - λm
  double max_abs_error;
  double tol;
  bool pass;
};
AreaLawReport area_law(const HeleShawFamily& family, double tol = 0.02);

struct NestingReport {
  std::size_t worst_count;      // max over λ < λ' of |M_λ \ M_λ'|
  double worst_fraction;        // the same count over the boundary nodes of M_λ
  double tol_fraction;
  bool pass;
};
NestingReport check_nesting(const HeleShawFamily& family,
                            double tol_fraction = 0.005);

struct ExhaustionVerdict {
  std::vector<double> area_ratio;  // area_λ / V
  double final_ratio;
  double final_target;             // λ_max m / V
  bool monotone;
  bool pass;
};

/// Throws WrongRegime unless V = m within 1e-9 relative.
ExhaustionVerdict exhaustion_check(const HeleShawFamily& family,
                                   double area_tol = 0.02);

/// Non-contact nodes with a contact neighbour.
std::size_t boundary_node_count(const TorusGrid& grid,
                                const std::vector<std::uint8_t>& domain);

}  // namespace mazt
