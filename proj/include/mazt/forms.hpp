#pragma once

#include <optional>
#include <vector>

#include "mazt/grid.hpp"

namespace mazt {

/// Density of a smooth closed (1,1)-form with respect to dA. The density may
/// change sign; the class is Kähler (n = 1) iff the volume is positive.
struct BackgroundForm {
  ScalarField density;
  double volume;

  const TorusGrid& grid() const noexcept { return density.grid(); }
  bool is_kahler() const noexcept { return volume > 0.0; }
};

BackgroundForm make_background(ScalarField density, bool require_kahler);
BackgroundForm make_background(const TorusGrid& grid,
                               const std::function<double(double, double)>& f,
                               bool require_kahler);

/// Positive reference density with unit integral.
struct VolumeDensity {
  ScalarField density;
  const TorusGrid& grid() const noexcept { return density.grid(); }
};

/// Normalises `raw` to unit mass. Throws InvalidArgument unless min > 0.
VolumeDensity make_volume(ScalarField raw);

struct DivisorPoint {
  int i;
  int j;
  int multiplicity;
};

/// Divisor on the torus: Dirac masses at nodes, a curvature density f_L of
/// total mass m, and h_s = log||s||^2 with kappa*Δh_s = δ_Z - f_L and
/// max h_s = 0.
struct DivisorData {
  std::vector<DivisorPoint> points;
  int total_multiplicity;
  ScalarField curvature;   // f_L
  ScalarField log_norm;    // h_s
  bool constant_curvature;

  const TorusGrid& grid() const noexcept { return curvature.grid(); }
};

/// f_L defaults to the constant m. Throws BadMass if the supplied f_L does not
/// integrate to m within mass_tol.
DivisorData make_divisor(const TorusGrid& grid, std::vector<DivisorPoint> points,
                         std::optional<ScalarField> curvature = std::nullopt,
                         double mass_tol = 1e-10);

/// Discrete Dirac masses of the divisor (m_i / cell_area on its node).
ScalarField dirac_density(const DivisorData& z);

/// θ - λ θ_L. Throws NonKahler if required and V - λ m <= 0.
BackgroundForm twist(const BackgroundForm& theta, const DivisorData& z,
                     double lambda, bool require_kahler);

struct SeshadriEstimate {
  double value;  // V / m
  bool exact;    // false when f_L is not constant: then only an upper bound
};

SeshadriEstimate seshadri_constant(const BackgroundForm& omega,
                                   const DivisorData& z);

/// Nearest grid node to (x, y) together with the periodic snap distance.
struct SnappedNode {
  int i;
  int j;
  double distance;
};
SnappedNode snap_to_node(const TorusGrid& grid, double x, double y);

}  // namespace mazt
