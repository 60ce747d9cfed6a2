#pragma once

#include <cstdint>
#include <vector>

#include "mazt/forms.hpp"
#include "mazt/grid.hpp"

namespace mazt {

/// Obstacle φ₀ with per-node "constrained" flags; unconstrained nodes stand for
/// φ₀ = +∞ and never enter the contact set.
struct Obstacle {
  ScalarField values;
  std::vector<std::uint8_t> constrained;

  static Obstacle from_field(ScalarField values);
  static Obstacle constant(const TorusGrid& grid, double value);
  const TorusGrid& grid() const noexcept { return values.grid(); }
};

struct EnvelopeOptions {
  double omega_relax = 1.5;
  double psor_tol = 1e-4;     // max update per sweep before the active-set pass
  int psor_max_sweeps = 20000;
  bool active_set = true;
  int max_active_set_iters = 500;
  double lcp_tol = 1e-10;
  double contact_tol = 1e-7;
};

struct EnvelopeSolution {
  ScalarField u;
  Obstacle obstacle;
  std::vector<std::uint8_t> contact;  // D = {φ₀ - u <= contact_tol}
  double comp_residual;               // max |min(f_θ + κΔu, φ₀ - u)|
  double contact_tol;
  int psor_sweeps;
  int active_set_iters;

  std::size_t contact_count() const;
  /// φ₀ - u on constrained nodes, +inf elsewhere.
  ScalarField gap() const;
};

/// P_θ(φ₀): largest u <= φ₀ with f_θ + κΔu >= 0, as the discrete LCP
///   u <= φ₀,  f_θ + κΔu >= 0,  (φ₀ - u)(f_θ + κΔu) = 0.
/// Projected SOR to psor_tol, then primal-dual active-set iterations until
/// the contact set is stable.
EnvelopeSolution project(const BackgroundForm& theta, const Obstacle& obstacle,
                         const EnvelopeOptions& opts = {},
                         const ScalarField* initial = nullptr);

/// u_θ = P_θ(0).
EnvelopeSolution envelope_theta(const BackgroundForm& theta,
                                const EnvelopeOptions& opts = {});

struct DivisorEnvelope {
  EnvelopeSolution solution;  // u_λ
  ScalarField phi;            // φ_λ = u_λ + λ h_s <= 0
  BackgroundForm theta;       // ω - λ θ_L
  double lambda;
};

/// u_λ = P_{θ_λ}(-λ h_s). Throws SeshadriViolation if V - λm <= 0.
DivisorEnvelope envelope_divisor(const BackgroundForm& omega,
                                 const DivisorData& z, double lambda,
                                 const EnvelopeOptions& opts = {},
                                 const ScalarField* initial = nullptr);

struct Point2 {
  double x;
  double y;
};

struct Polyline {
  std::vector<Point2> points;  // unwrapped: consecutive vertices are adjacent
  bool closed = false;
  bool contractible = false;   // closes up without winding around the torus
  double length = 0.0;
  double enclosed_area = 0.0;  // shoelace area, meaningful when contractible

  /// 4πA / L², equal to 1 for a circle.
  double circularity() const;
};

struct FreeBoundary {
  std::vector<Polyline> lines;
  double total_length = 0.0;
};

/// Marching squares on the periodic grid for the level φ₀ - u = contact_tol.
/// Throws EmptyBoundary if the contact mask is empty or full.
FreeBoundary free_boundary(const EnvelopeSolution& sol);

struct LcpCheck {
  double max_obstacle_violation;  // max(u - φ₀) over constrained nodes
  double min_ma_density;          // min(f_θ + κΔu)
  double max_complementarity;     // max |min(f_θ + κΔu, φ₀ - u)|
};
LcpCheck check_lcp(const BackgroundForm& theta, const EnvelopeSolution& sol);

}  // namespace mazt
