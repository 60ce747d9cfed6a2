#include "mazt/forms.hpp"

#include <cmath>
#include <string>

#include "mazt/errors.hpp"

namespace mazt {

BackgroundForm make_background(ScalarField density, bool require_kahler) {
  if (!density.all_finite()) {
    throw Error(ErrorCode::InvalidArgument,
                "background density has non-finite values");
  }
  const double v = integrate(density);
  if (require_kahler && !(v > 0.0)) {
    throw Error(ErrorCode::NonKahler,
                "class volume " + std::to_string(v) + " is not positive");
  }
  return BackgroundForm{std::move(density), v};
}

BackgroundForm make_background(const TorusGrid& grid,
                               const std::function<double(double, double)>& f,
                               bool require_kahler) {
  return make_background(ScalarField::sample(grid, f), require_kahler);
}

VolumeDensity make_volume(ScalarField raw) {
  if (!raw.all_finite() || !(raw.min() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "volume density must be finite and strictly positive");
  }
  raw *= 1.0 / integrate(raw);
  return VolumeDensity{std::move(raw)};
}

ScalarField dirac_density(const DivisorData& z) {
  const TorusGrid& g = z.grid();
  ScalarField d(g);
  for (const auto& p : z.points) {
    d.at(p.i, p.j) += p.multiplicity / g.cell_area();
  }
  return d;
}

DivisorData make_divisor(const TorusGrid& grid, std::vector<DivisorPoint> points,
                         std::optional<ScalarField> curvature,
                         double mass_tol) {
  int m = 0;
  for (auto& p : points) {
    if (p.multiplicity <= 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "divisor multiplicities must be positive");
    }
    p.i = grid.wrap(p.i);
    p.j = grid.wrap(p.j);
    m += p.multiplicity;
  }
  if (m <= 0) {
    throw Error(ErrorCode::InvalidArgument, "divisor has no points");
  }
  const bool constant = !curvature.has_value();
  ScalarField f_l = constant ? ScalarField(grid, static_cast<double>(m))
                             : std::move(*curvature);
  if (!(f_l.grid() == grid)) {
    throw Error(ErrorCode::InvalidArgument, "curvature on a different grid");
  }
  const double mass = integrate(f_l);
  if (std::fabs(mass - m) > mass_tol * std::max(1.0, static_cast<double>(m))) {
    throw Error(ErrorCode::BadMass, "curvature integrates to " +
                                        std::to_string(mass) +
                                        ", expected " + std::to_string(m));
  }
  DivisorData z{std::move(points), m, f_l, ScalarField(grid), constant};
  ScalarField rhs = dirac_density(z) - z.curvature;
  rhs *= 1.0 / kKappa;
  // Re-centre to exact zero mean: the supplied f_L only matches m to mass_tol.
  rhs += -mean(rhs);
  ScalarField h = poisson_solve(rhs);
  h += -h.max();
  z.log_norm = std::move(h);
  return z;
}

BackgroundForm twist(const BackgroundForm& theta, const DivisorData& z,
                     double lambda, bool require_kahler) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "twist needs lambda >= 0");
  }
  ScalarField d = theta.density;
  if (lambda != 0.0) d -= lambda * z.curvature;
  const double v = theta.volume - lambda * z.total_multiplicity;
  if (require_kahler && !(v > 0.0)) {
    throw Error(ErrorCode::NonKahler,
                "twisted volume " + std::to_string(v) + " is not positive");
  }
  return BackgroundForm{std::move(d), v};
}

SeshadriEstimate seshadri_constant(const BackgroundForm& omega,
                                   const DivisorData& z) {
  return {omega.volume / z.total_multiplicity, z.constant_curvature};
}

SnappedNode snap_to_node(const TorusGrid& grid, double x, double y) {
  const int n = grid.n();
  const int i = grid.wrap(static_cast<int>(std::lround(x * n)));
  const int j = grid.wrap(static_cast<int>(std::lround(y * n)));
  return {i, j, TorusGrid::torus_distance(x, y, grid.x(i), grid.y(j))};
}

}  // namespace mazt
