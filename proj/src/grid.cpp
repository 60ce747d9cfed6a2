#include "mazt/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "mazt/errors.hpp"

namespace mazt {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) {
    throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
  }
}

}  // namespace

TorusGrid::TorusGrid(int n) : n_(n), h_(1.0 / n) {
  if (n < 8) {
    throw Error(ErrorCode::InvalidArgument,
                "grid needs N >= 8, got " + std::to_string(n));
  }
}

double TorusGrid::torus_distance(double x0, double y0, double x1,
                                 double y1) {
  auto d = [](double a, double b) {
    double t = std::fabs(a - b);
    t -= std::floor(t);
    return std::min(t, 1.0 - t);
  };
  return std::hypot(d(x0, x1), d(y0, y1));
}

ScalarField::ScalarField(const TorusGrid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match grid");
  }
}

ScalarField ScalarField::sample(
    const TorusGrid& grid, const std::function<double(double, double)>& f) {
  ScalarField out(grid);
  const int n = grid.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.at(i, j) = f(grid.x(i), grid.y(j));
  }
  return out;
}

double ScalarField::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::fabs(v));
  return s;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator+(ScalarField a, double c) { return a += c; }

void laplacian_into(const ScalarField& f, ScalarField& out) {
  require_same_grid(f, out);
  const TorusGrid& g = f.grid();
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  const double* v = f.data();
  double* o = out.data();
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * n;
    const std::size_t up = static_cast<std::size_t>(i == n - 1 ? 0 : i + 1) * n;
    const std::size_t dn = static_cast<std::size_t>(i == 0 ? n - 1 : i - 1) * n;
    for (int j = 0; j < n; ++j) {
      const int jr = j == n - 1 ? 0 : j + 1;
      const int jl = j == 0 ? n - 1 : j - 1;
      o[row + j] = (v[up + j] + v[dn + j] + v[row + jr] + v[row + jl] -
                    4.0 * v[row + j]) *
                   inv_h2;
    }
  }
}

ScalarField laplacian(const ScalarField& f) {
  ScalarField out(f.grid());
  laplacian_into(f, out);
  return out;
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_area();
}

double mean(const ScalarField& f) { return integrate(f); }

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().cell_area();
}

double grad_sup_norm(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const int n = g.n();
  const double inv_2h = 0.5 / g.h();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double gx = (f.at(i + 1, j) - f.at(i - 1, j)) * inv_2h;
      const double gy = (f.at(i, j + 1) - f.at(i, j - 1)) * inv_2h;
      best = std::max(best, std::hypot(gx, gy));
    }
  }
  return best;
}

struct SpectralSolver::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

SpectralSolver::SpectralSolver(const TorusGrid& grid)
    : grid_(grid), plans_(std::make_unique<Plans>()) {
  const int n = grid.n();
  const int nc = n / 2 + 1;
  eig_.resize(static_cast<std::size_t>(n) * nc);
  for (int k1 = 0; k1 < n; ++k1) {
    for (int k2 = 0; k2 < nc; ++k2) {
      eig_[static_cast<std::size_t>(k1) * nc + k2] = eigenvalue(k1, k2);
    }
  }
  std::vector<double> real(grid.size());
  auto* spec = fftw_alloc_complex(static_cast<std::size_t>(n) * nc);
  {
    std::lock_guard lock(planner_mutex());
    plans_->forward = fftw_plan_dft_r2c_2d(n, n, real.data(), spec,
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->backward = fftw_plan_dft_c2r_2d(n, n, spec, real.data(),
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  fftw_free(spec);
}

SpectralSolver::~SpectralSolver() {
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

double SpectralSolver::eigenvalue(int k1, int k2) const {
  const double h = grid_.h();
  const double s1 = std::sin(std::numbers::pi * k1 * h);
  const double s2 = std::sin(std::numbers::pi * k2 * h);
  return -4.0 / (h * h) * (s1 * s1 + s2 * s2);
}

ScalarField SpectralSolver::poisson(const ScalarField& rhs,
                                    double mean_tol) const {
  if (!(rhs.grid() == grid_)) {
    throw Error(ErrorCode::InvalidArgument, "rhs on a different grid");
  }
  double abs_int = 0.0;
  for (double v : rhs.values()) abs_int += std::fabs(v);
  abs_int *= grid_.cell_area();
  const double total = integrate(rhs);
  if (std::fabs(total) > mean_tol * (1.0 + abs_int)) {
    throw Error(ErrorCode::NonZeroMean,
                "poisson rhs has integral " + std::to_string(total));
  }
  const int n = grid_.n();
  const int nc = n / 2 + 1;
  std::vector<double> work(rhs.values().begin(), rhs.values().end());
  auto* spec = fftw_alloc_complex(static_cast<std::size_t>(n) * nc);
  fftw_execute_dft_r2c(plans_->forward, work.data(), spec);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t k = 0; k < eig_.size(); ++k) {
    if (k == 0) {
      spec[0][0] = spec[0][1] = 0.0;
      continue;
    }
    const double f = scale / eig_[k];
    spec[k][0] *= f;
    spec[k][1] *= f;
  }
  fftw_execute_dft_c2r(plans_->backward, spec, work.data());
  fftw_free(spec);
  return ScalarField(grid_, std::move(work));
}

void SpectralSolver::shifted_inverse(const ScalarField& rhs, double kappa,
                                     double sigma, ScalarField& out) const {
  const int n = grid_.n();
  const int nc = n / 2 + 1;
  std::copy(rhs.values().begin(), rhs.values().end(), out.data());
  auto* spec = fftw_alloc_complex(static_cast<std::size_t>(n) * nc);
  fftw_execute_dft_r2c(plans_->forward, out.data(), spec);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t k = 0; k < eig_.size(); ++k) {
    const double f = scale / (sigma - kappa * eig_[k]);
    spec[k][0] *= f;
    spec[k][1] *= f;
  }
  fftw_execute_dft_c2r(plans_->backward, spec, out.data());
  fftw_free(spec);
}

const SpectralSolver& spectral_solver_for(const TorusGrid& grid) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<SpectralSolver>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[grid.n()];
  if (!slot) slot = std::make_unique<SpectralSolver>(grid);
  return *slot;
}

ScalarField poisson_solve(const ScalarField& rhs, double mean_tol) {
  return spectral_solver_for(rhs.grid()).poisson(rhs, mean_tol);
}

}  // namespace mazt
