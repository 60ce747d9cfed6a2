#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace mazt {

/// Normalisation of dd^c on the unit flat torus: dd^c u = kKappa * (Δu) dA.
/// Every module reads the constant from here.
inline constexpr double kKappa = 1.0 / (4.0 * std::numbers::pi);

/// Periodic N x N grid on the unit-area flat torus. Node (i, j) sits at
/// x = i*h, y = j*h and is stored at index i*N + j.
class TorusGrid {
 public:
  explicit TorusGrid(int n);

  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  double cell_area() const noexcept { return h_ * h_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(wrap(i)) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(wrap(j));
  }
  int wrap(int i) const noexcept {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }
  double x(int i) const noexcept { return i * h_; }
  double y(int j) const noexcept { return j * h_; }

  /// Periodic distance between two points of the unit torus.
  static double torus_distance(double x0, double y0, double x1, double y1);

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.n_ == b.n_;
  }

 private:
  int n_;
  double h_;
};

class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  /// Samples f(x, y) at every node.
  static ScalarField sample(const TorusGrid& grid,
                            const std::function<double(double, double)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double& at(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
  double at(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double max() const;
  double min() const;
  double sup_norm() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double c);

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator+(ScalarField a, double c);

/// Periodic 5-point Laplacian (f_E + f_W + f_N + f_S - 4 f_C) / h^2.
ScalarField laplacian(const ScalarField& f);
void laplacian_into(const ScalarField& f, ScalarField& out);

/// cell_area * sum of values.
double integrate(const ScalarField& f);
double mean(const ScalarField& f);

/// Pointwise product integrated against dA.
double inner(const ScalarField& a, const ScalarField& b);

/// Max over nodes of the Euclidean norm of the centred-difference gradient.
double grad_sup_norm(const ScalarField& f);

/// Spectral inverse of the periodic 5-point stencil. Also applies the shifted
/// operator (sigma - kappa*Δ)^{-1}, which the Newton solver uses as
/// preconditioner. Plans are built once per instance; solve calls are
/// re-entrant.
class SpectralSolver {
 public:
  explicit SpectralSolver(const TorusGrid& grid);
  ~SpectralSolver();
  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  const TorusGrid& grid() const noexcept { return grid_; }

  /// Zero-mean u with laplacian(u) = rhs - mean(rhs). Throws NonZeroMean when
  /// |integrate(rhs)| exceeds mean_tol * (1 + integral of |rhs|).
  ScalarField poisson(const ScalarField& rhs, double mean_tol = 1e-10) const;

  /// Solves (sigma - kappa*Δ) u = rhs. sigma must be > 0.
  void shifted_inverse(const ScalarField& rhs, double kappa, double sigma,
                       ScalarField& out) const;

  /// Discrete stencil eigenvalue of Fourier mode (k1, k2).
  double eigenvalue(int k1, int k2) const;

 private:
  struct Plans;
  TorusGrid grid_;
  std::unique_ptr<Plans> plans_;
  std::vector<double> eig_;  // N x (N/2+1) eigenvalues in r2c layout
};

/// Convenience wrapper around a process-wide cached SpectralSolver.
ScalarField poisson_solve(const ScalarField& rhs, double mean_tol = 1e-10);
const SpectralSolver& spectral_solver_for(const TorusGrid& grid);

}  // namespace mazt
