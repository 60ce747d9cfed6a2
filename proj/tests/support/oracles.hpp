#pragma once

#include <functional>
#include <vector>

namespace oracle {

// Independent 1-D reference solvers on the periodic grid x_k = k/n. They
// share nothing with the library beyond the constant 1/(4π).

inline constexpr double kKappa = 0.07957747154594767;  // 1/(4π)

std::vector<double> sample(int n, const std::function<double(double)>& f);

/// Discrete obstacle problem u <= 0, f + κu'' >= 0, complementarity, with the
/// 3-point second difference. Primal-dual active set where every inactive run
/// is a Dirichlet problem solved by the Thomas algorithm.
struct Envelope1d {
  std::vector<double> u;
  std::vector<char> contact;
  int iterations;
};
Envelope1d envelope_1d(const std::vector<double>& f);

/// Continuum envelope for f = 1 + 2cos(2πx): zero outside a centred interval
/// of half-width a with πa = sin(2πa), and κu'' = -f inside.
double cosine_envelope_exact(double x);

/// Periodic 1-D solve of f + κu'' = e^{βu} g by Newton with a cyclic
/// tridiagonal (Sherman-Morrison) linear solve.
std::vector<double> solve_beta_1d(const std::vector<double>& f,
                                  const std::vector<double>& g, double beta,
                                  double tol = 1e-11);

/// Upper concave hull of (xs, ys) evaluated at xs, by brute force over all
/// pairs of bracketing points.
std::vector<double> concave_hull_brute(const std::vector<double>& xs,
                                       const std::vector<double>& ys);

}  // namespace oracle
