#include "mazt/envelope.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "mazt/errors.hpp"
#include "mazt/ma_solver.hpp"

namespace mazt {

Obstacle Obstacle::from_field(ScalarField values) {
  std::vector<std::uint8_t> c(values.size(), 0);
  bool any = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    c[k] = std::isfinite(values[k]) ? 1 : 0;
    any = any || c[k];
    if (!c[k]) values[k] = 0.0;
  }
  if (!any) {
    throw Error(ErrorCode::InvalidArgument, "obstacle has no finite node");
  }
  return Obstacle{std::move(values), std::move(c)};
}

Obstacle Obstacle::constant(const TorusGrid& grid, double value) {
  return from_field(ScalarField(grid, value));
}

std::size_t EnvelopeSolution::contact_count() const {
  return static_cast<std::size_t>(
      std::count(contact.begin(), contact.end(), std::uint8_t{1}));
}

ScalarField EnvelopeSolution::gap() const {
  ScalarField g(u.grid());
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] = obstacle.constrained[k] ? obstacle.values[k] - u[k] : INFINITY;
  }
  return g;
}

namespace {

int psor(const ScalarField& f, const Obstacle& obs, double omega, double tol,
         int max_sweeps, ScalarField& u) {
  const TorusGrid& g = f.grid();
  const int n = g.n();
  const double src = g.h() * g.h() / kKappa;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      const int ip = i == n - 1 ? 0 : i + 1;
      const int im = i == 0 ? n - 1 : i - 1;
      for (int j = 0; j < n; ++j) {
        const int jp = j == n - 1 ? 0 : j + 1;
        const int jm = j == 0 ? n - 1 : j - 1;
        const std::size_t k = g.index(i, j);
        const double nb = u[g.index(ip, j)] + u[g.index(im, j)] +
                          u[g.index(i, jp)] + u[g.index(i, jm)];
        const double gs = 0.25 * (nb + f[k] * src);
        double next = u[k] + omega * (gs - u[k]);
        if (obs.constrained[k]) next = std::min(next, obs.values[k]);
        max_change = std::max(max_change, std::fabs(next - u[k]));
        u[k] = next;
      }
    }
    if (max_change <= tol) return sweep;
  }
  return max_sweeps;
}

// Solves κΔu = -f on the inactive set with u = φ₀ on the active set.
void solve_inactive(const ScalarField& f, const Obstacle& obs,
                    const std::vector<std::uint8_t>& active, ScalarField& u) {
  const TorusGrid& g = f.grid();
  const int n = g.n();
  std::vector<int> slot(g.size(), -1);
  int m = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!active[k]) slot[k] = m++;
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (active[k]) u[k] = obs.values[k];
  }
  if (m == 0) return;
  const double src = g.h() * g.h() / kKappa;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 5);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t k = g.index(i, j);
      const int r = slot[k];
      if (r < 0) continue;
      double b = f[k] * src;
      trip.emplace_back(r, r, 4.0);
      const std::size_t nbs[4] = {g.index(i + 1, j), g.index(i - 1, j),
                                  g.index(i, j + 1), g.index(i, j - 1)};
      for (std::size_t nb : nbs) {
        if (slot[nb] >= 0) {
          trip.emplace_back(r, slot[nb], -1.0);
        } else {
          b += obs.values[nb];
        }
      }
      rhs[r] = b;
    }
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence,
                "inactive-set system is singular (no contact node?)");
  }
  const Eigen::VectorXd x = llt.solve(rhs);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (slot[k] >= 0) u[k] = x[slot[k]];
  }
}

double complementarity(const ScalarField& w, const ScalarField& u,
                       const Obstacle& obs) {
  double worst = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = obs.constrained[k] ? std::min(w[k], obs.values[k] - u[k])
                                        : w[k];
    worst = std::max(worst, std::fabs(r));
  }
  return worst;
}

}  // namespace

EnvelopeSolution project(const BackgroundForm& theta, const Obstacle& obstacle,
                         const EnvelopeOptions& opts,
                         const ScalarField* initial) {
  if (!(theta.volume > 0.0)) {
    throw Error(ErrorCode::InfeasibleClass,
                "class volume " + std::to_string(theta.volume) +
                    " <= 0: no bounded envelope");
  }
  if (!(obstacle.grid() == theta.grid())) {
    throw Error(ErrorCode::InvalidArgument, "obstacle on a different grid");
  }
  const TorusGrid& g = theta.grid();
  const ScalarField& f = theta.density;

  double top = -INFINITY;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (obstacle.constrained[k]) top = std::max(top, obstacle.values[k]);
  }
  ScalarField u(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    u[k] = initial ? std::min((*initial)[k], obstacle.constrained[k]
                                                  ? obstacle.values[k]
                                                  : INFINITY)
                   : (obstacle.constrained[k] ? obstacle.values[k] : top);
  }

  EnvelopeSolution sol{u, obstacle, {}, INFINITY, opts.contact_tol, 0, 0};
  sol.psor_sweeps = psor(f, obstacle, opts.omega_relax, opts.psor_tol,
                         opts.psor_max_sweeps, u);

  ScalarField w(g);
  auto refresh_w = [&] {
    laplacian_into(u, w);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = f[k] + kKappa * w[k];
  };

  if (opts.active_set) {
    const double flip = 0.1 * opts.lcp_tol;
    std::vector<std::uint8_t> active(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      active[k] = obstacle.constrained[k] && u[k] >= obstacle.values[k];
    }
    bool stable = false;
    for (int it = 1; it <= opts.max_active_set_iters; ++it) {
      if (std::find(active.begin(), active.end(), 1) == active.end()) {
        // Empty active set: pin the node with the smallest gap.
        std::size_t best = 0;
        double best_gap = INFINITY;
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (!obstacle.constrained[k]) continue;
          const double gap = obstacle.values[k] - u[k];
          if (gap < best_gap) {
            best_gap = gap;
            best = k;
          }
        }
        active[best] = 1;
      }
      solve_inactive(f, obstacle, active, u);
      refresh_w();
      sol.active_set_iters = it;
      bool changed = false;
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (!obstacle.constrained[k]) continue;
        if (active[k] && w[k] < -flip) {
          active[k] = 0;
          changed = true;
        } else if (!active[k] && obstacle.values[k] - u[k] < -flip) {
          active[k] = 1;
          changed = true;
        }
      }
      if (!changed) {
        stable = true;
        break;
      }
    }
    if (!stable) {
      throw Error(ErrorCode::NoConvergence,
                  "active-set iteration did not settle in " +
                      std::to_string(opts.max_active_set_iters) + " passes");
    }
  } else {
    refresh_w();
  }

  sol.comp_residual = complementarity(w, u, obstacle);
  if (sol.comp_residual > opts.lcp_tol) {
    throw Error(ErrorCode::NoConvergence,
                "complementarity residual " +
                    std::to_string(sol.comp_residual) + " exceeds lcp_tol");
  }
  sol.contact.assign(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    sol.contact[k] = obstacle.constrained[k] &&
                     obstacle.values[k] - u[k] <= opts.contact_tol;
  }
  sol.u = std::move(u);
  return sol;
}

EnvelopeSolution envelope_theta(const BackgroundForm& theta,
                                const EnvelopeOptions& opts) {
  EnvelopeSolution sol =
      project(theta, Obstacle::constant(theta.grid(), 0.0), opts);
  if (sol.contact_count() > 0 && std::fabs(sol.u.max()) > opts.contact_tol) {
    throw Error(ErrorCode::NoConvergence,
                "envelope touches 0 but sup u = " + std::to_string(sol.u.max()));
  }
  return sol;
}

DivisorEnvelope envelope_divisor(const BackgroundForm& omega,
                                 const DivisorData& z, double lambda,
                                 const EnvelopeOptions& opts,
                                 const ScalarField* initial) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  }
  const double twisted = omega.volume - lambda * z.total_multiplicity;
  if (!(twisted > 0.0)) {
    throw Error(ErrorCode::SeshadriViolation,
                "V - lambda*m = " + std::to_string(twisted) + " <= 0");
  }
  BackgroundForm theta = twist(omega, z, lambda, false);
  Obstacle obs = Obstacle::from_field(-lambda * z.log_norm);
  EnvelopeSolution sol = project(theta, obs, opts, initial);
  ScalarField phi = sol.u + lambda * z.log_norm;
  return DivisorEnvelope{std::move(sol), std::move(phi), std::move(theta),
                         lambda};
}

LcpCheck check_lcp(const BackgroundForm& theta, const EnvelopeSolution& sol) {
  const ScalarField w = ma_density(theta, sol.u);
  LcpCheck c{-INFINITY, w.min(), 0.0};
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (sol.obstacle.constrained[k]) {
      c.max_obstacle_violation =
          std::max(c.max_obstacle_violation, sol.u[k] - sol.obstacle.values[k]);
    }
  }
  c.max_complementarity = complementarity(w, sol.u, sol.obstacle);
  return c;
}

double Polyline::circularity() const {
  if (length <= 0.0) return 0.0;
  return 4.0 * std::numbers::pi * std::fabs(enclosed_area) / (length * length);
}

namespace {

struct Segment {
  std::size_t e0, e1;
  Point2 p0, p1;
};

}  // namespace

FreeBoundary free_boundary(const EnvelopeSolution& sol) {
  const std::size_t nc = sol.contact_count();
  const TorusGrid& g = sol.u.grid();
  if (nc == 0 || nc == g.size()) {
    throw Error(ErrorCode::EmptyBoundary,
                nc == 0 ? "contact set is empty" : "contact set is everything");
  }
  const int n = g.n();
  const double h = g.h();
  // Level function: positive in the non-contact region. The gap grows
  // quadratically off the contact set, so its square root is close to a
  // distance and interpolates the crossing much better than the gap itself.
  ScalarField lv(g);
  const double root_tol = std::sqrt(sol.contact_tol);
  for (std::size_t k = 0; k < g.size(); ++k) {
    lv[k] = sol.obstacle.constrained[k]
                ? std::sqrt(std::max(0.0, sol.obstacle.values[k] - sol.u[k])) - root_tol
                : 1.0;
  }
  auto inside = [&](int i, int j) { return lv.at(i, j) > 0.0; };
  auto h_edge = [&](int i, int j) { return 2 * g.index(i, j); };
  auto v_edge = [&](int i, int j) { return 2 * g.index(i, j) + 1; };
  // Fraction along the edge from node (i, j) to (i + di, j + dj). When the
  // free end has a free neighbour further out, the crossing is extrapolated
  // from those two values (the level is close to linear in distance there);
  // otherwise it is linear interpolation.
  auto cross = [&](int i, int j, int di, int dj) {
    const double va = lv.at(i, j), vb = lv.at(i + di, j + dj);
    const bool a_free = va > 0.0;
    const int fi = a_free ? i : i + di, fj = a_free ? j : j + dj;
    const int oi = a_free ? i - di : i + 2 * di, oj = a_free ? j - dj : j + 2 * dj;
    const double vf = lv.at(fi, fj), vo = lv.at(oi, oj);
    double t = a_free ? va / (va - vb) : 1.0 - vb / (vb - va);
    if (vo > vf) {
      const double back = std::clamp(vf / (vo - vf), 0.0, 1.0);
      t = a_free ? back : 1.0 - back;
    }
    return t;
  };

  std::vector<Segment> segs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double va = lv.at(i, j), vb = lv.at(i + 1, j);
      const double vc = lv.at(i + 1, j + 1), vd = lv.at(i, j + 1);
      const bool a = inside(i, j), b = inside(i + 1, j);
      const bool c = inside(i + 1, j + 1), d = inside(i, j + 1);
      const int mask = a | (b << 1) | (c << 2) | (d << 3);
      if (mask == 0 || mask == 15) continue;
      const double x0 = g.x(i), y0 = g.y(j);
      struct E {
        std::size_t id;
        Point2 p;
      };
      const E e[4] = {
          {h_edge(i, j), {x0 + cross(i, j, 1, 0) * h, y0}},
          {v_edge(i + 1, j), {x0 + h, y0 + cross(i + 1, j, 0, 1) * h}},
          {h_edge(i, j + 1), {x0 + cross(i, j + 1, 1, 0) * h, y0 + h}},
          {v_edge(i, j), {x0, y0 + cross(i, j, 0, 1) * h}},
      };
      std::vector<int> hit;
      if (a != b) hit.push_back(0);
      if (b != c) hit.push_back(1);
      if (c != d) hit.push_back(2);
      if (d != a) hit.push_back(3);
      auto add = [&](int p, int q) {
        segs.push_back({e[p].id, e[q].id, e[p].p, e[q].p});
      };
      if (hit.size() == 2) {
        add(hit[0], hit[1]);
      } else {
        const bool center = 0.25 * (va + vb + vc + vd) > 0.0;
        if (center == a) {
          add(0, 1);
          add(2, 3);
        } else {
          add(3, 0);
          add(1, 2);
        }
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> by_edge;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_edge[segs[s].e0].push_back(s);
    by_edge[segs[s].e1].push_back(s);
  }
  auto nearest_image = [](Point2 p, Point2 ref) {
    p.x -= std::round(p.x - ref.x);
    p.y -= std::round(p.y - ref.y);
    return p;
  };

  FreeBoundary fb;
  std::vector<std::uint8_t> used(segs.size(), 0);
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    Polyline line;
    used[s0] = 1;
    line.points.push_back(segs[s0].p0);
    line.points.push_back(nearest_image(segs[s0].p1, segs[s0].p0));
    const std::size_t start_edge = segs[s0].e0;
    std::size_t edge = segs[s0].e1;
    std::size_t cur = s0;
    while (true) {
      std::size_t next = cur;
      for (std::size_t cand : by_edge[edge]) {
        if (!used[cand]) {
          next = cand;
          break;
        }
      }
      if (next == cur) {
        line.closed = edge == start_edge;
        break;
      }
      used[next] = 1;
      const Segment& sg = segs[next];
      const bool forward = sg.e0 == edge;
      const Point2 far = forward ? sg.p1 : sg.p0;
      const std::size_t far_edge = forward ? sg.e1 : sg.e0;
      if (far_edge == start_edge) {
        line.closed = true;
        const Point2 back = nearest_image(far, line.points.back());
        line.contractible = std::fabs(back.x - line.points.front().x) < 0.5 &&
                            std::fabs(back.y - line.points.front().y) < 0.5;
        break;
      }
      line.points.push_back(nearest_image(far, line.points.back()));
      edge = far_edge;
      cur = next;
    }
    const std::size_t np = line.points.size();
    double len = 0.0, area = 0.0;
    for (std::size_t k = 0; k + 1 < np; ++k) {
      len += std::hypot(line.points[k + 1].x - line.points[k].x,
                        line.points[k + 1].y - line.points[k].y);
    }
    if (line.closed) {
      const Point2 back =
          nearest_image(line.points.front(), line.points.back());
      len += std::hypot(back.x - line.points.back().x,
                        back.y - line.points.back().y);
      if (line.contractible) {
        for (std::size_t k = 0; k < np; ++k) {
          const Point2& p = line.points[k];
          const Point2& q = line.points[(k + 1) % np];
          area += p.x * q.y - q.x * p.y;
        }
        area = 0.5 * std::fabs(area);
      }
    }
    line.length = len;
    line.enclosed_area = area;
    fb.total_length += len;
    fb.lines.push_back(std::move(line));
  }
  return fb;
}

}  // namespace mazt
