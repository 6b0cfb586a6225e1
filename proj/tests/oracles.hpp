#pragma once

// Test-side oracles, independent of the library code paths they check:
// closed-form Heisenberg geodesics, brute-force dual-norm sup, central
// finite differences, straight-line Minkowski distances, and spec builders.

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "subfinsler/expr.hpp"
#include "subfinsler/manifold.hpp"
#include "subfinsler/rng.hpp"
#include "subfinsler/spec_io.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// --- spec documents -------------------------------------------------------

inline std::string heisenberg_json() {
  return R"({"dim": 3,
             "frames": [["1","0","-y/2"], ["0","1","x/2"]],
             "norm": {"type": "euclidean"}})";
}

inline std::string euclidean_plane_json() {
  return R"({"dim": 2,
             "frames": [["1","0"], ["0","1"]],
             "norm": {"type": "euclidean"}})";
}

inline std::string boxed_plane_json() {
  return R"({"dim": 2,
             "domain": {"min": [-1,-1], "max": [1,1]},
             "frames": [["1","0"], ["0","1"]],
             "norm": {"type": "euclidean"}})";
}

inline std::string involutive_json() {
  return R"({"dim": 3,
             "frames": [["1","0","0"], ["0","1","0"]],
             "norm": {"type": "euclidean"}})";
}

inline std::string quadratic_plane_json() {
  return R"({"dim": 2,
             "frames": [["1","0"], ["0","1"]],
             "norm": {"type": "quadratic", "G": [[4,0],[0,1]]}})";
}

inline std::string randers_plane_json() {
  return R"({"dim": 2,
             "frames": [["1","0"], ["0","1"]],
             "norm": {"type": "randers", "G": [[1,0],[0,1]], "b": [0.5, 0]}})";
}

inline subfinsler::ManifoldSpec heisenberg() {
  return subfinsler::parse_manifold_spec(heisenberg_json());
}
inline subfinsler::ManifoldSpec euclidean_plane() {
  return subfinsler::parse_manifold_spec(euclidean_plane_json());
}
inline subfinsler::ManifoldSpec boxed_plane() {
  return subfinsler::parse_manifold_spec(boxed_plane_json());
}
inline subfinsler::ManifoldSpec involutive() {
  return subfinsler::parse_manifold_spec(involutive_json());
}
inline subfinsler::ManifoldSpec quadratic_plane() {
  return subfinsler::parse_manifold_spec(quadratic_plane_json());
}
inline subfinsler::ManifoldSpec randers_plane() {
  return subfinsler::parse_manifold_spec(randers_plane_json());
}

// --- Heisenberg closed forms ----------------------------------------------
//
// Frames X1 = dx - (y/2) dz, X2 = dy + (x/2) dz, Euclidean fiber norm.
// From the origin with initial covector (a, b, c) the extremal is
//   x(t) = (a sin(ct) - b(1 - cos(ct))) / c
//   y(t) = (a(1 - cos(ct)) + b sin(ct)) / c
//   z(t) = (a^2 + b^2)(ct - sin(ct)) / (2 c^2)
// (straight line for c = 0), derived by solving u' = ic u for the rotating
// fiber momentum and integrating the planar projection.

inline VectorXd heisenberg_geodesic(double a, double b, double c, double t) {
  VectorXd q(3);
  if (c == 0.0) {
    q << a * t, b * t, 0.0;
    return q;
  }
  double s = std::sin(c * t), k = 1.0 - std::cos(c * t);
  q << (a * s - b * k) / c, (a * k + b * s) / c,
      (a * a + b * b) * (c * t - s) / (2.0 * c * c);
  return q;
}

/// d(origin, (0,0,h)): the minimal planar loop enclosing signed area h is a
/// full circle, so the distance is 2 sqrt(pi h).
inline double heisenberg_z_distance(double h) { return 2.0 * std::sqrt(M_PI * std::abs(h)); }

/// d(origin, (x,y,0)) = |(x,y)|: straight segments lift horizontally.
inline double heisenberg_planar_distance(double x, double y) { return std::hypot(x, y); }

// --- Minkowski-plane straight-line distances -------------------------------

/// Distance between points of a constant-frame Minkowski plane is the norm
/// of the displacement (straight lines are minimal by convexity).
inline double minkowski_line_distance(const subfinsler::MinkowskiNorm& norm,
                                      const VectorXd& from, const VectorXd& to) {
  return norm.value(VectorXd(to - from));
}

// --- brute-force dual norm (k = 2) -----------------------------------------

/// F*(u) = sup { u.w : F(w) = 1 } over a dense angular grid of the
/// indicatrix.
inline double dual_norm_bruteforce(const subfinsler::MinkowskiNorm& norm, const VectorXd& u,
                                   int samples = 100000) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    double th = 2.0 * M_PI * static_cast<double>(i) / samples;
    VectorXd w(2);
    w << std::cos(th), std::sin(th);
    double F = norm.value(w);
    best = std::max(best, u.dot(w) / F);
  }
  return best;
}

// --- finite differences -----------------------------------------------------

inline double central_diff(const std::function<double(double)>& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& u,
                            double h) {
  VectorXd g(u.size());
  VectorXd probe = u;
  for (int i = 0; i < u.size(); ++i) {
    probe = u;
    probe[i] += h;
    double fp = f(probe);
    probe[i] = u[i] - h;
    g[i] = (fp - f(probe)) / (2.0 * h);
  }
  return g;
}

inline MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f, const VectorXd& u,
                           double h) {
  const int k = static_cast<int>(u.size());
  MatrixXd M(k, k);
  VectorXd probe = u;
  double f0 = f(u);
  for (int i = 0; i < k; ++i) {
    probe = u;
    probe[i] += h;
    double fp = f(probe);
    probe[i] = u[i] - h;
    double fm = f(probe);
    M(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (int j = i + 1; j < k; ++j) {
      probe = u;
      probe[i] += h;
      probe[j] += h;
      double fpp = f(probe);
      probe[j] = u[j] - h;
      double fpm = f(probe);
      probe[i] = u[i] - h;
      double fmm = f(probe);
      probe[j] = u[j] + h;
      double fmp = f(probe);
      M(i, j) = M(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return M;
}

// --- random expression trees ------------------------------------------------

inline subfinsler::ExprPtr random_expr(subfinsler::DetRng& rng, int depth, int n_vars) {
  using subfinsler::Expr;
  using subfinsler::ExprKind;
  if (depth <= 0 || rng.uniform() < 0.25) {
    if (rng.uniform() < 0.5) return Expr::literal(rng.uniform(0.2, 2.5));
    return Expr::variable(static_cast<int>(rng.next_u64() % n_vars));
  }
  switch (rng.next_u64() % 10) {
    case 0: return Expr::negate(random_expr(rng, depth - 1, n_vars));
    case 1: return Expr::add(random_expr(rng, depth - 1, n_vars), random_expr(rng, depth - 1, n_vars));
    case 2: return Expr::sub(random_expr(rng, depth - 1, n_vars), random_expr(rng, depth - 1, n_vars));
    case 3: return Expr::mul(random_expr(rng, depth - 1, n_vars), random_expr(rng, depth - 1, n_vars));
    case 4: return Expr::div(random_expr(rng, depth - 1, n_vars), random_expr(rng, depth - 1, n_vars));
    case 5: return Expr::pow(random_expr(rng, depth - 1, n_vars),
                             static_cast<long>(rng.next_u64() % 5));
    case 6: return Expr::call(ExprKind::Sin, random_expr(rng, depth - 1, n_vars));
    case 7: return Expr::call(ExprKind::Cos, random_expr(rng, depth - 1, n_vars));
    case 8: return Expr::call(ExprKind::Exp, random_expr(rng, depth - 1, n_vars));
    default: return Expr::call(ExprKind::Sqrt, random_expr(rng, depth - 1, n_vars));
  }
}

}  // namespace oracle
