#pragma once

#include <Eigen/Dense>

#include "subfinsler/manifold.hpp"

namespace subfinsler {

/// Fiber momentum: intrinsic coordinates u_a = <p, X_a(x)> of a covector
/// restricted to the distribution. u = A(x)'p. A full covector with u = 0
/// lies in the annihilator.
using FiberMomentum = Eigen::VectorXd;

/// u = A(x)'p.
FiberMomentum reduce_covector(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& p);

/// Sub-Lagrangian L(w) = F(w)^2 / 2; 0 at w = 0 by continuity.
double lagrangian(const MinkowskiNorm& norm, const Eigen::VectorXd& w);

/// Forward Legendre map: u = grad_w L(w). 1-homogeneous. Throws ZeroVector.
FiberMomentum legendre_fiber_fwd(const MinkowskiNorm& norm, const Eigen::VectorXd& w);

/// Inverse Legendre map: the unique w with grad L(w) = u, by damped Newton
/// (strong convexity gives uniqueness). Residual <= 1e-10 * (1 + |u|).
/// `warm_start`, when nonzero, seeds the iteration.
/// Throws ZeroVector; NoConvergence after 50 iterations.
Eigen::VectorXd legendre_fiber_inv(const MinkowskiNorm& norm, const FiberMomentum& u,
                                   const Eigen::VectorXd* warm_start = nullptr);

/// Fiber-level dual energy H(u) = u.w - L(w) at w = legendre_fiber_inv(u);
/// 0 at u = 0 by continuity.
double fiber_hamiltonian(const MinkowskiNorm& norm, const FiberMomentum& u);

/// Dual norm F*(u) = sqrt(2 H(u)). Throws ZeroVector.
double dual_norm(const MinkowskiNorm& norm, const FiberMomentum& u);

/// Sub-Hamiltonian H(x, p) = F*(A(x)'p)^2 / 2; zero exactly on the
/// annihilator of the distribution.
double sub_hamiltonian(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& p);

/// Hessian of H in fiber-momentum coordinates: analytic for Euclidean and
/// Quadratic norms, central finite differences (step cbrt(eps)*(1+|u|)) for
/// Randers. Symmetric positive-definite, 0-homogeneous in u.
Eigen::MatrixXd g_star_fiber(const MinkowskiNorm& norm, const FiberMomentum& u);

/// g_star in fiber coordinates at the covector p.
Eigen::MatrixXd g_star(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& p);

/// Columns Y_1..Y_k: Gram-Schmidt of the standard fiber basis, in index
/// order, under the inverse of g_star, so that Y Y' = g_star and the
/// reconstruction H = (1/2) sum_i (u . Y_i)^2 holds whenever H is quadratic
/// in u (and at the base covector itself for any norm, by 2-homogeneity).
Eigen::MatrixXd orthonormal_coframe(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& p);

/// Minimal-Euclidean-norm covector with A(x)'p = u: p = A (A'A)^{-1} u.
Eigen::VectorXd lift_covector(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                              const FiberMomentum& u);

}  // namespace subfinsler
