#include "subfinsler/duality.hpp"

#include <cmath>
#include <limits>

namespace subfinsler {

FiberMomentum reduce_covector(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& p) {
  spec.require_in_domain(x);
  if (p.size() != spec.dim()) throw ValidationError("covector has wrong dimension");
  Eigen::MatrixXd A = frame_matrix(spec, x);
  return A.transpose() * p;
}

double lagrangian(const MinkowskiNorm& norm, const Eigen::VectorXd& w) {
  if (w.isZero(0.0)) return 0.0;
  double F = norm.value(w);
  return 0.5 * F * F;
}

FiberMomentum legendre_fiber_fwd(const MinkowskiNorm& norm, const Eigen::VectorXd& w) {
  return norm.gradient(w);
}

Eigen::VectorXd legendre_fiber_inv(const MinkowskiNorm& norm, const FiberMomentum& u,
                                   const Eigen::VectorXd* warm_start) {
  if (u.size() != norm.dim()) throw ValidationError("fiber momentum has wrong dimension");
  if (u.isZero(0.0)) throw ZeroVector("inverse Legendre map undefined at u = 0");

  // Solve on the normalized problem grad L(w) = u/|u| and scale back; both
  // sides are 1-homogeneous, so this conditions the solve uniformly.
  const double s = u.norm();
  const Eigen::VectorXd target = u / s;
  // Contract bound is 1e-10 * (1 + |u|); quadratic convergence normally
  // lands at the much tighter target, which the homogeneity and g*
  // tolerances downstream rely on.
  const double accept = 1e-10 * (1.0 + s) / s;
  const double tight = 1e-14;

  Eigen::VectorXd w = warm_start && !warm_start->isZero(0.0) ? (*warm_start / s) : target;
  if (w.isZero(0.0)) w = target;

  Eigen::VectorXd residual = norm.gradient(w) - target;
  double rnorm = residual.norm();
  for (int it = 0; it < 50 && rnorm > tight; ++it) {
    Eigen::MatrixXd H = norm.hessian(w);
    Eigen::VectorXd step = H.llt().solve(-residual);
    if (!step.allFinite()) step = H.ldlt().solve(-residual);
    if (!step.allFinite()) break;

    // Backtracking on the residual norm; skip candidates at exactly 0.
    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::VectorXd cand = w + alpha * step;
      if (!cand.isZero(0.0)) {
        Eigen::VectorXd r2 = norm.gradient(cand) - target;
        double r2norm = r2.norm();
        if (r2norm < rnorm) {
          w = std::move(cand);
          residual = std::move(r2);
          rnorm = r2norm;
          improved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!improved) break;  // at the floating-point floor
  }
  if (rnorm <= accept) return s * w;
  throw NoConvergence("inverse Legendre Newton failed; norm violates its invariants");
}

double fiber_hamiltonian(const MinkowskiNorm& norm, const FiberMomentum& u) {
  if (u.isZero(0.0)) return 0.0;
  Eigen::VectorXd w = legendre_fiber_inv(norm, u);
  double H = u.dot(w) - lagrangian(norm, w);
  return H > 0.0 ? H : 0.0;
}

double dual_norm(const MinkowskiNorm& norm, const FiberMomentum& u) {
  if (u.size() == norm.dim() && u.isZero(0.0))
    throw ZeroVector("dual norm undefined at u = 0");
  return std::sqrt(2.0 * fiber_hamiltonian(norm, u));
}

double sub_hamiltonian(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& p) {
  return fiber_hamiltonian(spec.norm(), reduce_covector(spec, x, p));
}

Eigen::MatrixXd g_star_fiber(const MinkowskiNorm& norm, const FiberMomentum& u) {
  if (u.size() != norm.dim()) throw ValidationError("fiber momentum has wrong dimension");
  if (u.isZero(0.0)) throw ZeroVector("g* undefined at u = 0");
  const int k = norm.dim();
  switch (norm.type()) {
    case MinkowskiNorm::Type::Euclidean: return Eigen::MatrixXd::Identity(k, k);
    case MinkowskiNorm::Type::Quadratic:
      return norm.G().llt().solve(Eigen::MatrixXd::Identity(k, k));
    case MinkowskiNorm::Type::Randers: {
      // Central differences of the exact fiber derivative dH/du = L_H(u)
      // at the standard step. Differencing H values instead would sit on a
      // noise floor of eps/h^2 ~ 6e-6, far above the g* tolerances.
      const double h =
          std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + u.norm());
      Eigen::MatrixXd M(k, k);
      Eigen::VectorXd probe = u;
      Eigen::VectorXd w0 = legendre_fiber_inv(norm, u);
      for (int i = 0; i < k; ++i) {
        probe = u;
        probe[i] += h;
        Eigen::VectorXd wp = legendre_fiber_inv(norm, probe, &w0);
        probe[i] = u[i] - h;
        Eigen::VectorXd wm = legendre_fiber_inv(norm, probe, &w0);
        M.col(i) = (wp - wm) / (2.0 * h);
      }
      return Eigen::MatrixXd(0.5 * (M + M.transpose()));
    }
  }
  throw Error("unreachable");
}

Eigen::MatrixXd g_star(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& p) {
  return g_star_fiber(spec.norm(), reduce_covector(spec, x, p));
}

Eigen::MatrixXd orthonormal_coframe(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& p) {
  FiberMomentum u = reduce_covector(spec, x, p);
  if (u.isZero(0.0)) throw ZeroVector("coframe undefined on the annihilator");
  const int k = spec.rank();
  Eigen::MatrixXd Gstar = g_star_fiber(spec.norm(), u);
  // Inner product for Gram-Schmidt is (g*)^{-1}; the resulting columns
  // satisfy Y Y' = g*, which is what the reconstruction identity needs.
  Eigen::LLT<Eigen::MatrixXd> llt(Gstar);
  if (llt.info() != Eigen::Success)
    throw NoConvergence("g* not positive-definite; norm violates its invariants");
  auto inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(llt.solve(b));
  };
  Eigen::MatrixXd Y(k, k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(k, i);
    for (int j = 0; j < i; ++j) v -= inner(Y.col(j), v) * Y.col(j);
    double nrm = std::sqrt(inner(v, v));
    if (!(nrm > 0.0)) throw NoConvergence("Gram-Schmidt breakdown in coframe");
    Y.col(i) = v / nrm;
  }
  return Y;
}

Eigen::VectorXd lift_covector(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                              const FiberMomentum& u) {
  Eigen::MatrixXd A = frame_matrix(spec, x);
  Eigen::MatrixXd AtA = A.transpose() * A;
  return A * AtA.llt().solve(u);
}

}  // namespace subfinsler
