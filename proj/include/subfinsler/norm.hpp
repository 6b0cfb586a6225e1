#pragma once

#include <Eigen/Dense>

#include "subfinsler/errors.hpp"

namespace subfinsler {

struct NormJet {
  double F;              // F(w)
  Eigen::VectorXd grad;  // gradient of F^2/2
  Eigen::MatrixXd hess;  // Hessian of F^2/2
};

/// Positively homogeneous, strongly convex norm on a rank-k fiber.
///
/// Variants:
///   Euclidean            F(w) = |w|
///   Quadratic(G)         F(w) = sqrt(w'Gw), G symmetric positive-definite
///   Randers(G, b)        F(w) = sqrt(w'Gw) + b'w, with b'G^{-1}b < 1
///
/// Randers is the canonical smooth strongly convex non-reversible case.
class MinkowskiNorm {
public:
  enum class Type { Euclidean, Quadratic, Randers };

  static MinkowskiNorm euclidean(int k);
  static MinkowskiNorm quadratic(Eigen::MatrixXd G);
  static MinkowskiNorm randers(Eigen::MatrixXd G, Eigen::VectorXd b);

  Type type() const noexcept { return type_; }
  int dim() const noexcept { return k_; }
  const Eigen::MatrixXd& G() const noexcept { return G_; }
  const Eigen::VectorXd& drift() const noexcept { return b_; }

  /// F(w). Throws ZeroVector at w = 0 (F is only C^0 there).
  double value(const Eigen::VectorXd& w) const;
  /// Gradient of F^2/2; 1-homogeneous in w.
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  /// Hessian of F^2/2; 0-homogeneous, positive-definite away from 0.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w) const;
  NormJet jet(const Eigen::VectorXd& w) const;

private:
  MinkowskiNorm(Type type, int k, Eigen::MatrixXd G, Eigen::VectorXd b)
      : type_(type), k_(k), G_(std::move(G)), b_(std::move(b)) {}

  void require_nonzero(const Eigen::VectorXd& w) const;
  double alpha(const Eigen::VectorXd& w) const;  // sqrt(w'Gw)

  Type type_;
  int k_;
  Eigen::MatrixXd G_;  // identity implicitly for Euclidean
  Eigen::VectorXd b_;  // empty unless Randers
};

/// The {F, grad F^2/2, hess F^2/2} triple at w != 0.
inline NormJet norm_eval(const MinkowskiNorm& norm, const Eigen::VectorXd& w) {
  return norm.jet(w);
}

}  // namespace subfinsler
