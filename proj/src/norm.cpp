#include "subfinsler/norm.hpp"

#include <cmath>

namespace subfinsler {

namespace {

void check_spd(const Eigen::MatrixXd& G, int k) {
  if (G.rows() != k || G.cols() != k)
    throw ValidationError("quadratic form must be k x k with k = " + std::to_string(k));
  double scale = G.cwiseAbs().maxCoeff();
  if (!((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + scale)))
    throw ValidationError("quadratic form is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw ValidationError("quadratic form is not positive-definite");
}

}  // namespace

MinkowskiNorm MinkowskiNorm::euclidean(int k) {
  if (k < 1) throw ValidationError("fiber rank must be >= 1");
  return MinkowskiNorm(Type::Euclidean, k, Eigen::MatrixXd(), Eigen::VectorXd());
}

MinkowskiNorm MinkowskiNorm::quadratic(Eigen::MatrixXd G) {
  int k = static_cast<int>(G.rows());
  if (k < 1) throw ValidationError("fiber rank must be >= 1");
  check_spd(G, k);
  return MinkowskiNorm(Type::Quadratic, k, std::move(G), Eigen::VectorXd());
}

MinkowskiNorm MinkowskiNorm::randers(Eigen::MatrixXd G, Eigen::VectorXd b) {
  int k = static_cast<int>(G.rows());
  if (k < 1) throw ValidationError("fiber rank must be >= 1");
  check_spd(G, k);
  if (b.size() != k) throw ValidationError("Randers drift must have k components");
  // Strong convexity of sqrt(w'Gw) + b'w requires b'G^{-1}b < 1.
  double bGb = b.dot(Eigen::LLT<Eigen::MatrixXd>(G).solve(b));
  if (!(bGb < 1.0))
    throw ValidationError("Randers drift violates strong convexity: b'G^{-1}b = " +
                          std::to_string(bGb) + " >= 1");
  return MinkowskiNorm(Type::Randers, k, std::move(G), std::move(b));
}

void MinkowskiNorm::require_nonzero(const Eigen::VectorXd& w) const {
  if (w.size() != k_) throw ValidationError("fiber vector has wrong dimension");
  if (w.isZero(0.0)) throw ZeroVector("Minkowski norm data undefined at w = 0");
}

double MinkowskiNorm::alpha(const Eigen::VectorXd& w) const {
  return std::sqrt(w.dot(G_ * w));
}

double MinkowskiNorm::value(const Eigen::VectorXd& w) const {
  require_nonzero(w);
  switch (type_) {
    case Type::Euclidean: return w.norm();
    case Type::Quadratic: return alpha(w);
    case Type::Randers: return alpha(w) + b_.dot(w);
  }
  throw Error("unreachable");
}

Eigen::VectorXd MinkowskiNorm::gradient(const Eigen::VectorXd& w) const {
  require_nonzero(w);
  switch (type_) {
    case Type::Euclidean: return w;
    case Type::Quadratic: return G_ * w;
    case Type::Randers: {
      // L = (alpha + beta)^2 / 2, grad L = F * (Gw/alpha + b)
      double a = alpha(w);
      double F = a + b_.dot(w);
      return F * (G_ * w / a + b_);
    }
  }
  throw Error("unreachable");
}

Eigen::MatrixXd MinkowskiNorm::hessian(const Eigen::VectorXd& w) const {
  require_nonzero(w);
  switch (type_) {
    case Type::Euclidean: return Eigen::MatrixXd::Identity(k_, k_);
    case Type::Quadratic: return G_;
    case Type::Randers: {
      // hess L = (grad F)(grad F)' + F * hess F,
      // hess F = G/alpha - (Gw)(Gw)'/alpha^3
      double a = alpha(w);
      Eigen::VectorXd Gw = G_ * w;
      double F = a + b_.dot(w);
      Eigen::VectorXd gradF = Gw / a + b_;
      return gradF * gradF.transpose() + F * (G_ / a - Gw * Gw.transpose() / (a * a * a));
    }
  }
  throw Error("unreachable");
}

NormJet MinkowskiNorm::jet(const Eigen::VectorXd& w) const {
  return NormJet{value(w), gradient(w), hessian(w)};
}

}  // namespace subfinsler
