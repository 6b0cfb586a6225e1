#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "subfinsler/expr.hpp"
#include "subfinsler/norm.hpp"

namespace subfinsler {

/// Axis-aligned chart domain with positive volume.
struct DomainBox {
  Eigen::VectorXd min, max;

  bool contains(const Eigen::VectorXd& x) const {
    for (int i = 0; i < x.size(); ++i)
      if (!(x[i] >= min[i] && x[i] <= max[i])) return false;
    return true;
  }
};

/// A single global chart: dimension n, a rank-k frame X_1..X_k spanning the
/// distribution (each column given by n coordinate expressions), a Minkowski
/// norm on the fiber coordinates, and an optional box domain.
///
/// Construction validates 1 <= k <= n, component counts, variable indices,
/// domain volume, and (probabilistically, 32 uniform samples) that the frame
/// matrix has rank k on the domain. Frame component derivatives are
/// differentiated symbolically once, here.
class ManifoldSpec {
public:
  ManifoldSpec(int n, std::vector<std::vector<ExprPtr>> frames, MinkowskiNorm norm,
               std::optional<DomainBox> domain = std::nullopt);

  int dim() const noexcept { return n_; }
  int rank() const noexcept { return k_; }
  const MinkowskiNorm& norm() const noexcept { return norm_; }
  const std::optional<DomainBox>& domain() const noexcept { return domain_; }

  bool in_domain(const Eigen::VectorXd& x) const;
  /// Throws DomainError if x is outside the chart.
  void require_in_domain(const Eigen::VectorXd& x) const;

  const std::vector<std::vector<ExprPtr>>& frame_exprs() const noexcept { return frames_; }

  /// Column a of the frame matrix evaluated into `out` (size n).
  void eval_frame(int a, const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  /// d(X_a)/d(x_i) evaluated into `out` (size n).
  void eval_frame_jacobian_column(int a, int i, const Eigen::VectorXd& x,
                                  Eigen::VectorXd& out) const;

private:
  int n_, k_;
  std::vector<std::vector<ExprPtr>> frames_;                // [a][m]
  std::vector<std::vector<CompiledExpr>> compiled_;         // [a][m]
  std::vector<std::vector<std::vector<CompiledExpr>>> jac_; // [a][i][m] = d(X_a)_m / dx_i
  MinkowskiNorm norm_;
  std::optional<DomainBox> domain_;
};

/// n x k matrix whose columns are X_1(x), .., X_k(x).
Eigen::MatrixXd frame_matrix(const ManifoldSpec& spec, const Eigen::VectorXd& x);

/// [X_i, X_j](x) = DX_j * X_i - DX_i * X_j, Jacobians taken symbolically.
Eigen::VectorXd lie_bracket(const ManifoldSpec& spec, int i, int j, const Eigen::VectorXd& x);

struct BracketReport {
  bool generating = false;
  std::vector<int> growth;  // growth[d] = rank of brackets of length <= d+1
};

/// Growth vector of the distribution at x up to bracket length max_depth.
/// Ranks are numerical: singular values >= rank_tol * largest.
BracketReport bracket_generating(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                 int max_depth, double rank_tol = 1e-9);

/// Horizontal curve sampled at strictly increasing times, velocities kept in
/// fiber coordinates w (so horizontality holds by construction).
struct HorizontalPolyline {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> w;
};

struct CurveFunctionals {
  double length;
  double energy;
};

/// Composite-trapezoid length and energy of the sampled curve.
CurveFunctionals curve_functionals(const ManifoldSpec& spec, const HorizontalPolyline& curve);

}  // namespace subfinsler
