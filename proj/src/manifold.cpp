#include "subfinsler/manifold.hpp"

#include <cmath>

#include "subfinsler/rng.hpp"

namespace subfinsler {

ManifoldSpec::ManifoldSpec(int n, std::vector<std::vector<ExprPtr>> frames, MinkowskiNorm norm,
                           std::optional<DomainBox> domain)
    : n_(n), k_(static_cast<int>(frames.size())), frames_(std::move(frames)),
      norm_(std::move(norm)), domain_(std::move(domain)) {
  if (n_ < 1) throw ValidationError("chart dimension must be >= 1");
  if (k_ < 1 || k_ > n_)
    throw ValidationError("frame count k = " + std::to_string(k_) +
                          " must satisfy 1 <= k <= n = " + std::to_string(n_));
  if (norm_.dim() != k_) throw ValidationError("norm rank does not match frame count");
  for (int a = 0; a < k_; ++a) {
    if (static_cast<int>(frames_[a].size()) != n_)
      throw ValidationError("frame " + std::to_string(a + 1) + " must have n = " +
                            std::to_string(n_) + " component expressions");
    for (const auto& comp : frames_[a]) {
      if (!comp) throw ValidationError("null frame component expression");
      if (max_variable(*comp) >= n_)
        throw ValidationError("frame " + std::to_string(a + 1) +
                              " references a coordinate beyond dimension " + std::to_string(n_));
    }
  }
  if (domain_) {
    if (domain_->min.size() != n_ || domain_->max.size() != n_)
      throw ValidationError("domain bounds must have n components");
    for (int i = 0; i < n_; ++i)
      if (!(domain_->min[i] < domain_->max[i]))
        throw ValidationError("domain box must have positive volume");
  }

  compiled_.resize(frames_.size());
  jac_.resize(frames_.size());
  for (int a = 0; a < k_; ++a) {
    compiled_[a].reserve(static_cast<std::size_t>(n_));
    jac_[a].resize(static_cast<std::size_t>(n_));
    for (int m = 0; m < n_; ++m) compiled_[a].emplace_back(*frames_[a][m]);
    for (int i = 0; i < n_; ++i) {
      jac_[a][i].reserve(static_cast<std::size_t>(n_));
      for (int m = 0; m < n_; ++m)
        jac_[a][i].emplace_back(*diff_expr(frames_[a][m], i));
    }
  }

  // Probabilistic rank check: the frame must span a rank-k distribution at
  // 32 uniformly sampled domain points (default box [-1,1]^n when no domain
  // is declared). Fixed internal seed keeps loading deterministic.
  Eigen::VectorXd lo = domain_ ? domain_->min : Eigen::VectorXd::Constant(n_, -1.0);
  Eigen::VectorXd hi = domain_ ? domain_->max : Eigen::VectorXd::Constant(n_, 1.0);
  DetRng rng(0x5fb21d5955e1a0c3ULL);
  for (int s = 0; s < 32; ++s) {
    Eigen::VectorXd x = rng.uniform_in_box(lo, hi);
    Eigen::MatrixXd A(n_, k_);
    Eigen::VectorXd col(n_);
    for (int a = 0; a < k_; ++a) {
      eval_frame(a, x, col);
      A.col(a) = col;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-9 * sv(0)))
      throw ValidationError("frame matrix is rank-deficient at a sampled domain point");
  }
}

bool ManifoldSpec::in_domain(const Eigen::VectorXd& x) const {
  if (x.size() != n_) return false;
  return !domain_ || domain_->contains(x);
}

void ManifoldSpec::require_in_domain(const Eigen::VectorXd& x) const {
  if (x.size() != n_)
    throw DomainError("point has dimension " + std::to_string(x.size()) +
                      ", chart has dimension " + std::to_string(n_));
  if (!in_domain(x)) throw DomainError("point outside chart domain");
}

void ManifoldSpec::eval_frame(int a, const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.resize(n_);
  std::span<const double> b(x.data(), static_cast<std::size_t>(x.size()));
  for (int m = 0; m < n_; ++m) out[m] = compiled_[a][m].eval(b);
}

void ManifoldSpec::eval_frame_jacobian_column(int a, int i, const Eigen::VectorXd& x,
                                              Eigen::VectorXd& out) const {
  out.resize(n_);
  std::span<const double> b(x.data(), static_cast<std::size_t>(x.size()));
  for (int m = 0; m < n_; ++m) out[m] = jac_[a][i][m].eval(b);
}

Eigen::MatrixXd frame_matrix(const ManifoldSpec& spec, const Eigen::VectorXd& x) {
  spec.require_in_domain(x);
  Eigen::MatrixXd A(spec.dim(), spec.rank());
  Eigen::VectorXd col(spec.dim());
  for (int a = 0; a < spec.rank(); ++a) {
    spec.eval_frame(a, x, col);
    A.col(a) = col;
  }
  return A;
}

namespace {

using Field = std::vector<ExprPtr>;  // n component expressions

// [V, W]_m = sum_l V_l d(W_m)/dx_l - W_l d(V_m)/dx_l
Field symbolic_bracket(const Field& V, const Field& W, int n) {
  Field out(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    ExprPtr acc;
    for (int l = 0; l < n; ++l) {
      ExprPtr term = Expr::sub(Expr::mul(V[l], diff_expr(W[m], l)),
                               Expr::mul(W[l], diff_expr(V[m], l)));
      acc = acc ? Expr::add(std::move(acc), std::move(term)) : std::move(term);
    }
    out[m] = std::move(acc);
  }
  return out;
}

Eigen::VectorXd eval_field(const Field& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(x.size());
  std::span<const double> b(x.data(), static_cast<std::size_t>(x.size()));
  for (int m = 0; m < x.size(); ++m) v[m] = eval_expr(*f[m], b);
  return v;
}

int numerical_rank(const Eigen::MatrixXd& M, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) >= tol * sv(0)) ++r;
  return r;
}

}  // namespace

Eigen::VectorXd lie_bracket(const ManifoldSpec& spec, int i, int j, const Eigen::VectorXd& x) {
  spec.require_in_domain(x);
  if (i < 0 || i >= spec.rank() || j < 0 || j >= spec.rank())
    throw ValidationError("frame index out of range");
  const int n = spec.dim();
  // DX_j * X_i - DX_i * X_j, columns of the Jacobians from diff_expr.
  Eigen::VectorXd Xi(n), Xj(n), col(n), out = Eigen::VectorXd::Zero(n);
  spec.eval_frame(i, x, Xi);
  spec.eval_frame(j, x, Xj);
  for (int l = 0; l < n; ++l) {
    spec.eval_frame_jacobian_column(j, l, x, col);
    out += Xi[l] * col;
    spec.eval_frame_jacobian_column(i, l, x, col);
    out -= Xj[l] * col;
  }
  return out;
}

BracketReport bracket_generating(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                 int max_depth, double rank_tol) {
  spec.require_in_domain(x);
  if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
  const int n = spec.dim();
  const int k = spec.rank();

  std::vector<Field> generation;  // brackets of the current length
  for (int a = 0; a < k; ++a) generation.push_back(spec.frame_exprs()[a]);

  std::vector<Eigen::VectorXd> columns;
  BracketReport report;
  std::size_t node_budget = 4'000'000;

  for (int depth = 0; depth < max_depth; ++depth) {
    if (depth > 0) {
      // Length m+1 brackets [X_a, W] with W of length m span the new layer
      // (left-normed brackets span each degree of the generated Lie algebra).
      std::vector<Field> next;
      for (int a = 0; a < k; ++a)
        for (const Field& W : generation)
          next.push_back(symbolic_bracket(spec.frame_exprs()[a], W, n));
      generation = std::move(next);
      if (generation.size() * static_cast<std::size_t>(n) > node_budget)
        throw Error("bracket depth too large for symbolic expansion");
    }
    for (const Field& f : generation) columns.push_back(eval_field(f, x));

    Eigen::MatrixXd M(n, static_cast<int>(columns.size()));
    for (int c = 0; c < M.cols(); ++c) M.col(c) = columns[static_cast<std::size_t>(c)];
    report.growth.push_back(numerical_rank(M, rank_tol));

    // The growth vector ends once the brackets span the whole tangent
    // space; deeper entries could only repeat n.
    if (report.growth.back() == n) break;
  }
  report.generating = report.growth.back() == n;
  return report;
}

CurveFunctionals curve_functionals(const ManifoldSpec& spec, const HorizontalPolyline& curve) {
  const std::size_t m = curve.t.size();
  if (m == 0 || curve.x.size() != m || curve.w.size() != m)
    throw ValidationError("empty or inconsistent polyline");
  for (std::size_t j = 0; j + 1 < m; ++j)
    if (!(curve.t[j] < curve.t[j + 1]))
      throw ValidationError("polyline times must be strictly increasing");

  std::vector<double> F(m);
  for (std::size_t j = 0; j < m; ++j) {
    spec.require_in_domain(curve.x[j]);
    F[j] = spec.norm().value(curve.w[j]);  // throws ZeroVector on w_j = 0
  }
  double length = 0.0, energy = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    double dt = curve.t[j + 1] - curve.t[j];
    length += 0.5 * (F[j] + F[j + 1]) * dt;
    energy += 0.5 * (0.5 * F[j] * F[j] + 0.5 * F[j + 1] * F[j + 1]) * dt;
  }
  return CurveFunctionals{length, energy};
}

}  // namespace subfinsler
