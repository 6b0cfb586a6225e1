#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subfinsler/duality.hpp"
#include "subfinsler/manifold.hpp"

namespace subfinsler {

/// The extremal pair (base point, momentum covector).
struct ExtremalState {
  Eigen::VectorXd x;
  Eigen::VectorXd p;
};

enum class FlowStatus {
  Completed,
  Escaped,      // state left the chart domain; escape time bisected to 1e-10
  StepFailure,  // step controller underflowed the minimum step
};

struct ExtremalSample {
  double t;
  Eigen::VectorXd x, p;
  double H;
};

/// Time-sampled normal extremal with energy-drift and termination metadata.
struct NormalExtremal {
  std::vector<ExtremalSample> samples;
  double H0 = 0.0;
  double max_drift = 0.0;  // max_j |H(t_j) - H0|, never discarded
  FlowStatus status = FlowStatus::Completed;
  double t_end = 0.0;  // escape/failure time, or T when Completed
};

struct IntegrateOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  long max_steps = 1'000'000;
  int n_samples = 129;  // dense output grid, >= 2
};

/// Right-hand side of the normal geodesic equations at s:
///   dx = dH/dp = A(x) w,  w = legendre_fiber_inv(A(x)'p)   (w = 0 when u = 0)
///   dp_i = -dH/dx_i = -sum_a w_a (d_i X_a(x)) . p
std::pair<Eigen::VectorXd, Eigen::VectorXd> hamiltonian_rhs(const ManifoldSpec& spec,
                                                            const ExtremalState& s);

/// Adaptive Dormand-Prince 5(4) integration of the extremal from (x0, p0)
/// over [0, T], sampled on a uniform grid of n_samples points. Escape from
/// the domain box is located by bisection; failures are reported in
/// `status`, not thrown.
NormalExtremal integrate_extremal(const ManifoldSpec& spec, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& p0, double T,
                                  const IntegrateOptions& opts = {});

/// exp*_x(p): base point of the unit-time extremal. Throws OutsideDomainOfExp
/// when the extremal is not defined on [0,1]. Annihilator covectors are
/// stationary and give back x.
Eigen::VectorXd exp_star(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& p, const IntegrateOptions& opts = {});

/// exp_x(w) = exp*_x(p) with A(x)'p = legendre_fiber_fwd(w), p the
/// minimal-Euclidean-norm lift. Throws ZeroVector at w = 0.
Eigen::VectorXd exp_map(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& w, const IntegrateOptions& opts = {});

/// Central finite-difference Jacobian of p -> exp*_x(p), step 1e-6 * (1+|p|).
/// Throws ZeroVector on the annihilator and OutsideDomainOfExp if a probe
/// escapes.
Eigen::MatrixXd jacobian_exp_star(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& p,
                                  const IntegrateOptions& opts = {});

struct CompletenessReport {
  std::vector<FlowStatus> statuses;  // one per probed direction
  std::vector<double> escape_times;  // t_end per direction
  int completed = 0;
  double fraction = 0.0;
  double max_drift = 0.0;
};

/// Integrates n_dirs unit-energy covectors (H = 1/2) from x to T_max and
/// reports how many extend. Deterministic given the seed; failures are data.
CompletenessReport completeness_probe(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                      int n_dirs, double T_max, std::uint64_t seed = 0,
                                      const IntegrateOptions& opts = {});

}  // namespace subfinsler
