#pragma once

#include <cstdint>
#include <vector>

#include "subfinsler/flow.hpp"

namespace subfinsler {

struct ShootOptions {
  double tol = 1e-6;       // residual tolerance classifying Reached
  int n_starts = 32;       // multi-start budget
  double max_radius = 0;   // largest energy-shell radius; 0 = auto from |y-x|
  std::uint64_t seed = 0;  // offsets the low-discrepancy sequence
  int max_iters = 40;      // Gauss-Newton iterations per start
  int n_shells = 4;        // geometric grid of energy shells
  IntegrateOptions integ;
};

/// Outcome of a boundary-value shoot. `length` = F*(u(p0)) = sqrt(2 H(x,p0))
/// of the unit-time extremal; Reached iff residual <= tol.
struct GeodesicResult {
  enum class Status { Reached, Unreached };
  Status status = Status::Unreached;
  Eigen::VectorXd p0;
  double length = 0.0;
  double residual = 0.0;  // chart-Euclidean distance from endpoint to target
  int starts_used = 0;
};

/// Estimate the sub-Finsler distance from x to y by multi-start shooting:
/// minimize |exp*_x(p) - y|^2 by damped Gauss-Newton from low-discrepancy
/// seeds on a geometric grid of energy shells. Among converged candidates
/// the shortest wins (ties broken lexicographically on p0); the winner is
/// polished to near machine residual. Deterministic given the seed.
GeodesicResult shoot(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const ShootOptions& opts = {});

struct SpherePoint {
  Eigen::VectorXd p0;     // covector with F*_x(p0) = r
  Eigen::VectorXd point;  // exp*_x(p0), or last inside point when escaped
  bool escaped = false;
};

/// Image of n sampled cotangent-sphere covectors under exp*_x. Escaped
/// directions are flagged, not dropped.
std::vector<SpherePoint> sphere_map(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                    double r, int n, std::uint64_t seed = 0,
                                    const IntegrateOptions& opts = {});

struct HopfRinowOptions {
  ShootOptions shoot;
  int completeness_dirs = 16;
  double completeness_T = 50.0;
  int bracket_depth = 4;
};

struct PairProbe {
  Eigen::VectorXd x, y;
  GeodesicResult forward;   // shoot(x, y)
  GeodesicResult backward;  // shoot(y, x)
};

struct TriangleProbe {
  // Triple (x_i, y_i, z_i) with z_i = x_{(i+1) mod n}; checks
  // d(x,z) <= d(x,y) + d(y,z) + 1e-6 when all legs are Reached.
  GeodesicResult yz, xz;
  bool all_reached = false;
  bool violated = false;
  double slack = 0.0;  // d(x,y) + d(y,z) - d(x,z)
};

struct HopfRinowReport {
  std::vector<PairProbe> pairs;
  std::vector<TriangleProbe> triangles;
  int n_shoots = 0;
  int n_reached = 0;
  double success_fraction = 0.0;
  double max_residual = 0.0;  // over Reached shoots
  int triangle_violations = 0;
  double max_asymmetry = 0.0;   // |d(x,y) - d(y,x)| over mutually Reached pairs
  double mean_asymmetry = 0.0;
  CompletenessReport completeness;  // probed at the region center
  BracketReport bracket;            // evaluated at the region center
};

/// Sample n_pairs point pairs uniformly in `region`, shoot both directions
/// and triangle legs, and summarize minimizer existence, triangle
/// inequality, asymmetry, and extendability. Deterministic given the seed.
HopfRinowReport hopf_rinow_probe(const ManifoldSpec& spec, const DomainBox& region,
                                 int n_pairs, std::uint64_t seed = 0,
                                 const HopfRinowOptions& opts = {});

}  // namespace subfinsler
