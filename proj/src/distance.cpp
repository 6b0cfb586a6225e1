#include "subfinsler/distance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "subfinsler/rng.hpp"
#include "subfinsler/util.hpp"

namespace subfinsler {

namespace {

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

struct Candidate {
  Eigen::VectorXd p;
  double residual = std::numeric_limits<double>::infinity();
  double length = 0.0;
  bool valid = false;
};

// One damped Gauss-Newton descent of |exp*_x(p) - y| from p. Singular
// Jacobians (annihilator directions, off-leaf targets) fall back to the
// minimum-norm least-squares step. The Jacobian is frozen while steps keep
// cutting the residual well, since it costs 2n integrations to rebuild.
Candidate gauss_newton(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y, Eigen::VectorXd p, double stop_res,
                       int max_iters, const IntegrateOptions& integ, double p_cap) {
  Candidate cand;
  auto residual_at = [&](const Eigen::VectorXd& pp) -> std::optional<Eigen::VectorXd> {
    if (p_cap > 0 && pp.norm() > p_cap) return std::nullopt;  // out of search scope
    try {
      return exp_star(spec, x, pp, integ) - y;
    } catch (const OutsideDomainOfExp&) {
      return std::nullopt;
    } catch (const NoConvergence&) {
      return std::nullopt;
    }
  };

  auto r0 = residual_at(p);
  if (!r0) return cand;
  Eigen::VectorXd r = *r0;
  double rnorm = r.norm();

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  bool have_jacobian = false;
  for (int it = 0; it < max_iters && rnorm > stop_res; ++it) {
    bool fresh = false;
    if (!have_jacobian) {
      try {
        cod.compute(jacobian_exp_star(spec, x, p, integ));
      } catch (const Error&) {
        break;
      }
      have_jacobian = true;
      fresh = true;
    }
    Eigen::VectorXd step = cod.solve(-r);
    if (!step.allFinite() || step.norm() == 0.0) break;

    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 14; ++ls) {
      auto rc = residual_at(p + alpha * step);
      if (rc && rc->norm() < rnorm) {
        double reduction = rc->norm() / rnorm;
        p += alpha * step;
        r = *rc;
        rnorm = r.norm();
        improved = true;
        // Stale or damped steps converge slowly; refresh the Jacobian.
        if (alpha < 1.0 || reduction > 0.3) have_jacobian = false;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      if (fresh) break;        // a fresh Jacobian cannot improve: stalled
      have_jacobian = false;   // stale Jacobian: rebuild and retry
      --it;
    }
  }

  cand.p = std::move(p);
  cand.residual = rnorm;
  try {
    cand.length = std::sqrt(2.0 * sub_hamiltonian(spec, x, cand.p));
    cand.valid = true;
  } catch (const Error&) {
    cand.valid = false;
  }
  return cand;
}

}  // namespace

GeodesicResult shoot(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const ShootOptions& opts) {
  spec.require_in_domain(x);
  spec.require_in_domain(y);
  if (x == y) throw DomainError("shoot requires distinct endpoints");

  const int n = spec.dim();
  const Eigen::VectorXd delta = y - x;
  const double dchart = delta.norm();
  const double r_hi = opts.max_radius > 0 ? opts.max_radius : 10.0 * (0.1 + dchart);
  const double r_lo = std::min(std::max(0.5 * dchart, 1e-2 * r_hi), r_hi);
  const int n_shells = std::max(1, opts.n_shells);

  std::vector<double> shells(static_cast<std::size_t>(n_shells));
  for (int j = 0; j < n_shells; ++j)
    shells[static_cast<std::size_t>(j)] =
        n_shells == 1 ? r_hi
                      : r_lo * std::pow(r_hi / r_lo, static_cast<double>(j) / (n_shells - 1));

  // Start list: one structured straight-chord guess, then Halton directions
  // on the shell grid. Directions cover all of R^n, so momenta with large
  // annihilator components are represented.
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(static_cast<std::size_t>(opts.n_starts));

  {
    Eigen::MatrixXd A = frame_matrix(spec, x);
    Eigen::VectorXd w_lin =
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A).solve(delta);
    if (w_lin.norm() > 1e-12 * (1.0 + dchart)) {
      try {
        starts.push_back(lift_covector(spec, x, legendre_fiber_fwd(spec.norm(), w_lin)));
      } catch (const Error&) {
      }
    }
  }

  std::uint64_t halton_index = 1 + opts.seed * 7919;
  int guard = 0;
  while (static_cast<int>(starts.size()) < opts.n_starts && guard < 100 * opts.n_starts) {
    ++guard;
    Eigen::VectorXd dir(n);
    for (int i = 0; i < n; ++i)
      dir[i] = 2.0 * halton(halton_index, kPrimes[i % 12]) - 1.0;
    ++halton_index;
    double dn = dir.norm();
    if (dn < 1e-6) continue;
    dir /= dn;
    double Fs;
    try {
      FiberMomentum u = reduce_covector(spec, x, dir);
      if (u.isZero(0.0)) continue;
      Fs = dual_norm(spec.norm(), u);
    } catch (const Error&) {
      continue;
    }
    if (!(Fs > 1e-9)) continue;
    double r = shells[starts.size() % static_cast<std::size_t>(n_shells)];
    starts.push_back(dir * std::min(r / Fs, 3.0 * (1.0 + r_hi)));
  }

  // Search phase runs the integrator looser than the final answer needs
  // (the winner is re-polished at the requested tolerance below), with a
  // step budget and a covector cap so runaway high-winding iterates die
  // cheaply instead of dominating the run time.
  IntegrateOptions search_integ = opts.integ;
  search_integ.rel_tol = std::max(opts.integ.rel_tol, std::min(1e-7, 0.05 * opts.tol));
  search_integ.max_steps = std::min(opts.integ.max_steps, 4000L);
  const double p_cap = 3.0 * (1.0 + r_hi);

  const double stop_res = opts.tol;
  std::vector<Candidate> candidates(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    candidates[i] =
        gauss_newton(spec, x, y, starts[i], stop_res, opts.max_iters, search_integ, p_cap);
  });

  // Ordered fold: shortest converged candidate wins; ties break
  // lexicographically on p0. Unreached keeps the best residual seen.
  const Candidate* best = nullptr;
  const Candidate* best_any = nullptr;
  for (const Candidate& c : candidates) {
    if (!c.valid) continue;
    if (!best_any || c.residual < best_any->residual) best_any = &c;
    if (c.residual <= opts.tol) {
      if (!best || c.length < best->length ||
          (c.length == best->length && lex_less(c.p, best->p)))
        best = &c;
    }
  }

  GeodesicResult result;
  result.starts_used = static_cast<int>(starts.size());
  if (best) {
    // Polish the winner to near machine residual so reported lengths carry
    // full precision, not just the classification tolerance.
    Candidate polished = gauss_newton(spec, x, y, best->p, 1e-12 * (1.0 + dchart), 12,
                                      opts.integ, 0.0);
    const Candidate& final_c =
        polished.valid && polished.residual <= best->residual ? polished : *best;
    result.status = GeodesicResult::Status::Reached;
    result.p0 = final_c.p;
    result.length = final_c.length;
    result.residual = final_c.residual;
  } else if (best_any) {
    result.status = GeodesicResult::Status::Unreached;
    result.p0 = best_any->p;
    result.length = best_any->length;
    result.residual = best_any->residual;
  } else {
    result.status = GeodesicResult::Status::Unreached;
    result.p0 = Eigen::VectorXd::Zero(n);
    result.length = 0.0;
    result.residual = std::numeric_limits<double>::infinity();
  }
  return result;
}

std::vector<SpherePoint> sphere_map(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                    double r, int n, std::uint64_t seed,
                                    const IntegrateOptions& opts) {
  spec.require_in_domain(x);
  if (!(r > 0.0)) throw ValidationError("sphere radius must be positive");
  if (n < 1) throw ValidationError("sample count must be >= 1");

  // Rejection-scaled sampling of the cotangent sphere: isotropic directions
  // are rejected when their annihilator fraction exceeds 0.9 (F* does not
  // see the annihilator, so nearly-annihilator directions blow up under the
  // r/F* scaling and land far past the cut locus), then scaled onto
  // {F* = r}.
  Eigen::MatrixXd A = frame_matrix(spec, x);
  Eigen::LLT<Eigen::MatrixXd> AtA((A.transpose() * A).eval());
  std::vector<Eigen::VectorXd> covectors;
  DetRng rng(seed);
  int guard = 0;
  while (static_cast<int>(covectors.size()) < n && guard < 1000 * n) {
    ++guard;
    Eigen::VectorXd d = rng.normal_vector(spec.dim());
    double dn = d.norm();
    if (dn < 1e-9) continue;
    d /= dn;
    double Fs;
    try {
      FiberMomentum u = A.transpose() * d;
      if (u.isZero(0.0)) continue;
      Eigen::VectorXd range_part = A * AtA.solve(u);
      double ann_sq = std::max(0.0, 1.0 - range_part.squaredNorm());
      if (ann_sq > 0.81) continue;
      Fs = dual_norm(spec.norm(), u);
    } catch (const Error&) {
      continue;
    }
    if (!(Fs > 1e-12)) continue;
    covectors.push_back(d * (r / Fs));
  }
  if (static_cast<int>(covectors.size()) < n)
    throw NoConvergence("could not sample covectors with F* = r");

  std::vector<SpherePoint> points(covectors.size());
  IntegrateOptions fast = opts;
  fast.n_samples = 2;
  parallel_for(covectors.size(), [&](std::size_t i) {
    NormalExtremal ext = integrate_extremal(spec, x, covectors[i], 1.0, fast);
    points[i].p0 = covectors[i];
    points[i].point = ext.samples.back().x;
    points[i].escaped = ext.status != FlowStatus::Completed;
  });
  return points;
}

HopfRinowReport hopf_rinow_probe(const ManifoldSpec& spec, const DomainBox& region,
                                 int n_pairs, std::uint64_t seed,
                                 const HopfRinowOptions& opts) {
  if (n_pairs < 1) throw ValidationError("n_pairs must be >= 1");
  if (region.min.size() != spec.dim() || region.max.size() != spec.dim())
    throw DomainError("region has wrong dimension");
  if (spec.domain() &&
      !(spec.domain()->contains(region.min) && spec.domain()->contains(region.max)))
    throw DomainError("region must lie inside the chart domain");

  HopfRinowReport report;
  DetRng rng(seed);
  std::vector<Eigen::VectorXd> xs, ys;
  for (int i = 0; i < n_pairs; ++i) {
    Eigen::VectorXd a = rng.uniform_in_box(region.min, region.max);
    Eigen::VectorXd b = rng.uniform_in_box(region.min, region.max);
    while (b == a) b = rng.uniform_in_box(region.min, region.max);
    xs.push_back(std::move(a));
    ys.push_back(std::move(b));
  }

  // Job list: per pair i: forward, backward, and the triangle legs
  // (y_i -> z_i, x_i -> z_i) with z_i = x_{(i+1) mod n}.
  struct Job {
    Eigen::VectorXd from, to;
  };
  std::vector<Job> jobs;
  const bool triangles = n_pairs >= 2;
  for (int i = 0; i < n_pairs; ++i) {
    const Eigen::VectorXd& z = xs[static_cast<std::size_t>((i + 1) % n_pairs)];
    jobs.push_back({xs[i], ys[i]});
    jobs.push_back({ys[i], xs[i]});
    if (triangles) {
      jobs.push_back({ys[i], z});
      jobs.push_back({xs[i], z});
    }
  }

  std::vector<GeodesicResult> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    ShootOptions so = opts.shoot;
    so.seed = opts.shoot.seed + 1000003ULL * i;
    if (jobs[i].from == jobs[i].to) {
      // Degenerate draw (z coincides with x); report as trivially reached.
      GeodesicResult r;
      r.status = GeodesicResult::Status::Reached;
      r.p0 = Eigen::VectorXd::Zero(spec.dim());
      results[i] = std::move(r);
      return;
    }
    results[i] = shoot(spec, jobs[i].from, jobs[i].to, so);
  });

  const int stride = triangles ? 4 : 2;
  double asym_sum = 0.0;
  int asym_count = 0;
  for (int i = 0; i < n_pairs; ++i) {
    PairProbe pair;
    pair.x = xs[i];
    pair.y = ys[i];
    pair.forward = results[static_cast<std::size_t>(stride * i)];
    pair.backward = results[static_cast<std::size_t>(stride * i + 1)];
    if (pair.forward.status == GeodesicResult::Status::Reached &&
        pair.backward.status == GeodesicResult::Status::Reached) {
      double asym = std::abs(pair.forward.length - pair.backward.length);
      report.max_asymmetry = std::max(report.max_asymmetry, asym);
      asym_sum += asym;
      ++asym_count;
    }
    report.pairs.push_back(std::move(pair));

    if (triangles) {
      TriangleProbe tri;
      tri.yz = results[static_cast<std::size_t>(stride * i + 2)];
      tri.xz = results[static_cast<std::size_t>(stride * i + 3)];
      const GeodesicResult& xy = report.pairs.back().forward;
      tri.all_reached = xy.status == GeodesicResult::Status::Reached &&
                        tri.yz.status == GeodesicResult::Status::Reached &&
                        tri.xz.status == GeodesicResult::Status::Reached;
      if (tri.all_reached) {
        tri.slack = xy.length + tri.yz.length - tri.xz.length;
        tri.violated = tri.xz.length > xy.length + tri.yz.length + 1e-6;
        if (tri.violated) ++report.triangle_violations;
      }
      report.triangles.push_back(std::move(tri));
    }
  }
  if (asym_count > 0) report.mean_asymmetry = asym_sum / asym_count;

  report.n_shoots = static_cast<int>(results.size());
  for (const GeodesicResult& r : results) {
    if (r.status == GeodesicResult::Status::Reached) {
      ++report.n_reached;
      report.max_residual = std::max(report.max_residual, r.residual);
    }
  }
  report.success_fraction =
      static_cast<double>(report.n_reached) / static_cast<double>(report.n_shoots);

  Eigen::VectorXd center = 0.5 * (region.min + region.max);
  report.completeness = completeness_probe(spec, center, opts.completeness_dirs,
                                           opts.completeness_T, seed, opts.shoot.integ);
  report.bracket = bracket_generating(spec, center, opts.bracket_depth);
  return report;
}

}  // namespace subfinsler
