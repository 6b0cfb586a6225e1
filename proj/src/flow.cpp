#include "subfinsler/flow.hpp"

#include <cmath>

#include "subfinsler/rng.hpp"
#include "subfinsler/util.hpp"

namespace subfinsler {

namespace {

// Stage scratch for the stacked state y = [x; p]. Reused across a whole
// integration so the inner loop does not allocate.
struct FlowWorkspace {
  explicit FlowWorkspace(const ManifoldSpec& spec)
      : spec(spec), n(spec.dim()), k(spec.rank()), A(n, k), dcol(n), xv(n), u(k), w(k),
        warm(k) {
    warm.setZero();
    if (spec.norm().type() == MinkowskiNorm::Type::Quadratic)
      quad_llt.compute(spec.norm().G());
  }

  const ManifoldSpec& spec;
  int n, k;
  Eigen::MatrixXd A;
  Eigen::VectorXd dcol, xv, u, w, warm;
  Eigen::LLT<Eigen::MatrixXd> quad_llt;

  // L_H(u) without the generic Newton machinery where a closed form exists;
  // this runs once per RK stage.
  void invert_legendre() {
    switch (spec.norm().type()) {
      case MinkowskiNorm::Type::Euclidean: w = u; return;
      case MinkowskiNorm::Type::Quadratic: w = quad_llt.solve(u); return;
      default:
        w = legendre_fiber_inv(spec.norm(), u, &warm);
        warm = w;
        return;
    }
  }

  // dy = f(y); y = [x; p]. Throws DomainError if a frame expression is
  // undefined at x (treated by the caller as a rejected step).
  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    xv = y.head(n);
    const auto p = y.tail(n);
    for (int a = 0; a < k; ++a) {
      spec.eval_frame(a, xv, dcol);
      A.col(a) = dcol;
    }
    u.noalias() = A.transpose() * p;
    dy.resize(2 * n);
    if (u.isZero(0.0)) {
      // Annihilator covector: the extremal is stationary.
      dy.setZero();
      w.setZero();
      return;
    }
    invert_legendre();
    dy.head(n).noalias() = A * w;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int a = 0; a < k; ++a) {
        spec.eval_frame_jacobian_column(a, i, xv, dcol);
        acc += w[a] * dcol.dot(p);
      }
      dy[n + i] = -acc;
    }
  }

  double hamiltonian(const Eigen::VectorXd& y) {
    xv = y.head(n);
    const auto p = y.tail(n);
    for (int a = 0; a < k; ++a) {
      spec.eval_frame(a, xv, dcol);
      A.col(a) = dcol;
    }
    u.noalias() = A.transpose() * p;
    return fiber_hamiltonian(spec.norm(), u);
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// y5 - y4 error weights (includes the FSAL stage).
constexpr double kE[7] = {71.0 / 57600,      0.0,          -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525,   -1.0 / 40};

class Dopri5 {
public:
  Dopri5(FlowWorkspace& ws, int dim) : ws_(ws) {
    for (auto& k : k_) k.resize(dim);
    ytmp_.resize(dim);
    y5_.resize(dim);
  }

  // One trial step of size h from (t, y); k_[0] must hold f(y).
  // Returns the scaled error estimate (inf on DomainError) and fills y5_.
  double attempt(const Eigen::VectorXd& y, double h, double rel_tol, double abs_tol) {
    try {
      for (int s = 1; s < 6; ++s) {
        ytmp_ = y;
        for (int j = 0; j < s; ++j) ytmp_ += (h * kA[s][j]) * k_[j];
        ws_.rhs(ytmp_, k_[s]);
      }
      y5_ = y;
      for (int j = 0; j < 6; ++j)
        if (kA[6][j] != 0.0) y5_ += (h * kA[6][j]) * k_[j];
      ws_.rhs(y5_, k_[6]);  // FSAL stage
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NoConvergence&) {
      return std::numeric_limits<double>::infinity();
    }
    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double e = 0.0;
      for (int j = 0; j < 7; ++j) e += kE[j] * k_[j][i];
      e *= h;
      double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5_[i]));
      err += (e / sc) * (e / sc);
    }
    return std::sqrt(err / static_cast<double>(y.size()));
  }

  void accept() { k_[0] = k_[6]; }  // FSAL

  const Eigen::VectorXd& result() const { return y5_; }
  Eigen::VectorXd& stage0() { return k_[0]; }

  // Single fixed 5th-order step used by the escape bisection.
  bool probe(const Eigen::VectorXd& y, double h, Eigen::VectorXd& out) {
    try {
      for (int s = 1; s < 6; ++s) {
        ytmp_ = y;
        for (int j = 0; j < s; ++j) ytmp_ += (h * kA[s][j]) * kp_[j];
        ws_.rhs(ytmp_, kp_[s]);
      }
      out = y;
      for (int j = 0; j < 6; ++j)
        if (kA[6][j] != 0.0) out += (h * kA[6][j]) * kp_[j];
      return true;
    } catch (const DomainError&) {
      return false;
    } catch (const NoConvergence&) {
      return false;
    }
  }

  void begin_probe() {
    for (auto& k : kp_) k.resize(ytmp_.size());
    kp_[0] = k_[0];
  }

private:
  FlowWorkspace& ws_;
  Eigen::VectorXd k_[7], kp_[6];
  Eigen::VectorXd ytmp_, y5_;
};

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> hamiltonian_rhs(const ManifoldSpec& spec,
                                                            const ExtremalState& s) {
  spec.require_in_domain(s.x);
  if (s.p.size() != spec.dim()) throw ValidationError("momentum has wrong dimension");
  FlowWorkspace ws(spec);
  Eigen::VectorXd y(2 * spec.dim()), dy;
  y << s.x, s.p;
  ws.rhs(y, dy);
  return {dy.head(spec.dim()), dy.tail(spec.dim())};
}

NormalExtremal integrate_extremal(const ManifoldSpec& spec, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& p0, double T,
                                  const IntegrateOptions& opts) {
  spec.require_in_domain(x0);
  if (p0.size() != spec.dim()) throw ValidationError("momentum has wrong dimension");
  if (!(T > 0.0)) throw ValidationError("duration must be positive");

  const int n = spec.dim();
  const int n_samples = std::max(2, opts.n_samples);
  FlowWorkspace ws(spec);
  Dopri5 stepper(ws, 2 * n);

  NormalExtremal out;
  Eigen::VectorXd y(2 * n);
  y << x0, p0;
  out.H0 = ws.hamiltonian(y);
  out.samples.push_back({0.0, x0, p0, out.H0});

  auto record = [&](double t, const Eigen::VectorXd& state) {
    double H = ws.hamiltonian(state);
    out.max_drift = std::max(out.max_drift, std::abs(H - out.H0));
    out.samples.push_back({t, state.head(n), state.tail(n), H});
  };
  auto inside = [&](const Eigen::VectorXd& state) {
    return !spec.domain() || spec.domain()->contains(state.head(n));
  };

  double t = 0.0;
  long steps = 0;
  ws.rhs(y, stepper.stage0());

  // Initial step from the scaled state/derivative magnitudes, so strongly
  // oscillating extremals do not burn rejected trial steps at the start.
  double h = T / (8.0 * (n_samples - 1));
  {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double sc = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (stepper.stage0()[i] / sc) * (stepper.stage0()[i] / sc);
    }
    if (d1 > 0.0 && d0 > 0.0)
      h = std::min(h, 0.01 * std::sqrt(d0 / d1));
    h = std::max(h, 1e-8 * T);
  }

  for (int j = 1; j < n_samples; ++j) {
    const double t_target = T * static_cast<double>(j) / (n_samples - 1);
    while (t < t_target) {
      if (steps++ > opts.max_steps) {
        out.status = FlowStatus::StepFailure;
        out.t_end = t;
        return out;
      }
      h = std::min(h, t_target - t);
      const double h_min = 1e-14 * std::max(1.0, std::abs(t));
      double err = stepper.attempt(y, h, opts.rel_tol, opts.abs_tol);
      if (err <= 1.0) {
        if (!inside(stepper.result())) {
          // Escape: bisect the step for the first-exit time.
          stepper.begin_probe();
          double lo = 0.0, hi = h;
          Eigen::VectorXd ylo = y, yprobe;
          while (hi - lo > 1e-10) {
            double mid = 0.5 * (lo + hi);
            if (stepper.probe(y, mid, yprobe) && inside(yprobe)) {
              lo = mid;
              ylo = yprobe;
            } else {
              hi = mid;
            }
          }
          out.status = FlowStatus::Escaped;
          out.t_end = t + 0.5 * (lo + hi);
          record(t + lo, ylo);
          return out;
        }
        t += h;
        y = stepper.result();
        stepper.accept();
        double grow = 0.9 * std::pow(std::max(err, 1e-12), -0.2);
        h *= std::clamp(grow, 0.2, 5.0);
      } else {
        double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
        h *= shrink;
        if (h < h_min) {
          out.status = FlowStatus::StepFailure;
          out.t_end = t;
          return out;
        }
      }
    }
    record(t_target, y);
  }
  out.status = FlowStatus::Completed;
  out.t_end = T;
  return out;
}

Eigen::VectorXd exp_star(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& p, const IntegrateOptions& opts) {
  IntegrateOptions fast = opts;
  fast.n_samples = 2;  // endpoint only; the grid does not change the result
  NormalExtremal ext = integrate_extremal(spec, x, p, 1.0, fast);
  if (ext.status != FlowStatus::Completed)
    throw OutsideDomainOfExp(ext.status == FlowStatus::Escaped
                                 ? "extremal escaped the chart at t = " + std::to_string(ext.t_end)
                                 : "step controller failed at t = " + std::to_string(ext.t_end));
  return ext.samples.back().x;
}

Eigen::VectorXd exp_map(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& w, const IntegrateOptions& opts) {
  if (w.isZero(0.0)) throw ZeroVector("exp undefined at w = 0");
  FiberMomentum u = legendre_fiber_fwd(spec.norm(), w);
  return exp_star(spec, x, lift_covector(spec, x, u), opts);
}

Eigen::MatrixXd jacobian_exp_star(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& p, const IntegrateOptions& opts) {
  FiberMomentum u = reduce_covector(spec, x, p);
  if (u.norm() <= 1e-14 * std::max(1.0, p.norm()))
    throw ZeroVector("jacobian of exp* requested on the annihilator");
  const int n = spec.dim();
  const double h = 1e-6 * (1.0 + p.norm());
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd probe = p;
  for (int i = 0; i < n; ++i) {
    probe = p;
    probe[i] += h;
    Eigen::VectorXd plus = exp_star(spec, x, probe, opts);
    probe[i] = p[i] - h;
    Eigen::VectorXd minus = exp_star(spec, x, probe, opts);
    J.col(i) = (plus - minus) / (2.0 * h);
  }
  return J;
}

CompletenessReport completeness_probe(const ManifoldSpec& spec, const Eigen::VectorXd& x,
                                      int n_dirs, double T_max, std::uint64_t seed,
                                      const IntegrateOptions& opts) {
  spec.require_in_domain(x);
  if (n_dirs < 1) throw ValidationError("n_dirs must be >= 1");
  if (!(T_max > 0.0)) throw ValidationError("T_max must be positive");

  // Unit-energy initial covectors: p scaled so F*(u) = 1, i.e. H = 1/2.
  std::vector<Eigen::VectorXd> covectors;
  DetRng rng(seed);
  while (static_cast<int>(covectors.size()) < n_dirs) {
    Eigen::VectorXd d = rng.normal_vector(spec.dim());
    FiberMomentum u = reduce_covector(spec, x, d);
    if (u.isZero(0.0)) continue;
    double Fs = dual_norm(spec.norm(), u);
    if (!(Fs > 1e-9)) continue;  // nearly annihilator-only; cannot normalize
    covectors.push_back(d / Fs);
  }

  CompletenessReport report;
  report.statuses.resize(covectors.size());
  report.escape_times.resize(covectors.size());
  std::vector<double> drifts(covectors.size(), 0.0);
  parallel_for(covectors.size(), [&](std::size_t i) {
    NormalExtremal ext = integrate_extremal(spec, x, covectors[i], T_max, opts);
    report.statuses[i] = ext.status;
    report.escape_times[i] = ext.t_end;
    drifts[i] = ext.max_drift;
  });
  for (std::size_t i = 0; i < covectors.size(); ++i) {
    if (report.statuses[i] == FlowStatus::Completed) ++report.completed;
    report.max_drift = std::max(report.max_drift, drifts[i]);
  }
  report.fraction = static_cast<double>(report.completed) / static_cast<double>(n_dirs);
  return report;
}

}  // namespace subfinsler
