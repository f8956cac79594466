#pragma once

#include "pdd/objective.hpp"
#include "pdd/optimizers.hpp"
#include "pdd/preconditioner.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace pdd {

using EpsilonSchedule = std::function<double(double)>;

/// Coefficients of the continuous primal-dual damping system
///   p' = A grad f(x) - eps A p
///   x' = -C(x) (p + gamma (A grad f(x) - eps A p))
/// A is a scalar multiple of the identity.
struct DynParams {
  double A = 1.0;
  std::variant<double, EpsilonSchedule> epsilon = 1.0;
  double gamma = 0.0;
  Preconditioner C;

  bool time_dependent() const { return epsilon.index() == 1; }
  /// eps(t). Schedules are only evaluated for t > 0.
  double epsilon_at(double t) const;
};

struct PhaseVelocity {
  Vector dx;
  Vector dp;
};

PhaseVelocity pdd_vector_field(const Vector& x, const Vector& p, double t, const DynParams& params,
                               const Objective& obj);

enum class SpecialCase { hessian_damping, heavy_ball, nesterov };

/// C = A = I with the case's (eps, gamma):
///   hessian_damping: x'' + eps x' + gamma Hess f x' + grad f = 0, gamma != 0
///   heavy_ball:      gamma = 0, constant eps
///   nesterov:        gamma = 0, eps(t) = 3/t (the eps argument is ignored)
DynParams make_special_case(SpecialCase kind, double eps, double gamma);

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Vector> xs;
  std::vector<Vector> ps;
  double dt = 0.0;
  bool diverged = false;
};

/// Fixed-step classical RK4 from t0 to t_end. t0 is 0 for constant eps and
/// dt for time-dependent schedules, which are singular at t = 0.
OdeTrajectory integrate_rk4(const DynParams& params, const Objective& obj, const Vector& x0,
                            const Vector& p0, double t_end, double dt);

/// Largest |(x,p)| over the samples; used to scale residuals.
double trajectory_scale(const OdeTrajectory& traj);

/// Max over interior samples of
///   | x'' + (eps A + gamma C A Hess f(x)) x' + C A grad f(x) |
/// with x' and x'' from central differences. Requires a constant C.
double second_order_residual(const OdeTrajectory& traj, const DynParams& params, const Objective& obj);

struct ConsistencyReport {
  std::vector<double> taus;
  std::vector<double> max_errors;       // max over n of |(x,p)_n - (x,p)(n tau)|
  std::vector<double> endpoint_errors;  // same at the last common time
};

/// Runs the discrete iteration with tau = sigma and omega = gamma / sigma for
/// each tau and compares against an RK4 solution of the continuous system
/// with dt = tau / 8, sampled at t = n tau up to t_end. `params` supplies A,
/// eps, gamma and C (constant eps only).
ConsistencyReport discrete_continuous_consistency(const Objective& obj, const DynParams& params,
                                                  const Vector& x0, const Vector& p0, double t_end,
                                                  const std::vector<double>& taus);

}  // namespace pdd
