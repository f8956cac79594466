#include "pdd/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace pdd {

double DynParams::epsilon_at(double t) const {
  if (const auto* c = std::get_if<double>(&epsilon)) return *c;
  if (!(t > 0.0)) throw std::domain_error("time-dependent epsilon evaluated at t <= 0");
  return std::get<EpsilonSchedule>(epsilon)(t);
}

PhaseVelocity pdd_vector_field(const Vector& x, const Vector& p, double t, const DynParams& params,
                               const Objective& obj) {
  require_dim(x, obj.dim(), "pdd_vector_field x");
  require_dim(p, obj.dim(), "pdd_vector_field p");
  const double eps = params.epsilon_at(t);
  Vector dp = params.A * obj.gradient(x) - (eps * params.A) * p;
  Vector dx = -params.C.apply(x, p + params.gamma * dp);
  return {std::move(dx), std::move(dp)};
}

DynParams make_special_case(SpecialCase kind, double eps, double gamma) {
  DynParams params;
  params.A = 1.0;
  params.C = Preconditioner::identity();
  switch (kind) {
    case SpecialCase::hessian_damping:
      if (gamma == 0.0) throw std::invalid_argument("hessian_damping requires gamma != 0");
      params.epsilon = eps;
      params.gamma = gamma;
      break;
    case SpecialCase::heavy_ball:
      params.epsilon = eps;
      params.gamma = 0.0;
      break;
    case SpecialCase::nesterov:
      params.epsilon = EpsilonSchedule([](double t) { return 3.0 / t; });
      params.gamma = 0.0;
      break;
    default:
      throw std::invalid_argument("make_special_case: unknown kind");
  }
  return params;
}

OdeTrajectory integrate_rk4(const DynParams& params, const Objective& obj, const Vector& x0,
                            const Vector& p0, double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_rk4: dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("integrate_rk4: t_end must be >= dt");
  require_dim(x0, obj.dim(), "integrate_rk4 x0");
  require_dim(p0, obj.dim(), "integrate_rk4 p0");

  const double t0 = params.time_dependent() ? dt : 0.0;
  const auto steps = static_cast<long>(std::llround((t_end - t0) / dt));

  OdeTrajectory traj;
  traj.dt = dt;
  traj.times.reserve(steps + 1);
  traj.xs.reserve(steps + 1);
  traj.ps.reserve(steps + 1);
  traj.times.push_back(t0);
  traj.xs.push_back(x0);
  traj.ps.push_back(p0);

  Vector x = x0;
  Vector p = p0;
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    const PhaseVelocity k1 = pdd_vector_field(x, p, t, params, obj);
    const PhaseVelocity k2 =
        pdd_vector_field(x + 0.5 * dt * k1.dx, p + 0.5 * dt * k1.dp, t + 0.5 * dt, params, obj);
    const PhaseVelocity k3 =
        pdd_vector_field(x + 0.5 * dt * k2.dx, p + 0.5 * dt * k2.dp, t + 0.5 * dt, params, obj);
    const PhaseVelocity k4 = pdd_vector_field(x + dt * k3.dx, p + dt * k3.dp, t + dt, params, obj);
    x += (dt / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    p += (dt / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    if (!x.allFinite() || !p.allFinite()) {
      traj.diverged = true;
      break;
    }
    traj.times.push_back(t0 + static_cast<double>(k + 1) * dt);
    traj.xs.push_back(x);
    traj.ps.push_back(p);
  }
  return traj;
}

double trajectory_scale(const OdeTrajectory& traj) {
  double scale = 0.0;
  for (std::size_t k = 0; k < traj.xs.size(); ++k) {
    scale = std::max(scale, std::sqrt(traj.xs[k].squaredNorm() + traj.ps[k].squaredNorm()));
  }
  return scale;
}

double second_order_residual(const OdeTrajectory& traj, const DynParams& params, const Objective& obj) {
  if (traj.xs.size() < 3) throw std::invalid_argument("second_order_residual: need at least 3 samples");
  if (!params.C.is_constant()) throw std::invalid_argument("second_order_residual: C must be constant");
  const double dt = traj.dt;
  const Matrix C = params.C.matrix(traj.xs.front());
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.xs.size(); ++k) {
    const Vector& xm = traj.xs[k - 1];
    const Vector& x = traj.xs[k];
    const Vector& xp = traj.xs[k + 1];
    const Vector vel = (xp - xm) / (2.0 * dt);
    const Vector acc = (xp - 2.0 * x + xm) / (dt * dt);
    const double eps = params.epsilon_at(traj.times[k]);
    const Vector damping =
        (eps * params.A) * vel + params.gamma * params.A * (C * (hessian_or_fd(obj, x) * vel));
    const Vector r = acc + damping + params.A * (C * obj.gradient(x));
    worst = std::max(worst, r.norm());
  }
  return worst;
}

ConsistencyReport discrete_continuous_consistency(const Objective& obj, const DynParams& params,
                                                  const Vector& x0, const Vector& p0, double t_end,
                                                  const std::vector<double>& taus) {
  if (params.time_dependent()) throw std::invalid_argument("consistency check needs a constant epsilon");
  const double eps = std::get<double>(params.epsilon);
  ConsistencyReport report;
  for (const double tau : taus) {
    if (!(tau > 0.0)) throw std::invalid_argument("consistency: tau must be positive");
    const auto steps = static_cast<long>(std::llround(t_end / tau));
    constexpr long kSub = 8;
    const OdeTrajectory ref = integrate_rk4(params, obj, x0, p0, static_cast<double>(steps) * tau, tau / kSub);

    PddParams pp;
    pp.tau = tau;
    pp.sigma = tau;
    pp.A = params.A;
    pp.epsilon = eps;
    pp.omega = params.gamma / tau;
    pp.C = params.C;

    PddState state{x0, p0, 0, false};
    double max_err = 0.0;
    double last_err = 0.0;
    for (long n = 0; n <= steps; ++n) {
      const std::size_t k = static_cast<std::size_t>(n * kSub);
      if (k >= ref.xs.size() || state.diverged) break;
      last_err = std::sqrt((state.x - ref.xs[k]).squaredNorm() + (state.p - ref.ps[k]).squaredNorm());
      max_err = std::max(max_err, last_err);
      if (n < steps) state = pdd_step(state, pp, obj);
    }
    report.taus.push_back(tau);
    report.max_errors.push_back(max_err);
    report.endpoint_errors.push_back(last_err);
  }
  return report;
}

}  // namespace pdd
