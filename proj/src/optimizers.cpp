#include "pdd/optimizers.hpp"

#include <cmath>
#include <type_traits>
#include <utility>

namespace pdd {

namespace {

Vector checked_gradient(const Objective& obj, const Vector& x) {
  Vector g = obj.gradient(x);
  if (!g.allFinite()) throw NonFiniteError(obj.name() + ": non-finite gradient");
  return g;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_momentum(double beta, const char* what) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1)");
}

}  // namespace

void PddParams::validate() const {
  require_positive(tau, "pdd tau");
  require_positive(sigma, "pdd sigma");
  require_positive(A, "pdd A");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("pdd epsilon must be non-negative");
  if (!(omega >= 0.0)) throw std::invalid_argument("pdd omega must be non-negative");
}

PddState pdd_update(const PddState& state, const PddParams& params, const Vector& grad) {
  if (state.x.size() != state.p.size()) throw std::invalid_argument("pdd: x and p differ in length");
  require_dim(grad, state.x.size(), "pdd gradient");
  PddState next = state;
  next.iter = state.iter + 1;
  if (!grad.allFinite()) {
    next.diverged = true;
    return next;
  }
  const double denom = 1.0 + params.sigma * params.epsilon * params.A;
  Vector p_next = (state.p + params.sigma * params.A * grad) / denom;
  const Vector p_bar = p_next + params.omega * (p_next - state.p);
  Vector x_next = state.x - params.tau * params.C.apply(state.x, p_bar);
  if (!x_next.allFinite() || !p_next.allFinite()) {
    next.diverged = true;
    return next;
  }
  next.x = std::move(x_next);
  next.p = std::move(p_next);
  return next;
}

PddState pdd_step(const PddState& state, const PddParams& params, const Objective& obj) {
  require_dim(state.x, obj.dim(), "pdd_step");
  return pdd_update(state, params, obj.gradient(state.x));
}

Vector gd_step(const Vector& x, double tau, const Objective& obj) {
  require_positive(tau, "gd tau");
  return x - tau * checked_gradient(obj, x);
}

NagResult nag_step(const Vector& x, const Vector& y_prev, const Vector& y_prev2, double tau,
                   double beta, const Objective& obj) {
  require_positive(tau, "nag tau");
  require_momentum(beta, "nag beta");
  Vector y = x - tau * checked_gradient(obj, x);
  Vector x_next = y + beta * (y_prev - y_prev2);
  return {std::move(x_next), std::move(y)};
}

DampedResult igahd_step(const Vector& x, const Vector& x_prev, const Vector& g_prev, long n,
                        double tau, double alpha, double beta1, const Objective& obj) {
  if (n < 1) throw std::invalid_argument("igahd: iteration counter must start at 1");
  require_positive(tau, "igahd tau");
  const double root_tau = std::sqrt(tau);
  if (!(beta1 >= 0.0 && beta1 <= 2.0 * root_tau)) {
    throw std::invalid_argument("igahd: beta1 must lie in [0, 2 sqrt(tau)]");
  }
  Vector g = checked_gradient(obj, x);
  const double inertia = 1.0 - alpha / static_cast<double>(n);
  const double damping = beta1 * root_tau;
  const Vector y = x + inertia * (x - x_prev) - damping * (g - g_prev) -
                   (damping / static_cast<double>(n)) * g_prev;
  Vector x_next = y - tau * checked_gradient(obj, y);
  return {std::move(x_next), std::move(g)};
}

DampedResult igahd_sc_step(const Vector& x, const Vector& x_prev, const Vector& g_prev, double m1,
                           double tau, double beta2, const Objective& obj) {
  require_positive(m1, "igahd_sc m1");
  require_positive(tau, "igahd_sc tau");
  if (beta2 > 1.0 / std::sqrt(m1)) throw std::invalid_argument("igahd_sc: beta2 exceeds 1/sqrt(m1)");
  Vector g = checked_gradient(obj, x);
  const double s = std::sqrt(m1 * tau);
  const double r = (1.0 - s) / (1.0 + s);
  Vector x_next = x + r * (x - x_prev) - (beta2 * std::sqrt(tau) / (1.0 + s)) * (g - g_prev) -
                  (tau / (1.0 + s)) * g;
  return {std::move(x_next), std::move(g)};
}

Vector heavy_ball_step(const Vector& x, const Vector& x_prev, double tau, double beta,
                       const Objective& obj) {
  require_positive(tau, "heavy ball tau");
  require_momentum(beta, "heavy ball beta");
  return x - tau * checked_gradient(obj, x) + beta * (x - x_prev);
}

double compute_beta2(double m1, double tau) {
  require_positive(m1, "beta2 m1");
  require_positive(tau, "beta2 tau");
  const double s = std::sqrt(m1 * tau);
  const double denom = 4.0 + 8.0 * s - 2.0 * m1 * tau;
  if (!(denom > 0.0)) throw std::invalid_argument("compute_beta2: non-positive denominator");
  return (std::sqrt(tau) + tau * std::sqrt(m1) / 2.0) / denom;
}

std::string method_name(const Method& method) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GdMethod>) return "gd";
        else if constexpr (std::is_same_v<T, NagMethod>) return "nag";
        else if constexpr (std::is_same_v<T, HeavyBallMethod>) return "heavy_ball";
        else if constexpr (std::is_same_v<T, IgahdMethod>) return "igahd";
        else if constexpr (std::is_same_v<T, IgahdScMethod>) return "igahd_sc";
        else return "pdd";
      },
      method);
}

void validate(const Method& method) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GdMethod>) {
          require_positive(m.tau, "gd tau");
        } else if constexpr (std::is_same_v<T, NagMethod> || std::is_same_v<T, HeavyBallMethod>) {
          require_positive(m.tau, "tau");
          require_momentum(m.beta, "beta");
        } else if constexpr (std::is_same_v<T, IgahdMethod>) {
          require_positive(m.tau, "igahd tau");
          if (!(m.alpha >= 0.0)) throw std::invalid_argument("igahd alpha must be non-negative");
          if (!(m.beta1 >= 0.0 && m.beta1 <= 2.0 * std::sqrt(m.tau))) {
            throw std::invalid_argument("igahd beta1 must lie in [0, 2 sqrt(tau)]");
          }
        } else if constexpr (std::is_same_v<T, IgahdScMethod>) {
          require_positive(m.tau, "igahd_sc tau");
          require_positive(m.m1, "igahd_sc m1");
          if (m.beta2 > 1.0 / std::sqrt(m.m1)) throw std::invalid_argument("igahd_sc beta2 exceeds 1/sqrt(m1)");
        } else {
          m.params.validate();
        }
      },
      method);
}

namespace {

// Each stepper owns the iterate history of one method and advances it given
// the gradient at the current iterate.

struct GdStepper {
  GdMethod m;
  Vector x;
  void advance(const Objective&, const Vector& g, long&) { x -= m.tau * m.C.apply(x, g); }
  const Vector* dual() const { return nullptr; }
};

struct NagStepper {
  NagMethod m;
  Vector x, y_prev, y_prev2;
  void advance(const Objective&, const Vector& g, long&) {
    Vector y = x - m.tau * g;
    x = y + m.beta * (y_prev - y_prev2);
    y_prev2 = std::move(y_prev);
    y_prev = std::move(y);
  }
  const Vector* dual() const { return nullptr; }
};

struct HeavyBallStepper {
  HeavyBallMethod m;
  Vector x, x_prev;
  void advance(const Objective&, const Vector& g, long&) {
    Vector next = x - m.tau * g + m.beta * (x - x_prev);
    x_prev = std::move(x);
    x = std::move(next);
  }
  const Vector* dual() const { return nullptr; }
};

struct IgahdStepper {
  IgahdMethod m;
  Vector x, x_prev;
  std::optional<Vector> g_prev;
  long n = 1;
  void advance(const Objective& obj, const Vector& g, long& grad_evals) {
    if (!g_prev) g_prev = g;
    const double damping = m.beta1 * std::sqrt(m.tau);
    const double inertia = 1.0 - m.alpha / static_cast<double>(n);
    const Vector y = x + inertia * (x - x_prev) - damping * (g - *g_prev) -
                     (damping / static_cast<double>(n)) * *g_prev;
    const Vector gy = checked_gradient(obj, y);
    ++grad_evals;
    x_prev = std::move(x);
    x = y - m.tau * gy;
    g_prev = g;
    ++n;
  }
  const Vector* dual() const { return nullptr; }
};

struct IgahdScStepper {
  IgahdScMethod m;
  Vector x, x_prev;
  std::optional<Vector> g_prev;
  void advance(const Objective&, const Vector& g, long&) {
    if (!g_prev) g_prev = g;
    const double s = std::sqrt(m.m1 * m.tau);
    const double r = (1.0 - s) / (1.0 + s);
    Vector next = x + r * (x - x_prev) - (m.beta2 * std::sqrt(m.tau) / (1.0 + s)) * (g - *g_prev) -
                  (m.tau / (1.0 + s)) * g;
    x_prev = std::move(x);
    x = std::move(next);
    g_prev = g;
  }
  const Vector* dual() const { return nullptr; }
};

struct PddStepper {
  PddParams params;
  PddState state;
  Vector& x = state.x;
  PddStepper(PddParams p, PddState s) : params(std::move(p)), state(std::move(s)) {}
  void advance(const Objective&, const Vector& g, long&) {
    PddState next = pdd_update(state, params, g);
    if (next.diverged) throw NonFiniteError("pdd: non-finite iterate");
    state.x = std::move(next.x);
    state.p = std::move(next.p);
    state.iter = next.iter;
  }
  const Vector* dual() const { return &state.p; }
};

template <typename Stepper>
Trajectory drive(const Objective& obj, Stepper& stepper, const RunOptions& opt) {
  Trajectory traj;
  const std::optional<Vector>& xmin = obj.minimizer();
  auto record = [&](long n, const Vector& g) {
    Record r;
    r.iter = n;
    r.f = obj.value(stepper.x);
    r.grad_norm = g.norm();
    const Vector* p = stepper.dual();
    r.lyapunov = 0.5 * (g.squaredNorm() + (p ? p->squaredNorm() : 0.0));
    if (xmin) r.dist_to_min = (stepper.x - *xmin).norm();
    if (!std::isfinite(r.f) || !std::isfinite(r.lyapunov)) throw NonFiniteError(obj.name() + ": non-finite value");
    traj.records.push_back(r);
  };

  long n = 0;
  try {
    for (;; ++n) {
      const Vector g = checked_gradient(obj, stepper.x);
      ++traj.gradient_evaluations;
      const bool done = g.norm() <= opt.grad_tol;
      if (done || n >= opt.max_iter || n % opt.record_every == 0) record(n, g);
      if (done) {
        traj.converged = true;
        break;
      }
      if (n >= opt.max_iter) break;
      Vector x_before = stepper.x;
      stepper.advance(obj, g, traj.gradient_evaluations);
      if (!stepper.x.allFinite()) {
        stepper.x = std::move(x_before);
        throw NonFiniteError(obj.name() + ": non-finite iterate");
      }
    }
  } catch (const NonFiniteError&) {
    traj.diverged = true;
  }
  traj.iterations = n;
  traj.x = stepper.x;
  traj.p = stepper.dual() ? *stepper.dual() : Vector::Zero(stepper.x.size());
  return traj;
}

}  // namespace

Trajectory run_optimizer(const Objective& obj, const Method& method, const Vector& x0,
                         const RunOptions& options) {
  if (options.max_iter < 1) throw std::invalid_argument("run_optimizer: max_iter must be >= 1");
  if (!(options.grad_tol >= 0.0)) throw std::invalid_argument("run_optimizer: grad_tol must be >= 0");
  if (options.record_every < 1) throw std::invalid_argument("run_optimizer: record_every must be >= 1");
  require_dim(x0, obj.dim(), "run_optimizer x0");
  require_finite(x0, "run_optimizer x0");
  validate(method);

  return std::visit(
      [&](const auto& m) -> Trajectory {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GdMethod>) {
          GdStepper s{m, x0};
          return drive(obj, s, options);
        } else if constexpr (std::is_same_v<T, NagMethod>) {
          NagStepper s{m, x0, x0, x0};
          return drive(obj, s, options);
        } else if constexpr (std::is_same_v<T, HeavyBallMethod>) {
          HeavyBallStepper s{m, x0, x0};
          return drive(obj, s, options);
        } else if constexpr (std::is_same_v<T, IgahdMethod>) {
          IgahdStepper s{m, x0, x0, std::nullopt, 1};
          return drive(obj, s, options);
        } else if constexpr (std::is_same_v<T, IgahdScMethod>) {
          IgahdScStepper s{m, x0, x0, std::nullopt};
          return drive(obj, s, options);
        } else {
          PddState init{x0, m.p0.value_or(Vector::Zero(x0.size())), 0, false};
          require_dim(init.p, x0.size(), "run_optimizer p0");
          PddStepper s(m.params, std::move(init));
          return drive(obj, s, options);
        }
      },
      method);
}

}  // namespace pdd
