#pragma once

#include "pdd/objective.hpp"
#include "pdd/preconditioner.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pdd {

/// Scalars of the linearized primal-dual damping iteration. The dual
/// preconditioner is the scalar A times the identity.
struct PddParams {
  double tau = 0.0;
  double sigma = 0.0;
  double A = 1.0;
  double epsilon = 1.0;
  double omega = 1.0;
  Preconditioner C;

  /// Effective Hessian-damping coefficient sigma * omega.
  double gamma() const { return sigma * omega; }
  void validate() const;
};

struct PddState {
  Vector x;
  Vector p;
  long iter = 0;
  bool diverged = false;
};

/// One PDD iteration:
///   p+ = (p + sigma A g) / (1 + sigma eps A)
///   pt = p+ + omega (p+ - p)
///   x+ = x - tau C(x) pt
/// with g the gradient at x. Exactly one gradient evaluation. A non-finite
/// gradient or iterate sets `diverged` and leaves x, p untouched.
PddState pdd_step(const PddState& state, const PddParams& params, const Objective& obj);

/// pdd_step with the gradient at state.x supplied by the caller.
PddState pdd_update(const PddState& state, const PddParams& params, const Vector& grad);

// Baseline iterations. Each throws NonFiniteError on a non-finite gradient.

Vector gd_step(const Vector& x, double tau, const Objective& obj);

struct NagResult {
  Vector x;
  Vector y;
};

/// y+ = x - tau grad f(x);  x+ = y+ + beta (y_prev - y_prev2).
NagResult nag_step(const Vector& x, const Vector& y_prev, const Vector& y_prev2, double tau,
                   double beta, const Objective& obj);

struct DampedResult {
  Vector x;     // next iterate
  Vector grad;  // gradient at the current iterate, for reuse as g_prev
};

/// Inertial gradient step with Hessian damping (two gradient evaluations):
///   y = x + (1 - alpha/n)(x - x_prev) - beta1 sqrt(tau)(g - g_prev) - beta1 sqrt(tau)/n g_prev
///   x+ = y - tau grad f(y)
DampedResult igahd_step(const Vector& x, const Vector& x_prev, const Vector& g_prev, long n,
                        double tau, double alpha, double beta1, const Objective& obj);

/// Strongly convex variant (one gradient evaluation); r = (1 - s)/(1 + s), s = sqrt(m1 tau).
DampedResult igahd_sc_step(const Vector& x, const Vector& x_prev, const Vector& g_prev, double m1,
                           double tau, double beta2, const Objective& obj);

/// x+ = x - tau grad f(x) + beta (x - x_prev).
Vector heavy_ball_step(const Vector& x, const Vector& x_prev, double tau, double beta,
                       const Objective& obj);

/// beta2 = (sqrt(tau) + tau sqrt(m1)/2) / (4 + 8 sqrt(m1 tau) - 2 m1 tau).
double compute_beta2(double m1, double tau);

// Method descriptions for run_optimizer.

struct GdMethod {
  double tau = 0.0;
  Preconditioner C;  // identity gives plain gradient descent
};
struct NagMethod {
  double tau = 0.0;
  double beta = 0.0;
};
struct HeavyBallMethod {
  double tau = 0.0;
  double beta = 0.0;
};
struct IgahdMethod {
  double tau = 0.0;
  double alpha = 3.0;
  double beta1 = 0.0;
};
struct IgahdScMethod {
  double tau = 0.0;
  double m1 = 0.0;
  double beta2 = 0.0;
};
struct PddMethod {
  PddParams params;
  std::optional<Vector> p0;  // zero when absent
};

using Method = std::variant<GdMethod, NagMethod, HeavyBallMethod, IgahdMethod, IgahdScMethod, PddMethod>;

std::string method_name(const Method& method);
/// Throws std::invalid_argument for out-of-range hyperparameters.
void validate(const Method& method);

struct RunOptions {
  long max_iter = 1000;
  double grad_tol = 0.0;
  long record_every = 1;
};

struct Record {
  long iter = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double lyapunov = 0.0;
  std::optional<double> dist_to_min;
};

struct Trajectory {
  std::vector<Record> records;
  Vector x;  // terminal iterate
  Vector p;  // terminal dual (zero for non-PDD methods)
  long iterations = 0;
  long gradient_evaluations = 0;
  bool converged = false;
  bool diverged = false;
};

/// Iterates until |grad f| <= grad_tol, max_iter steps, or divergence.
/// Metrics are recorded at iteration 0, every record_every steps, and at the
/// terminal iterate.
Trajectory run_optimizer(const Objective& obj, const Method& method, const Vector& x0,
                         const RunOptions& options);

}  // namespace pdd
