#pragma once

#include "pdd/objective.hpp"
#include "pdd/optimizers.hpp"

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pdd {

/// I(x, p) = (|p|^2 + |grad f(x)|^2) / 2.
double lyapunov_I(const Objective& obj, const Vector& x, const Vector& p);

/// Continuous-time decay exponent: the minimum of
///   mu gamma A - |A - mu (1 - eps gamma A)| / 2,   L gamma A - |A - L (1 - eps gamma A)| / 2,
///   eps A - |A - mu (1 - eps gamma A)| / 2,        eps A - |A - L (1 - eps gamma A)| / 2.
/// I(t) <= I(0) exp(-2 lambda t) when the spectrum of C0 lies in [mu, L].
/// May be negative, in which case no decay is certified.
double continuous_lambda(double mu, double L, double gamma, double eps, double A);

/// Step-size recipe with a guaranteed per-step Lyapunov contraction.
struct StepRecipe {
  PddParams params;     // tau = sigma, eps = 1, omega = gamma / sigma, C = identity
  double gamma = 0.0;   // (1 - sigma mu) / mu
  double decay_factor = 0.0;  // 1 - (mu^2/32) / (delta + 36 max{L', 1})
};

/// tau = sigma = mu / (4 (delta + 36 max{L', 1})), gamma = (1 - sigma mu)/mu,
/// eps = 1, A = (mu + L)/(2 + (mu + L) gamma). Requires 0 < mu <= L <= L' and
/// delta >= 0; asserts gamma A < 1 and sigma < 1/36 on the result.
StepRecipe theorem6_params(double mu, double L, double Lp, double delta);

struct SpectralMode {
  double mu = 0.0;  // eigenvalue of B Q A Q
  double a = 0.0;   // matching eigenvalue of A
  std::pair<std::complex<double>, std::complex<double>> roots;
};

struct SpectralReport {
  std::vector<SpectralMode> modes;
  double alpha = 0.0;  // largest real part over all roots
  bool converges = false;
};

/// Roots of alpha^2 + alpha (eps a_i + gamma mu_i) + mu_i = 0 for each mode of
/// the linearized quadratic system.
SpectralReport quadratic_spectral_rate(std::span<const double> mus, std::span<const double> as,
                                       double gamma, double eps);

/// The 2d x 2d system matrix for f = x^T Q x / 2 with constant A and B:
///   [ -gamma B Q A Q   -B Q (I - gamma eps A) ]
///   [  A Q             -eps A                 ]
Matrix linear_system_matrix(const Matrix& Q, const Matrix& A, const Matrix& B, double gamma, double eps);

struct OptimalGamma {
  double gamma_star = 0.0;
  double alpha = 0.0;
};

/// Best Hessian-damping coefficient for A = I, eps = 0:
///   gamma* = 2 sqrt(mu1) / sqrt(mun (2 mu1 - mun)),  alpha = -sqrt(mun) / sqrt(2 - 1/kappa).
OptimalGamma optimal_gamma(double mu1, double mun);

struct NHMatrices {
  Matrix N;
  Matrix H;
};

/// Discrete iteration matrix N(x), with (x+ - x, p+ - p) = -tau N(x) (grad f, p), and
/// H = sym(diag(Hess f, I) N). Uses the analytic Hessian or finite differences.
NHMatrices build_N_H(const Objective& obj, const Vector& x, const PddParams& params);

/// Hessian of I in (x, p): diag(Hess3 f[grad f] + (Hess f)^2, I).
Matrix lyapunov_hessian(const Objective& obj, const Vector& x);

/// Third-derivative contraction Hess3 f(x)[v] by central differences of the
/// Hessian with h = 1e-5 (1 + |x|) / (1 + |v|).
Matrix third_derivative_along(const Objective& obj, const Vector& x, const Vector& v);

struct DiscreteRateReport {
  double lambda_min_H = 0.0;   // min over the states of lambda_min(H(x_n)); NaN without a recipe
  double M_bound = 0.0;        // max over the states of |N^T Hess I N|_2; NaN without a recipe
  double tau_recipe = 0.0;
  double decay_factor = 0.0;
  std::vector<double> per_step_ratios;
  std::vector<double> lyapunov;  // I(x_n, p_n)
  bool within_bound = false;     // every ratio and the cumulative bound respect decay_factor
};

/// Per-step ratios I_{n+1} / I_n (0 when I_n = 0) of a PDD trajectory. When a
/// recipe is given the ratios are compared against its decay factor, both
/// per step and cumulatively (I_n <= I_0 decay^n).
DiscreteRateReport discrete_decay_check(std::span<const PddState> states, const Objective& obj,
                                        const std::optional<StepRecipe>& recipe = std::nullopt);

/// PDD states x_0..x_n produced by repeated pdd_step.
std::vector<PddState> pdd_states(const Objective& obj, const PddParams& params, const Vector& x0,
                                 const Vector& p0, long steps);

struct Constants {
  double mu = 0.0;  // min eigenvalue of C0 = Hess f B Hess f over the samples
  double L = 0.0;   // max eigenvalue of C0
  double Lp = 0.0;  // max eigenvalue of C^T (Hess3 f[grad f] + (Hess f)^2) C
};

/// Sampled estimates of the curvature constants. B is recovered as
/// C (Hess f)^{-1}; eigenvalues are those of the symmetric parts.
Constants estimate_constants(const Objective& obj, std::span<const Vector> samples,
                             const Preconditioner& C = Preconditioner::identity());

/// Sampled lower bound for the supremum of the normalized cubic form of the
/// third derivative of I, probed along `directions` seeded random unit
/// directions at each sample.
double estimate_D0(const Objective& obj, std::span<const Vector> samples, int directions,
                   std::uint64_t seed);

/// Seeded points x0 + radius * uniform(-1, 1)^d.
std::vector<Vector> sample_points(const Vector& center, double radius, int count, std::uint64_t seed);

}  // namespace pdd
