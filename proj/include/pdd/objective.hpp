#pragma once

#include "pdd/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace pdd {

/// Value, gradient and (when cheap) Hessian at one point.
struct Evaluation {
  double value = 0.0;
  Vector gradient;
  std::optional<Matrix> hessian;
};

/// A differentiable scalar function on R^dim.
///
/// Objectives are immutable after construction. All callables are pure, so a
/// single instance can be shared between threads.
class Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  Objective(std::string name, Index dim, ValueFn value, GradientFn gradient,
            HessianFn hessian = {}, std::optional<Vector> minimizer = std::nullopt);

  const std::string& name() const { return name_; }
  Index dim() const { return dim_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  bool has_hessian() const { return static_cast<bool>(hessian_); }
  /// Analytic Hessian. Throws std::logic_error when the problem has none.
  Matrix hessian(const Vector& x) const;

  const std::optional<Vector>& minimizer() const { return minimizer_; }

  /// Same objective with the gradient callable replaced, e.g. to count calls.
  Objective with_gradient(GradientFn gradient) const;

 private:
  std::string name_;
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::optional<Vector> minimizer_;
};

/// Analytic Hessian when available, otherwise central differences of the
/// gradient (symmetrized).
Matrix hessian_or_fd(const Objective& obj, const Vector& x, double h = 1e-5);

// Test problems. Each *_eval is the raw formula; each make_* wraps it.

Evaluation quadratic_eval(const Matrix& Q, const Vector& x);
Evaluation reg_log_sum_exp_eval(const Matrix& Q, const Vector& x, bool with_hessian = true);
Evaluation quad_minus_cos_eval(const Vector& c, const Vector& x);
Evaluation rosenbrock_eval(double a, double b, int n, const Vector& x);
Evaluation ackley_eval(const Vector& x);

/// f = x^T Q x / 2. Q must be symmetric positive definite.
Objective make_quadratic(const Matrix& Q);
/// f = log sum_i exp(q_i^T x) + x^T Q x / 2, q_i^T the rows of Q.
Objective make_reg_log_sum_exp(const Matrix& Q);
/// f = |x|^2 - cos(c^T x). Warns on stderr when |c|^2 >= 2 (loses convexity).
Objective make_quad_minus_cos(const Vector& c);
/// Coupled Rosenbrock sum over consecutive pairs; n >= 2.
Objective make_rosenbrock(double a, double b, int n);
/// Two-dimensional Ackley function.
Objective make_ackley();

/// Symmetric, strictly diagonally dominant matrix with positive diagonal.
/// Off-diagonals are uniform(-1,1)/n then symmetrized; the diagonal is the
/// row absolute sum plus uniform(1,2).
Matrix make_diag_dominant_Q(int n, std::uint64_t seed);

/// Vector c of length n with |c|^2 = norm_sq, drawn from a seeded Gaussian.
Vector make_cos_direction(int n, std::uint64_t seed, double norm_sq = 1.9);

/// Error measure used by the finite-difference checks: |a-b| / max(1, |a|, |b|).
double relative_error(double analytic, double numeric);

/// Max relative error of the analytic gradient against central differences
/// of the value with step h.
double check_gradient(const Objective& obj, const Vector& x, double h);

/// Max relative error of the analytic Hessian against central differences of
/// the gradient. Requires obj.has_hessian().
double check_hessian(const Objective& obj, const Vector& x, double h);

}  // namespace pdd
