#include "pdd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <utility>

namespace pdd {

Objective::Objective(std::string name, Index dim, ValueFn value, GradientFn gradient,
                     HessianFn hessian, std::optional<Vector> minimizer)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      minimizer_(std::move(minimizer)) {
  if (dim_ <= 0) throw std::invalid_argument("Objective: dim must be positive");
  if (!value_ || !gradient_) throw std::invalid_argument("Objective: value and gradient are required");
  if (minimizer_) require_dim(*minimizer_, dim_, "Objective minimizer");
}

double Objective::value(const Vector& x) const {
  require_dim(x, dim_, name_);
  return value_(x);
}

Vector Objective::gradient(const Vector& x) const {
  require_dim(x, dim_, name_);
  return gradient_(x);
}

Matrix Objective::hessian(const Vector& x) const {
  if (!hessian_) throw std::logic_error(name_ + ": no analytic Hessian");
  require_dim(x, dim_, name_);
  return hessian_(x);
}

Objective Objective::with_gradient(GradientFn gradient) const {
  Objective copy = *this;
  copy.gradient_ = std::move(gradient);
  return copy;
}

Matrix hessian_or_fd(const Objective& obj, const Vector& x, double h) {
  if (obj.has_hessian()) return obj.hessian(x);
  const Index d = obj.dim();
  Matrix H(d, d);
  Vector xp = x;
  for (Index j = 0; j < d; ++j) {
    const double step = h * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + step;
    const Vector gp = obj.gradient(xp);
    xp[j] = x[j] - step;
    const Vector gm = obj.gradient(xp);
    xp[j] = x[j];
    H.col(j) = (gp - gm) / (2.0 * step);
  }
  return sym(H);
}

namespace {

void require_square(const Matrix& Q, const std::string& what) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) throw std::invalid_argument(what + ": Q must be square and non-empty");
}

void require_symmetric(const Matrix& Q, const std::string& what) {
  require_square(Q, what);
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(what + ": Q is not symmetric");
  }
}

}  // namespace

Evaluation quadratic_eval(const Matrix& Q, const Vector& x) {
  require_square(Q, "quadratic");
  require_dim(x, Q.rows(), "quadratic");
  Vector g = Q * x;
  return {0.5 * x.dot(g), std::move(g), Q};
}

Evaluation reg_log_sum_exp_eval(const Matrix& Q, const Vector& x, bool with_hessian) {
  require_square(Q, "reg_log_sum_exp");
  require_dim(x, Q.rows(), "reg_log_sum_exp");
  const Vector z = Q * x;  // z_i = q_i^T x
  const double zmax = z.maxCoeff();
  const Vector e = (z.array() - zmax).exp().matrix();
  const double total = e.sum();
  const Vector s = e / total;

  Evaluation out;
  out.value = zmax + std::log(total) + 0.5 * x.dot(z);
  out.gradient = Q.transpose() * s + z;
  if (!with_hessian) return out;
  Matrix inner = -s * s.transpose();
  inner.diagonal() += s;
  out.hessian = Q.transpose() * inner * Q + Q;
  return out;
}

Evaluation quad_minus_cos_eval(const Vector& c, const Vector& x) {
  require_dim(x, c.size(), "quad_minus_cos");
  const double t = c.dot(x);
  Evaluation out;
  out.value = x.squaredNorm() - std::cos(t);
  out.gradient = 2.0 * x + std::sin(t) * c;
  Matrix H = std::cos(t) * c * c.transpose();
  H.diagonal().array() += 2.0;
  out.hessian = std::move(H);
  return out;
}

Evaluation rosenbrock_eval(double a, double b, int n, const Vector& x) {
  if (n < 2) throw std::invalid_argument("rosenbrock: N must be at least 2");
  require_dim(x, n, "rosenbrock");
  Evaluation out;
  out.gradient = Vector::Zero(n);
  double f = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double u = a - x[i];
    const double v = x[i + 1] - x[i] * x[i];
    f += u * u + b * v * v;
    out.gradient[i] += -2.0 * u - 4.0 * b * x[i] * v;
    out.gradient[i + 1] += 2.0 * b * v;
  }
  out.value = f;
  return out;
}

Evaluation ackley_eval(const Vector& x) {
  require_dim(x, 2, "ackley");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double r = std::sqrt(0.5 * x.squaredNorm());
  const double radial = std::exp(-0.2 * r);
  const double wave = std::exp(0.5 * (std::cos(two_pi * x[0]) + std::cos(two_pi * x[1])));

  Evaluation out;
  out.value = -20.0 * radial - wave + std::numbers::e + 20.0;
  out.gradient = Vector::Zero(2);
  // The radial term has a cone point at the origin; its subgradient there is
  // taken to be zero.
  if (r > 0.0) out.gradient += (2.0 * radial / r) * x;
  out.gradient[0] += std::numbers::pi * std::sin(two_pi * x[0]) * wave;
  out.gradient[1] += std::numbers::pi * std::sin(two_pi * x[1]) * wave;
  return out;
}

Objective make_quadratic(const Matrix& Q) {
  require_symmetric(Q, "quadratic");
  if (Q.llt().info() != Eigen::Success) throw std::invalid_argument("quadratic: Q is not positive definite");
  auto q = std::make_shared<const Matrix>(Q);
  return Objective(
      "quadratic", Q.rows(),
      [q](const Vector& x) { return 0.5 * x.dot(*q * x); },
      [q](const Vector& x) -> Vector { return *q * x; },
      [q](const Vector&) -> Matrix { return *q; },
      Vector::Zero(Q.rows()));
}

Objective make_reg_log_sum_exp(const Matrix& Q) {
  require_symmetric(Q, "reg_log_sum_exp");
  auto q = std::make_shared<const Matrix>(Q);
  return Objective(
      "logsumexp", Q.rows(),
      [q](const Vector& x) { return reg_log_sum_exp_eval(*q, x, false).value; },
      [q](const Vector& x) { return reg_log_sum_exp_eval(*q, x, false).gradient; },
      [q](const Vector& x) { return *reg_log_sum_exp_eval(*q, x).hessian; });
}

Objective make_quad_minus_cos(const Vector& c) {
  if (c.size() == 0) throw std::invalid_argument("quad_minus_cos: empty c");
  if (c.squaredNorm() >= 2.0) {
    std::cerr << "warning: quad_minus_cos with |c|^2 = " << c.squaredNorm()
              << " >= 2 is not strongly convex\n";
  }
  auto cc = std::make_shared<const Vector>(c);
  return Objective(
      "quadcos", c.size(),
      [cc](const Vector& x) { return x.squaredNorm() - std::cos(cc->dot(x)); },
      [cc](const Vector& x) -> Vector { return 2.0 * x + std::sin(cc->dot(x)) * *cc; },
      [cc](const Vector& x) { return *quad_minus_cos_eval(*cc, x).hessian; },
      Vector::Zero(c.size()));
}

Objective make_rosenbrock(double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("rosenbrock: N must be at least 2");
  std::optional<Vector> xmin;
  if (n == 2) {
    xmin = Vector(2);
    (*xmin) << a, a * a;
  } else if (a == 1.0) {
    xmin = Vector::Ones(n);
  }
  return Objective(
      n == 2 ? "rosenbrock2d" : "rosenbrock", n,
      [a, b, n](const Vector& x) { return rosenbrock_eval(a, b, n, x).value; },
      [a, b, n](const Vector& x) { return rosenbrock_eval(a, b, n, x).gradient; }, {}, xmin);
}

Objective make_ackley() {
  return Objective(
      "ackley", 2, [](const Vector& x) { return ackley_eval(x).value; },
      [](const Vector& x) { return ackley_eval(x).gradient; }, {}, Vector::Zero(2));
}

Matrix make_diag_dominant_Q(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_diag_dominant_Q: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> margin(1.0, 2.0);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = off(rng) / n;
  Matrix Q = sym(M);
  for (int i = 0; i < n; ++i) {
    Q(i, i) = 0.0;
    Q(i, i) = Q.row(i).cwiseAbs().sum() + margin(rng);
  }
  return Q;
}

Vector make_cos_direction(int n, std::uint64_t seed, double norm_sq) {
  if (n < 1) throw std::invalid_argument("make_cos_direction: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector c(n);
  for (int i = 0; i < n; ++i) c[i] = gauss(rng);
  return c * (std::sqrt(norm_sq) / c.norm());
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

double check_gradient(const Objective& obj, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradient: h must be positive");
  const Vector g = obj.gradient(x);
  Vector xp = x;
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = obj.value(xp);
    xp[i] = x[i] - h;
    const double fm = obj.value(xp);
    xp[i] = x[i];
    worst = std::max(worst, relative_error(g[i], (fp - fm) / (2.0 * h)));
  }
  return worst;
}

double check_hessian(const Objective& obj, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_hessian: h must be positive");
  const Matrix H = obj.hessian(x);
  Vector xp = x;
  double worst = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const Vector gp = obj.gradient(xp);
    xp[j] = x[j] - h;
    const Vector gm = obj.gradient(xp);
    xp[j] = x[j];
    const Vector col = (gp - gm) / (2.0 * h);
    for (Index i = 0; i < x.size(); ++i) worst = std::max(worst, relative_error(H(i, j), col[i]));
  }
  return worst;
}

}  // namespace pdd
