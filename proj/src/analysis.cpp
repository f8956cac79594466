#include "pdd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pdd {

namespace {

Eigen::VectorXd symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigenvalue solve failed");
  return solver.eigenvalues();
}

}  // namespace

double lyapunov_I(const Objective& obj, const Vector& x, const Vector& p) {
  require_dim(p, obj.dim(), "lyapunov_I p");
  return 0.5 * (p.squaredNorm() + obj.gradient(x).squaredNorm());
}

double continuous_lambda(double mu, double L, double gamma, double eps, double A) {
  if (!(mu > 0.0 && mu <= L)) throw std::invalid_argument("continuous_lambda: need 0 < mu <= L");
  const double shrink = 1.0 - eps * gamma * A;
  const double gap_mu = 0.5 * std::abs(A - mu * shrink);
  const double gap_L = 0.5 * std::abs(A - L * shrink);
  return std::min({mu * gamma * A - gap_mu, L * gamma * A - gap_L, eps * A - gap_mu, eps * A - gap_L});
}

StepRecipe theorem6_params(double mu, double L, double Lp, double delta) {
  if (!(mu > 0.0 && mu <= L && L <= Lp)) {
    throw std::invalid_argument("theorem6_params: need 0 < mu <= L <= L'");
  }
  if (!(delta >= 0.0)) throw std::invalid_argument("theorem6_params: delta must be non-negative");
  const double budget = delta + 36.0 * std::max(Lp, 1.0);

  StepRecipe r;
  r.params.tau = 0.25 * mu / budget;
  r.params.sigma = r.params.tau;
  r.gamma = (1.0 - r.params.sigma * mu) / mu;
  r.params.epsilon = 1.0;
  r.params.A = (mu + L) / (2.0 + (mu + L) * r.gamma);
  r.params.omega = r.gamma / r.params.sigma;
  r.params.C = Preconditioner::identity();
  r.decay_factor = 1.0 - (mu * mu / 32.0) / budget;

  if (!(r.gamma * r.params.A < 1.0)) throw std::logic_error("theorem6_params: gamma A >= 1");
  if (!(r.params.sigma < 1.0 / 36.0)) throw std::logic_error("theorem6_params: sigma >= 1/36");
  return r;
}

SpectralReport quadratic_spectral_rate(std::span<const double> mus, std::span<const double> as,
                                       double gamma, double eps) {
  if (mus.size() != as.size()) throw std::invalid_argument("quadratic_spectral_rate: mus and as differ in length");
  if (mus.empty()) throw std::invalid_argument("quadratic_spectral_rate: no modes");
  SpectralReport report;
  report.alpha = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mus.size(); ++i) {
    const double mu = mus[i];
    if (!(mu > 0.0)) throw std::invalid_argument("quadratic_spectral_rate: eigenvalues must be positive");
    const double b = eps * as[i] + gamma * mu;
    const double disc = b * b - 4.0 * mu;
    SpectralMode mode{mu, as[i], {}};
    if (disc >= 0.0) {
      // Stable real roots: q = -(b + sign(b) sqrt(disc)) / 2, roots q and mu / q.
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      mode.roots = {std::complex<double>(q, 0.0), std::complex<double>(mu / q, 0.0)};
    } else {
      const double im = 0.5 * std::sqrt(-disc);
      mode.roots = {std::complex<double>(-0.5 * b, im), std::complex<double>(-0.5 * b, -im)};
    }
    report.alpha = std::max({report.alpha, mode.roots.first.real(), mode.roots.second.real()});
    report.modes.push_back(mode);
  }
  report.converges = report.alpha < 0.0;
  return report;
}

Matrix linear_system_matrix(const Matrix& Q, const Matrix& A, const Matrix& B, double gamma, double eps) {
  const Index d = Q.rows();
  if (Q.cols() != d || A.rows() != d || A.cols() != d || B.rows() != d || B.cols() != d) {
    throw std::invalid_argument("linear_system_matrix: inconsistent shapes");
  }
  const Matrix I = Matrix::Identity(d, d);
  Matrix M(2 * d, 2 * d);
  M.topLeftCorner(d, d) = -gamma * B * Q * A * Q;
  M.topRightCorner(d, d) = -B * Q * (I - gamma * eps * A);
  M.bottomLeftCorner(d, d) = A * Q;
  M.bottomRightCorner(d, d) = -eps * A;
  return M;
}

OptimalGamma optimal_gamma(double mu1, double mun) {
  if (!(mun > 0.0 && mu1 > mun)) throw std::invalid_argument("optimal_gamma: need mu1 > mun > 0");
  const double kappa = mu1 / mun;
  return {2.0 * std::sqrt(mu1) / std::sqrt(mun * (2.0 * mu1 - mun)),
          -std::sqrt(mun) / std::sqrt(2.0 - 1.0 / kappa)};
}

NHMatrices build_N_H(const Objective& obj, const Vector& x, const PddParams& params) {
  const Index d = obj.dim();
  const Matrix hess = hessian_or_fd(obj, x);
  const Matrix C = params.C.matrix(x);
  const double gamma = params.gamma();
  const double A = params.A;
  const double eps = params.epsilon;
  const double ratio = params.sigma / params.tau;
  const double scale = 1.0 / (1.0 + params.sigma * eps * A);

  NHMatrices out;
  out.N.resize(2 * d, 2 * d);
  out.N.topLeftCorner(d, d) = scale * (params.sigma * A + gamma * A) * C;
  out.N.topRightCorner(d, d) = scale * (1.0 - eps * gamma * A) * C;
  out.N.bottomLeftCorner(d, d) = -scale * ratio * A * Matrix::Identity(d, d);
  out.N.bottomRightCorner(d, d) = scale * ratio * eps * A * Matrix::Identity(d, d);

  Matrix weighted = out.N;
  weighted.topRows(d) = hess * out.N.topRows(d);
  out.H = sym(weighted);
  return out;
}

Matrix third_derivative_along(const Objective& obj, const Vector& x, const Vector& v) {
  const double h = 1e-5 * (1.0 + x.norm()) / (1.0 + v.norm());
  return (hessian_or_fd(obj, x + h * v) - hessian_or_fd(obj, x - h * v)) / (2.0 * h);
}

Matrix lyapunov_hessian(const Objective& obj, const Vector& x) {
  const Index d = obj.dim();
  const Matrix hess = hessian_or_fd(obj, x);
  const Vector g = obj.gradient(x);
  Matrix out = Matrix::Zero(2 * d, 2 * d);
  out.topLeftCorner(d, d) = sym(third_derivative_along(obj, x, g) + hess * hess);
  out.bottomRightCorner(d, d) = Matrix::Identity(d, d);
  return out;
}

std::vector<PddState> pdd_states(const Objective& obj, const PddParams& params, const Vector& x0,
                                 const Vector& p0, long steps) {
  std::vector<PddState> states;
  states.reserve(steps + 1);
  states.push_back({x0, p0, 0, false});
  for (long n = 0; n < steps; ++n) {
    PddState next = pdd_step(states.back(), params, obj);
    if (next.diverged) break;
    states.push_back(std::move(next));
  }
  return states;
}

DiscreteRateReport discrete_decay_check(std::span<const PddState> states, const Objective& obj,
                                        const std::optional<StepRecipe>& recipe) {
  if (states.empty()) throw std::invalid_argument("discrete_decay_check: empty trajectory");
  constexpr double kSlack = 1e-12;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  DiscreteRateReport report;
  report.lambda_min_H = nan;
  report.M_bound = nan;
  report.tau_recipe = recipe ? recipe->params.tau : nan;
  report.decay_factor = recipe ? recipe->decay_factor : nan;

  report.lyapunov.reserve(states.size());
  for (const PddState& s : states) report.lyapunov.push_back(lyapunov_I(obj, s.x, s.p));
  for (std::size_t n = 0; n + 1 < states.size(); ++n) {
    const double denom = report.lyapunov[n];
    report.per_step_ratios.push_back(denom == 0.0 ? 0.0 : report.lyapunov[n + 1] / denom);
  }

  const double bound = recipe ? recipe->decay_factor : 1.0;
  bool ok = std::all_of(report.per_step_ratios.begin(), report.per_step_ratios.end(),
                        [&](double r) { return r <= bound * (1.0 + kSlack); });
  if (recipe) {
    double envelope = report.lyapunov.front();
    for (std::size_t n = 1; n < report.lyapunov.size() && ok; ++n) {
      envelope *= bound;
      ok = report.lyapunov[n] <= envelope * (1.0 + kSlack) + std::numeric_limits<double>::denorm_min();
    }
    double lam = std::numeric_limits<double>::infinity();
    double M = 0.0;
    for (const PddState& s : states) {
      const NHMatrices nh = build_N_H(obj, s.x, recipe->params);
      lam = std::min(lam, symmetric_eigenvalues(nh.H).minCoeff());
      const Eigen::VectorXd ev = symmetric_eigenvalues(nh.N.transpose() * lyapunov_hessian(obj, s.x) * nh.N);
      M = std::max(M, ev.cwiseAbs().maxCoeff());
    }
    report.lambda_min_H = lam;
    report.M_bound = M;
  }
  report.within_bound = ok;
  return report;
}

Constants estimate_constants(const Objective& obj, std::span<const Vector> samples, const Preconditioner& C) {
  if (samples.empty()) throw std::invalid_argument("estimate_constants: no samples");
  Constants out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const Vector& x : samples) {
    const Matrix hess = hessian_or_fd(obj, x);
    const Matrix Cx = C.matrix(x);
    Eigen::FullPivLU<Matrix> lu(hess);
    if (!lu.isInvertible()) throw std::domain_error("estimate_constants: singular Hessian");
    const Matrix B = Cx * lu.inverse();
    const Eigen::VectorXd c0 = symmetric_eigenvalues(hess * B * hess);
    out.mu = std::min(out.mu, c0.minCoeff());
    out.L = std::max(out.L, c0.maxCoeff());

    const Matrix curvature = third_derivative_along(obj, x, obj.gradient(x)) + hess * hess;
    const Eigen::VectorXd lp = symmetric_eigenvalues(Cx.transpose() * sym(curvature) * Cx);
    out.Lp = std::max(out.Lp, lp.maxCoeff());
  }
  return out;
}

double estimate_D0(const Objective& obj, std::span<const Vector> samples, int directions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 0.0;
  for (const Vector& x : samples) {
    const double h = 1e-3 * (1.0 + x.norm());
    for (int k = 0; k < directions; ++k) {
      Vector v(x.size());
      for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
      v.normalize();
      // I restricted to the line x + t v; the dual block contributes nothing
      // to the third derivative.
      auto phi = [&](double t) { return 0.5 * obj.gradient(x + t * v).squaredNorm(); };
      const double third = (phi(2 * h) - 2 * phi(h) + 2 * phi(-h) - phi(-2 * h)) / (2 * h * h * h);
      best = std::max(best, std::abs(third));
    }
  }
  return best;
}

std::vector<Vector> sample_points(const Vector& center, double radius, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vector> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vector x = center;
    for (Index i = 0; i < x.size(); ++i) x[i] += radius * unit(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace pdd
