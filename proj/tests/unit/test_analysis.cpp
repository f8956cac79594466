#include "pdd/analysis.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace pdd;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v[i++] = x;
  return v.asDiagonal();
}

struct DiagonalTriple {
  Vector q, a, b;
};

DiagonalTriple random_triple(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  const int d = dim(rng);
  DiagonalTriple t{Vector(d), Vector(d), Vector(d)};
  for (int i = 0; i < d; ++i) {
    t.q[i] = u(rng);
    t.a[i] = u(rng);
    t.b[i] = u(rng);
  }
  return t;
}

// Dense spectrum of the assembled block system.
Eigen::VectorXcd block_spectrum(const DiagonalTriple& t, double gamma, double eps) {
  const Matrix M = linear_system_matrix(Matrix(t.q.asDiagonal()), Matrix(t.a.asDiagonal()),
                                        Matrix(t.b.asDiagonal()), gamma, eps);
  Eigen::EigenSolver<Matrix> solver(M, false);
  return solver.eigenvalues();
}

double dense_alpha(const DiagonalTriple& t, double gamma, double eps) {
  return block_spectrum(t, gamma, eps).real().maxCoeff();
}

SpectralReport modal_report(const DiagonalTriple& t, double gamma, double eps) {
  std::vector<double> mus, as;
  for (Index i = 0; i < t.q.size(); ++i) {
    mus.push_back(t.b[i] * t.q[i] * t.q[i] * t.a[i]);
    as.push_back(t.a[i]);
  }
  return quadratic_spectral_rate(mus, as, gamma, eps);
}

double grid_alpha(double gamma, double eps, std::vector<double> mus) {
  std::vector<double> ones(mus.size(), 1.0);
  return quadratic_spectral_rate(mus, ones, gamma, eps).alpha;
}

}  // namespace

TEST(Lyapunov, HandValues) {
  const Objective f = make_quadratic(Matrix::Identity(1, 1));
  EXPECT_EQ(lyapunov_I(f, vec1(0), vec1(0)), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov_I(f, vec1(1), vec1(1)), 1.0);
  const Objective g = make_quad_minus_cos(make_cos_direction(3, 1));
  const Vector x = Vector::Constant(3, 0.4), p = Vector::Constant(3, -0.7);
  EXPECT_NEAR(lyapunov_I(g, x, 2 * p) - lyapunov_I(g, x, p), 1.5 * p.squaredNorm(), 1e-14);
  EXPECT_THROW(lyapunov_I(g, x, vec1(0)), std::invalid_argument);
}

TEST(ContinuousLambda, SpecialParametersGiveHalfMu) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 10.0);
  for (int k = 0; k < 20; ++k) {
    double mu = u(rng), L = u(rng);
    if (mu > L) std::swap(mu, L);
    const double gamma = 1 / mu;
    const double A = (mu + L) / (2 + (mu + L) * gamma);
    EXPECT_NEAR(continuous_lambda(mu, L, gamma, 1.0, A), mu / 2, 1e-14);
  }
}

TEST(ContinuousLambda, HandValues) {
  EXPECT_DOUBLE_EQ(continuous_lambda(1, 1, 1, 1, 0.5), 0.5);
  // gamma = eps = 0 leaves -|A - mu|/2 and -|A - L|/2.
  const double lam = continuous_lambda(0.5, 2.0, 0, 0, 1.2);
  EXPECT_DOUBLE_EQ(lam, -0.5 * std::max(std::abs(1.2 - 0.5), std::abs(1.2 - 2.0)));
  EXPECT_LT(lam, 0.0);
  EXPECT_THROW(continuous_lambda(2, 1, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(continuous_lambda(0, 1, 1, 1, 1), std::invalid_argument);
}

TEST(StepRecipe, UnitConstants) {
  const StepRecipe r = theorem6_params(1, 1, 1, 0);
  EXPECT_DOUBLE_EQ(r.params.tau, 1.0 / 144);
  EXPECT_EQ(r.params.sigma, r.params.tau);
  EXPECT_DOUBLE_EQ(r.gamma, 143.0 / 144);
  EXPECT_DOUBLE_EQ(r.decay_factor, 1 - 1.0 / 1152);
  EXPECT_EQ(r.params.epsilon, 1.0);
  EXPECT_DOUBLE_EQ(r.params.omega * r.params.sigma, r.gamma);
}

TEST(StepRecipe, MixedConstants) {
  const StepRecipe r = theorem6_params(0.5, 1, 2, 1);
  EXPECT_DOUBLE_EQ(r.params.tau, 0.125 / 73);
  EXPECT_LT(r.gamma * r.params.A, 1.0);
  EXPECT_LT(r.params.sigma, 1.0 / 36);
  EXPECT_GT(r.decay_factor, 0.0);
  EXPECT_LT(r.decay_factor, 1.0);
}

TEST(StepRecipe, InvariantsOverRandomInputs) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int k = 0; k < 50; ++k) {
    std::array<double, 3> v{u(rng), u(rng), u(rng)};
    std::sort(v.begin(), v.end());
    const StepRecipe r = theorem6_params(v[0], v[1], v[2], u(rng));
    EXPECT_EQ(r.params.sigma, r.params.tau);
    EXPECT_EQ(r.params.epsilon, 1.0);
    EXPECT_LT(r.gamma * r.params.A, 1.0);
    EXPECT_GT(r.decay_factor, 0.0);
    EXPECT_LT(r.decay_factor, 1.0);
  }
}

TEST(StepRecipe, RejectsBadOrdering) {
  EXPECT_THROW(theorem6_params(2, 1, 3, 0), std::invalid_argument);
  EXPECT_THROW(theorem6_params(1, 2, 1.5, 0), std::invalid_argument);
  EXPECT_THROW(theorem6_params(0, 1, 1, 0), std::invalid_argument);
  EXPECT_THROW(theorem6_params(1, 1, 1, -1), std::invalid_argument);
}

TEST(Spectral, RootsSolveModalQuadratic) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const DiagonalTriple t = random_triple(rng);
    const SpectralReport r = modal_report(t, 0.7, 0.3);
    for (const SpectralMode& m : r.modes) {
      for (const auto& z : {m.roots.first, m.roots.second}) {
        const std::complex<double> res = z * z + z * (0.3 * m.a + 0.7 * m.mu) + m.mu;
        EXPECT_LE(std::abs(res), 1e-10 * (1 + m.mu));
      }
    }
  }
}

TEST(Spectral, MatchesDenseBlockSpectrum) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const DiagonalTriple t = random_triple(rng);
    const double gamma = u(rng), eps = u(rng);
    const SpectralReport r = modal_report(t, gamma, eps);
    const Eigen::VectorXcd dense = block_spectrum(t, gamma, eps);
    EXPECT_NEAR(r.alpha, dense.real().maxCoeff(), 1e-8);
    // Every modal root appears in the dense spectrum.
    for (const SpectralMode& m : r.modes) {
      for (const auto& z : {m.roots.first, m.roots.second}) {
        EXPECT_LE((dense.array() - z).abs().minCoeff(), 1e-8);
      }
    }
  }
}

TEST(Spectral, UndampedIsNeutral) {
  const std::vector<double> mus{4, 1}, as{1, 1};
  const SpectralReport r = quadratic_spectral_rate(mus, as, 0, 0);
  EXPECT_EQ(r.alpha, 0.0);
  EXPECT_FALSE(r.converges);
  EXPECT_DOUBLE_EQ(std::abs(r.modes[0].roots.first.imag()), 2.0);
  EXPECT_DOUBLE_EQ(std::abs(r.modes[1].roots.first.imag()), 1.0);
}

TEST(Spectral, OptimalGammaRate) {
  const double g = 4 / std::sqrt(7.0);
  EXPECT_NEAR(grid_alpha(g, 0, {4, 1}), -1 / std::sqrt(1.75), 1e-9);
  const DiagonalTriple t{Eigen::Vector2d(2, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)};
  EXPECT_NEAR(dense_alpha(t, g, 0), -1 / std::sqrt(1.75), 1e-8);
}

TEST(Spectral, CriticalDampingChoice) {
  // A = I, gamma <= 1/sqrt(mu1), eps = 2 sqrt(mu') - gamma mu'.
  const double mup = 0.81, gamma = 0.4;
  const double eps = 2 * std::sqrt(mup) - gamma * mup;
  const double expected = -std::sqrt(mup) - 0.5 * gamma * (1 - mup);
  EXPECT_NEAR(grid_alpha(gamma, eps, {4, 1}), expected, 1e-12);
  EXPECT_NEAR(expected, -0.938, 1e-12);
  const DiagonalTriple t{Eigen::Vector2d(2, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)};
  EXPECT_NEAR(dense_alpha(t, gamma, eps), expected, 1e-8);
}

TEST(Spectral, RejectsBadModes) {
  const std::vector<double> bad{1, 0}, ones{1, 1}, one{1};
  EXPECT_THROW(quadratic_spectral_rate(bad, ones, 1, 1), std::invalid_argument);
  EXPECT_THROW(quadratic_spectral_rate(ones, one, 1, 1), std::invalid_argument);
}

TEST(OptimalGamma, ClosedForm) {
  const OptimalGamma o = optimal_gamma(4, 1);
  EXPECT_NEAR(o.gamma_star, 4 / std::sqrt(7.0), 1e-12);
  EXPECT_NEAR(o.alpha, -0.755929, 1e-6);
  const double kappa = 4.0;
  EXPECT_NEAR(o.alpha * o.gamma_star,
              -2 * std::sqrt(4.0) * 1 / (std::sqrt(1 * (8.0 - 1)) * std::sqrt(2 - 1 / kappa)), 1e-12);
  EXPECT_THROW(optimal_gamma(1, 1), std::invalid_argument);
  EXPECT_THROW(optimal_gamma(1, 2), std::invalid_argument);
}

TEST(OptimalGamma, GridArgmin) {
  for (auto [mu1, mun] : {std::pair{4.0, 1.0}, std::pair{9.0, 2.0}, std::pair{3.0, 0.5}}) {
    const OptimalGamma o = optimal_gamma(mu1, mun);
    double best = INFINITY, best_g = 0;
    for (double g = 2 / std::sqrt(mu1); g <= 2 / std::sqrt(mun); g += 1e-4) {
      const double a = grid_alpha(g, 0, {mu1, mun});
      if (a < best) {
        best = a;
        best_g = g;
      }
    }
    EXPECT_NEAR(best_g, o.gamma_star, 1e-3);
    // Second pass around the coarse minimizer.
    const double lo = best_g - 2e-4;
    for (int i = 0; i <= 40000; ++i) best = std::min(best, grid_alpha(lo + i * 1e-8, 0, {mu1, mun}));
    EXPECT_NEAR(best, o.alpha, 1e-6);
    EXPECT_GE(grid_alpha(o.gamma_star * 1.01, 0, {mu1, mun}), o.alpha);
    EXPECT_GE(grid_alpha(o.gamma_star * 0.99, 0, {mu1, mun}), o.alpha);
  }
}

TEST(CouplingLemma, NegativeFormForDominatedCoupling) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2), slack(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 4;
    Vector a(d), b(d), c(d), x(d), y(d);
    for (int i = 0; i < d; ++i) {
      c[i] = u(rng);
      a[i] = -std::abs(c[i]) / 2 - slack(rng);
      b[i] = -std::abs(c[i]) / 2 - slack(rng);
      x[i] = u(rng);
      y[i] = u(rng);
    }
    // The random draw above is not orthogonally similar to anything; rotate
    // all three by one common orthogonal matrix.
    Matrix R(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) R(i, j) = u(rng);
    const Matrix U = Eigen::HouseholderQR<Matrix>(R).householderQ();
    const Matrix A = U * a.asDiagonal() * U.transpose();
    const Matrix B = U * b.asDiagonal() * U.transpose();
    const Matrix C = U * c.asDiagonal() * U.transpose();
    EXPECT_LE(x.dot(A * x) + y.dot(B * y) + x.dot(C * y), 1e-12);
  }
}

TEST(NH, DefinitionAndStepIdentity) {
  const Matrix Q = make_diag_dominant_Q(3, 2);
  const Objective f = make_reg_log_sum_exp(Q);
  PddParams p;
  p.tau = 0.05;
  p.sigma = 0.08;
  p.A = 1.3;
  p.epsilon = 0.7;
  p.omega = 2.0;
  p.C = Preconditioner::diagonal(Eigen::Vector3d(1.0, 0.5, 2.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 10; ++k) {
    const Vector x = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const Vector pp = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const NHMatrices nh = build_N_H(f, x, p);
    EXPECT_EQ((nh.H - nh.H.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const PddState next = pdd_step({x, pp, 0, false}, p, f);
    Vector z(6), step(6);
    z << f.gradient(x), pp;
    step << next.x - x, next.p - pp;
    EXPECT_LE((step + p.tau * nh.N * z).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(NH, ScalarQuadraticLowerBound) {
  const double mu = 0.8;
  const Objective f = make_quadratic(Matrix::Constant(1, 1, mu));
  const StepRecipe r = theorem6_params(mu, mu, mu, 0);
  const NHMatrices nh = build_N_H(f, vec1(0.3), r.params);
  Eigen::SelfAdjointEigenSolver<Matrix> es(nh.H);
  EXPECT_GE(es.eigenvalues().minCoeff(), mu / 4);
}

TEST(DecayCheck, StationaryStartGivesZeroRatios) {
  const Objective f = make_quadratic(Matrix::Identity(1, 1));
  const StepRecipe r = theorem6_params(1, 1, 1, 0);
  const auto states = pdd_states(f, r.params, vec1(0), vec1(0), 20);
  const DiscreteRateReport rep = discrete_decay_check(states, f, r);
  ASSERT_EQ(rep.per_step_ratios.size(), 20u);
  for (double v : rep.per_step_ratios) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(rep.within_bound);
}

TEST(DecayCheck, RecipeRespectsFactor) {
  const Objective f = make_quadratic(Matrix::Identity(1, 1));
  const StepRecipe r = theorem6_params(1, 1, 1, 0);
  const auto states = pdd_states(f, r.params, vec1(1), vec1(0.5), 500);
  const DiscreteRateReport rep = discrete_decay_check(states, f, r);
  EXPECT_TRUE(rep.within_bound);
  for (double v : rep.per_step_ratios) EXPECT_LE(v, 1 - 1.0 / 1152 + 1e-15);
  EXPECT_DOUBLE_EQ(rep.decay_factor, 1 - 1.0 / 1152);
  EXPECT_DOUBLE_EQ(rep.tau_recipe, 1.0 / 144);
  EXPECT_GE(rep.lambda_min_H, 0.25);
  EXPECT_TRUE(std::isfinite(rep.M_bound));
}

TEST(DecayCheck, OversizedStepBreaksBound) {
  const Objective f = make_quadratic(Matrix::Identity(1, 1));
  StepRecipe r = theorem6_params(1, 1, 1, 0);
  r.params.tau *= 100;
  const auto states = pdd_states(f, r.params, vec1(1), vec1(0.5), 500);
  const DiscreteRateReport rep = discrete_decay_check(states, f, r);
  EXPECT_FALSE(rep.within_bound);
  EXPECT_GT(*std::max_element(rep.per_step_ratios.begin(), rep.per_step_ratios.end()), 1.0);
}

TEST(DecayCheck, EmptyTrajectoryThrows) {
  const Objective f = make_quadratic(Matrix::Identity(1, 1));
  EXPECT_THROW(discrete_decay_check({}, f), std::invalid_argument);
}

TEST(Constants, DiagonalQuadratic) {
  const Objective f = make_quadratic(diag({1, 2}));
  const auto pts = sample_points(Vector::Zero(2), 1.0, 5, 1);
  const Constants c = estimate_constants(f, pts);
  EXPECT_NEAR(c.mu, 1.0, 1e-12);
  EXPECT_NEAR(c.L, 2.0, 1e-12);
  EXPECT_NEAR(c.Lp, 4.0, 1e-6);
  for (const Vector& x : pts) {
    const std::vector<Vector> one{x};
    const Constants ci = estimate_constants(f, one);
    EXPECT_NEAR(ci.mu, c.mu, 1e-12);
    EXPECT_NEAR(ci.L, c.L, 1e-12);
    EXPECT_NEAR(ci.Lp, c.Lp, 1e-6);
  }
}

TEST(Constants, DiagonalPreconditionerOracle) {
  // C = D gives B = D Q^-1 and C0 = Q D.
  const Matrix Q = diag({1, 3});
  const Objective f = make_quadratic(Q);
  const auto pts = sample_points(Vector::Zero(2), 1.0, 3, 2);
  const Constants c = estimate_constants(f, pts, Preconditioner::diagonal(Eigen::Vector2d(0.5, 0.25)));
  EXPECT_NEAR(c.mu, 0.5, 1e-12);
  EXPECT_NEAR(c.L, 0.75, 1e-12);
  EXPECT_NEAR(c.Lp, std::max(0.5 * 1 * 0.5, 0.25 * 9 * 0.25), 1e-6);
}

TEST(Constants, QuadMinusCosIsFiniteAndPositive) {
  const Objective f = make_quad_minus_cos(make_cos_direction(4, 3));
  const Constants c = estimate_constants(f, sample_points(Vector::Zero(4), 2.0, 50, 4));
  EXPECT_GE(c.mu, 0.1 - 1e-12);
  EXPECT_TRUE(std::isfinite(c.L));
  EXPECT_TRUE(std::isfinite(c.Lp));
  EXPECT_LE(c.mu, c.L);
}

TEST(Constants, SingularHessianThrows) {
  const Objective f("flat", 1, [](const Vector&) { return 0.0; }, [](const Vector& x) { return Vector(Vector::Zero(x.size())); },
                    [](const Vector& x) { return Matrix(Matrix::Zero(x.size(), x.size())); });
  const std::vector<Vector> pts{vec1(0)};
  EXPECT_THROW(estimate_constants(f, pts), std::domain_error);
}

TEST(Constants, ThirdDerivativeDifferencesMatchAnalytic) {
  // Scalar quad_minus_cos: f'' = 2 + c^2 cos(c x), so d/dx f'' = -c^3 sin(c x).
  const double cc = std::sqrt(1.9);
  const Objective f = make_quad_minus_cos(vec1(cc));
  for (double x : {-1.0, 0.3, 2.0}) {
    const Matrix T = third_derivative_along(f, vec1(x), vec1(1.0));
    EXPECT_NEAR(T(0, 0), -cc * cc * cc * std::sin(cc * x), 1e-6);
  }
}

TEST(D0, QuadraticHasNoThirdDerivative) {
  const Objective f = make_quadratic(make_diag_dominant_Q(3, 1));
  EXPECT_LE(estimate_D0(f, sample_points(Vector::Zero(3), 1.0, 5, 1), 4, 2), 1e-4);
}

TEST(D0, ScalarOracle) {
  // phi = g^2 / 2 along the line, phi''' = 3 g' g'' + g g'''.
  const double cc = std::sqrt(1.9);
  const Objective f = make_quad_minus_cos(vec1(cc));
  const double x = 0.7;
  const double s = std::sin(cc * x), co = std::cos(cc * x);
  const double g = 2 * x + cc * s, g1 = 2 + cc * cc * co, g2 = -cc * cc * cc * s, g3 = -cc * cc * cc * cc * co;
  const std::vector<Vector> pts{vec1(x)};
  EXPECT_NEAR(estimate_D0(f, pts, 3, 7), std::abs(3 * g1 * g2 + g * g3), 1e-4);
}

TEST(Samples, BoxAndDeterminism) {
  const Vector c = Eigen::Vector3d(1, -1, 0.5);
  const auto a = sample_points(c, 0.25, 30, 8);
  const auto b = sample_points(c, 0.25, 30, 8);
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k], b[k]);
    EXPECT_LE((a[k] - c).cwiseAbs().maxCoeff(), 0.25);
  }
}
