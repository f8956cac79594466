#include "pdd/analysis.hpp"
#include "pdd/dynamics.hpp"
#include "pdd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace pdd {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string path_in(const std::string& dir, const std::string& file) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  }
  return (std::filesystem::path(dir) / file).string();
}

const OptimizerSpec* first_pdd(const ExperimentConfig& c) {
  for (const OptimizerSpec& o : c.optimizers) {
    if (o.method == "pdd") return &o;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> run_analysis(const ExperimentConfig& config, const std::string& output_dir,
                                      std::uint64_t seed) {
  if (config.toynet) throw std::invalid_argument("analyze: not available for toynet configs");
  const AnalysisSpec spec = config.analysis.value_or(AnalysisSpec{});
  const Objective obj = build_problem(config.problem);
  const Vector x0 = config.x0.resolve(obj.dim());

  double gamma = spec.gamma, eps = spec.epsilon, A = spec.A;
  Preconditioner C = Preconditioner::identity();
  if (const OptimizerSpec* o = first_pdd(config)) {
    const PddParams p = std::get<PddMethod>(build_method(*o, config.problem)).params;
    if (std::isnan(gamma)) gamma = p.gamma();
    if (std::isnan(eps)) eps = p.epsilon;
    if (std::isnan(A)) A = p.A;
    C = p.C;
  }
  if (std::isnan(gamma) || std::isnan(eps) || std::isnan(A)) {
    throw std::invalid_argument("analyze: give analysis.gamma/epsilon/A or a pdd optimizer");
  }

  std::vector<std::string> files;
  const Vector center = obj.minimizer().value_or(x0);

  // Linearization at the center: with B = C Q^{-1} the modes are the
  // eigenvalues of A C Q.
  const Matrix Q = hessian_or_fd(obj, center);
  Eigen::EigenSolver<Matrix> es(A * C.matrix(center) * Q, false);
  std::vector<double> mus, as;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    mus.push_back(es.eigenvalues()[i].real());
    as.push_back(A);
  }
  std::sort(mus.begin(), mus.end());
  const SpectralReport sr = quadratic_spectral_rate(mus, as, gamma, eps);
  {
    std::string out = "mode,mu,a,root1_re,root1_im,root2_re,root2_im\n";
    for (std::size_t i = 0; i < sr.modes.size(); ++i) {
      const SpectralMode& m = sr.modes[i];
      out += std::to_string(i) + ',' + num(m.mu) + ',' + num(m.a) + ',' + num(m.roots.first.real()) + ',' +
             num(m.roots.first.imag()) + ',' + num(m.roots.second.real()) + ',' + num(m.roots.second.imag()) + '\n';
    }
    files.push_back(path_in(output_dir, "spectral.csv"));
    write_text_file(files.back(), out);
    files.push_back(path_in(output_dir, "spectral_summary.csv"));
    write_text_file(files.back(), "gamma,epsilon,alpha,converges\n" + num(gamma) + ',' + num(eps) + ',' +
                                      num(sr.alpha) + ',' + (sr.converges ? "1" : "0") + '\n');
  }

  const std::vector<Vector> samples = sample_points(center, spec.radius, spec.samples, seed);
  const Constants k = estimate_constants(obj, samples, Preconditioner::identity());
  const double d0 = estimate_D0(obj, samples, 8, seed + 1);
  files.push_back(path_in(output_dir, "constants.csv"));
  write_text_file(files.back(), "mu,L,Lp,D0\n" + num(k.mu) + ',' + num(k.L) + ',' + num(k.Lp) + ',' + num(d0) + '\n');

  if (k.mu > 0.0) {
    const StepRecipe recipe = theorem6_params(k.mu, k.L, std::max(k.Lp, k.L), spec.delta);
    const std::vector<PddState> states = pdd_states(obj, recipe.params, x0, Vector::Zero(obj.dim()), spec.steps);
    const DiscreteRateReport dr = discrete_decay_check(states, obj, recipe);
    std::string out = "n,lyapunov,ratio\n";
    for (std::size_t n = 0; n < dr.lyapunov.size(); ++n) {
      out += std::to_string(n) + ',' + num(dr.lyapunov[n]) + ',';
      if (n > 0) out += num(dr.per_step_ratios[n - 1]);
      out += '\n';
    }
    files.push_back(path_in(output_dir, "discrete.csv"));
    write_text_file(files.back(), out);
    files.push_back(path_in(output_dir, "discrete_summary.csv"));
    write_text_file(files.back(), "lambda_min_H,M_bound,tau_recipe,decay_factor,within_bound\n" +
                                      num(dr.lambda_min_H) + ',' + num(dr.M_bound) + ',' + num(dr.tau_recipe) + ',' +
                                      num(dr.decay_factor) + ',' + (dr.within_bound ? "1" : "0") + '\n');
  }
  return files;
}

std::vector<std::string> run_dynamics(const ExperimentConfig& config, const std::string& output_dir) {
  if (config.toynet) throw std::invalid_argument("dynamics: not available for toynet configs");
  const DynamicsSpec spec = config.dynamics.value_or(DynamicsSpec{});
  const Objective obj = build_problem(config.problem);
  const Vector x0 = config.x0.resolve(obj.dim());

  DynParams params;
  if (spec.schedule == "nesterov") {
    params = make_special_case(SpecialCase::nesterov, 0.0, 0.0);
    params.A = spec.A;
    params.gamma = spec.gamma;
  } else if (spec.schedule == "constant") {
    params.A = spec.A;
    params.epsilon = spec.epsilon;
    params.gamma = spec.gamma;
  } else {
    throw std::invalid_argument("dynamics: unknown schedule '" + spec.schedule + "'");
  }
  const OdeTrajectory traj = integrate_rk4(params, obj, x0, Vector::Zero(obj.dim()), spec.t_end, spec.dt);

  const Index d = obj.dim();
  std::ostringstream out;
  out << "t,lyapunov,f,grad_norm";
  for (Index i = 0; i < d; ++i) out << ",x_" << i;
  for (Index i = 0; i < d; ++i) out << ",p_" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (k % spec.record_every != 0 && k + 1 != traj.times.size()) continue;
    const Vector g = obj.gradient(traj.xs[k]);
    out << num(traj.times[k]) << ',' << num(0.5 * (traj.ps[k].squaredNorm() + g.squaredNorm())) << ','
        << num(obj.value(traj.xs[k])) << ',' << num(g.norm());
    for (Index i = 0; i < d; ++i) out << ',' << num(traj.xs[k][i]);
    for (Index i = 0; i < d; ++i) out << ',' << num(traj.ps[k][i]);
    out << '\n';
  }
  std::vector<std::string> files{path_in(output_dir, "dynamics.csv")};
  write_text_file(files.back(), out.str());
  if (traj.diverged) throw std::runtime_error("dynamics: trajectory diverged (partial output in " + files.back() + ")");
  return files;
}

}  // namespace pdd
