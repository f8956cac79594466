#include "pdd/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>

namespace pdd {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

struct Schema {
  std::set<std::string> required;
  std::set<std::string> optional;
};

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s{
      {"gd", {{"tau"}, {}}},
      {"nag", {{"tau", "beta"}, {}}},
      {"heavy_ball", {{"tau", "beta"}, {}}},
      {"igahd", {{"tau", "beta1"}, {"alpha"}}},
      {"igahd_sc", {{"tau", "m1"}, {"beta2"}}},
      {"pdd", {{"tau"}, {"sigma", "A", "epsilon", "omega"}}},
  };
  return s;
}

const std::set<std::string> kProblems{"quadratic", "logsumexp", "quadcos", "rosenbrock", "ackley"};

double get(const OptimizerSpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

std::optional<Matrix> problem_matrix(const ProblemSpec& spec) {
  if (spec.name == "logsumexp") {
    if (!(spec.scale > 0.0)) fail("problem.scale must be positive");
    return Matrix(spec.scale * make_diag_dominant_Q(spec.dim, spec.seed));
  }
  if (spec.name != "quadratic") return std::nullopt;
  if (!spec.Q.empty()) {
    const Index d = static_cast<Index>(spec.Q.size());
    Matrix Q(d, d);
    for (Index i = 0; i < d; ++i) {
      if (static_cast<Index>(spec.Q[i].size()) != d) fail("problem.Q must be square");
      for (Index j = 0; j < d; ++j) Q(i, j) = spec.Q[i][j];
    }
    return Q;
  }
  if (spec.diag.empty()) fail("quadratic problem needs diag or Q");
  return Vector(Eigen::Map<const Vector>(spec.diag.data(), static_cast<Index>(spec.diag.size()))).asDiagonal();
}

Preconditioner build_preconditioner(const OptimizerSpec& spec, const ProblemSpec& problem) {
  if (spec.preconditioner == "identity") return Preconditioner::identity();
  if (spec.preconditioner == "diag_inv_q") {
    const auto Q = problem_matrix(problem);
    if (!Q) fail("preconditioner diag_inv_q needs a quadratic or logsumexp problem");
    return Preconditioner::diagonal(Q->diagonal().cwiseInverse());
  }
  fail("unknown preconditioner '" + spec.preconditioner + "'");
}

std::pair<double, double> extreme_eigenvalues(const Matrix& Q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().maxCoeff(), es.eigenvalues().minCoeff()};
}

double nag_beta(double kappa) {
  const double r = std::sqrt(3.0 * kappa + 1.0);
  return (r - 2.0) / (r + 2.0);
}

OptimizerSpec opt(std::string method, std::string label, std::map<std::string, double> params,
                  std::string preconditioner = "identity") {
  return {std::move(method), std::move(label), std::move(params), std::move(preconditioner)};
}

}  // namespace

Vector X0Spec::resolve(Index dim) const {
  if (fill) {
    if (!values.empty()) fail("x0: give either values or fill");
    return Vector::Constant(dim, *fill);
  }
  if (static_cast<Index>(values.size()) != dim) {
    fail("x0 has " + std::to_string(values.size()) + " entries, problem dimension is " + std::to_string(dim));
  }
  return Eigen::Map<const Vector>(values.data(), dim);
}

Objective build_problem(const ProblemSpec& spec) {
  if (!kProblems.count(spec.name)) fail("unknown problem '" + spec.name + "'");
  if (spec.name == "quadratic") return make_quadratic(*problem_matrix(spec));
  if (spec.dim < 1) fail("problem.dim must be positive");
  if (spec.name == "logsumexp") return make_reg_log_sum_exp(*problem_matrix(spec));
  if (spec.name == "quadcos") return make_quad_minus_cos(make_cos_direction(spec.dim, spec.seed));
  if (spec.name == "rosenbrock") return make_rosenbrock(spec.a, spec.b, spec.dim);
  if (spec.dim != 2) fail("ackley is two-dimensional");
  return make_ackley();
}

Method build_method(const OptimizerSpec& spec, const ProblemSpec& problem) {
  auto it = schemas().find(spec.method);
  if (it == schemas().end()) fail("unknown method '" + spec.method + "'");
  const Schema& schema = it->second;
  for (const std::string& key : schema.required) {
    if (!spec.params.count(key)) fail(spec.label + ": missing parameter '" + key + "'");
  }
  for (const auto& [key, value] : spec.params) {
    if (!schema.required.count(key) && !schema.optional.count(key)) {
      fail(spec.label + ": unexpected parameter '" + key + "' for method " + spec.method);
    }
    if (!std::isfinite(value)) fail(spec.label + ": parameter '" + key + "' must be finite");
  }
  if (spec.preconditioner != "identity" && spec.method != "gd" && spec.method != "pdd") {
    fail(spec.label + ": only gd and pdd take a preconditioner");
  }

  const double tau = spec.params.at("tau");
  Method m;
  if (spec.method == "gd") {
    m = GdMethod{tau, build_preconditioner(spec, problem)};
  } else if (spec.method == "nag") {
    m = NagMethod{tau, spec.params.at("beta")};
  } else if (spec.method == "heavy_ball") {
    m = HeavyBallMethod{tau, spec.params.at("beta")};
  } else if (spec.method == "igahd") {
    m = IgahdMethod{tau, get(spec, "alpha", 3.0), spec.params.at("beta1")};
  } else if (spec.method == "igahd_sc") {
    const double m1 = spec.params.at("m1");
    const double beta2 = spec.params.count("beta2") ? spec.params.at("beta2") : compute_beta2(m1, tau);
    m = IgahdScMethod{tau, m1, beta2};
  } else {
    PddParams p;
    p.tau = tau;
    p.sigma = get(spec, "sigma", tau);
    p.A = get(spec, "A", 1.0);
    p.epsilon = get(spec, "epsilon", 1.0);
    p.omega = get(spec, "omega", 1.0);
    p.C = build_preconditioner(spec, problem);
    m = PddMethod{p, std::nullopt};
  }
  validate(m);
  return m;
}

void validate(const ExperimentConfig& c) {
  if (c.run.max_iter < 0) fail("max_iter must be non-negative");
  if (c.run.record_every < 1) fail("record_every must be at least 1");
  if (!(c.run.grad_tol >= 0.0)) fail("grad_tol must be non-negative");
  if (c.toynet) {
    const ToynetConfig& t = *c.toynet;
    if (t.epochs < 1 || t.batch_size < 1 || t.seeds.empty() || t.methods.empty()) {
      fail("toynet needs positive epochs and batch size, seeds and methods");
    }
    if (t.hidden1 < 1 || t.hidden2 < 1) fail("toynet hidden sizes must be positive");
    if (t.d_in < 1 || t.k < 1 || t.n < 10 * t.k || !(t.spread >= 0.0)) fail("toynet: invalid blob sizes");
    return;
  }
  if (c.optimizers.empty()) fail("at least one optimizer is required");
  const Objective obj = build_problem(c.problem);
  c.x0.resolve(obj.dim());
  std::set<std::string> labels;
  for (const OptimizerSpec& o : c.optimizers) {
    if (o.label.empty()) fail("optimizer label must not be empty");
    if (!labels.insert(o.label).second) fail("duplicate optimizer label '" + o.label + "'");
    if (o.label.find_first_of("/\\") != std::string::npos) fail("optimizer label '" + o.label + "' contains a path separator");
    build_method(o, c.problem);
  }
  if (c.dynamics) {
    const DynamicsSpec& d = *c.dynamics;
    if (d.schedule != "constant" && d.schedule != "nesterov") fail("dynamics.schedule must be constant or nesterov");
    if (!(d.dt > 0.0 && d.t_end > 0.0) || d.record_every < 1) fail("dynamics needs dt, t_end > 0 and record_every >= 1");
  }
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"logsumexp", "quadcos", "rosenbrock2d", "rosenbrockNd", "ackley", "toynet"};
  return names;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "logsumexp") {
    c.problem.name = "logsumexp";
    c.problem.dim = 100;
    c.problem.seed = 7;
    c.problem.scale = 10.0;
    c.x0.fill = 0.1;
    c.run = {2000, 1e-10, 1};
    const auto [l1, ln] = extreme_eigenvalues(*problem_matrix(c.problem));
    const double kappa_nag = 10.0 * l1 / ln;
    const double tau_pdd = 2.0 / (l1 + ln);
    const double tau_att = 0.0016;
    c.optimizers = {
        opt("gd", "GD", {{"tau", 2.0 / (3.0 * l1 + ln)}}),
        opt("gd", "GD-diag", {{"tau", 0.5}}, "diag_inv_q"),
        opt("nag", "NAG", {{"tau", 4.0 / (30.0 * l1 + ln)}, {"beta", nag_beta(kappa_nag)}}),
        opt("pdd", "PDD", {{"tau", tau_pdd}, {"sigma", tau_pdd}, {"epsilon", 1}, {"A", 10}, {"omega", 1}}),
        opt("pdd", "PDD-diag", {{"tau", 0.5}, {"sigma", 0.5}, {"epsilon", 1}, {"A", 1}, {"omega", 1}}, "diag_inv_q"),
        opt("igahd_sc", "IGAHD-SC", {{"tau", tau_att}, {"m1", ln}, {"beta2", compute_beta2(ln, tau_att)}}),
    };
  } else if (name == "quadcos") {
    c.problem.name = "quadcos";
    c.problem.dim = 100;
    c.problem.seed = 7;
    c.x0.fill = 5.0;
    c.run = {2000, 1e-10, 1};
    c.optimizers = {
        opt("gd", "GD", {{"tau", 0.5}}),
        opt("nag", "NAG", {{"tau", 4.0 / (3.0 * 3.9 + 0.1)}, {"beta", nag_beta(3.9 / 0.1)}}),
        opt("pdd", "PDD", {{"tau", 0.5}, {"sigma", 0.5}, {"epsilon", 1}, {"A", 1}, {"omega", 1}}),
        opt("igahd_sc", "IGAHD-SC", {{"tau", 0.55}, {"m1", 0.1}, {"beta2", compute_beta2(0.1, 0.55)}}),
    };
  } else if (name == "rosenbrock2d") {
    c.problem.name = "rosenbrock";
    c.problem.dim = 2;
    c.x0.values = {-3.0, -4.0};
    c.run = {1000000, 1e-10, 100};
    c.optimizers = {
        opt("gd", "GD", {{"tau", 0.0002}}),
        opt("nag", "NAG", {{"tau", 0.0002}, {"beta", 0.9}}),
        opt("pdd", "PDD", {{"tau", 0.005}, {"sigma", 0.005}, {"epsilon", 1}, {"A", 5}, {"omega", 1}}),
        opt("igahd", "IGAHD", {{"tau", 0.00045}, {"alpha", 3}, {"beta1", std::sqrt(0.00045) / 14.0}}),
    };
  } else if (name == "rosenbrockNd") {
    c.problem.name = "rosenbrock";
    c.problem.dim = 100;
    c.x0.fill = 0.0;
    c.run = {200000, 1e-10, 100};
    c.optimizers = {
        opt("gd", "GD", {{"tau", 0.001}}),
        opt("nag", "NAG", {{"tau", 0.0008}, {"beta", 0.95}}),
        opt("pdd", "PDD", {{"tau", 0.01}, {"sigma", 0.01}, {"epsilon", 0.5}, {"A", 5}, {"omega", 1}}),
        opt("igahd", "IGAHD", {{"tau", 0.0002}, {"alpha", 3}, {"beta1", 2.0 * std::sqrt(0.0002)}}),
    };
  } else if (name == "ackley") {
    c.problem.name = "ackley";
    c.problem.dim = 2;
    c.x0.values = {2.5, 4.0};
    c.run = {100000, 1e-10, 10};
    c.optimizers = {
        opt("gd", "GD", {{"tau", 0.002}}),
        opt("nag", "NAG", {{"tau", 0.002}, {"beta", 0.9}}),
        opt("pdd", "PDD", {{"tau", 0.002}, {"sigma", 0.002}, {"epsilon", 1}, {"A", 1}, {"omega", 1}}),
        opt("igahd", "IGAHD", {{"tau", 0.01}, {"alpha", 3}, {"beta1", 2.0 * std::sqrt(0.01)}}),
    };
  } else if (name == "toynet") {
    c.toynet = ToynetConfig{};
  } else {
    fail("unknown preset '" + name + "'");
  }
  return c;
}

std::string resolve_output_dir(const ExperimentConfig& config, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv("PDD_OUT_DIR"); env && *env) return std::string(env) + "/" + config.name;
  return "pdd_out/" + config.name;
}

namespace {

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  }
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void run_toynet(const ExperimentConfig& config, const std::string& dir, RunArtifact& art) {
  art.toynet_metrics = train(*config.toynet);
  for (const MetricRow& r : art.toynet_metrics) art.any_diverged = art.any_diverged || r.diverged;
  if (config.outputs.csv) {
    art.files.push_back(join(dir, "metrics.csv"));
    write_metrics_csv(art.toynet_metrics, art.files.back());
  }
  if (config.outputs.svg) {
    std::map<StochasticMethod, std::map<int, std::pair<double, int>>> sums;
    for (const MetricRow& r : art.toynet_metrics) {
      if (r.diverged) continue;
      auto& cell = sums[r.method][r.epoch];
      cell.first += r.train_loss;
      cell.second += 1;
    }
    std::vector<Series> series;
    for (StochasticMethod m : config.toynet->methods) {
      Series s{to_string(m), {}, {}};
      for (const auto& [epoch, cell] : sums[m]) {
        s.xs.push_back(epoch);
        s.ys.push_back(cell.first / cell.second);
      }
      series.push_back(std::move(s));
    }
    art.files.push_back(join(dir, "loss.svg"));
    write_text_file(art.files.back(), svg_text(series, "epoch", "mean train loss"));
  }
}

}  // namespace

RunArtifact run_experiment(const ExperimentConfig& config, const std::string& output_dir) {
  validate(config);
  make_dir(output_dir);
  RunArtifact art;
  art.config = config;

  if (config.toynet) {
    run_toynet(config, output_dir, art);
  } else {
    const Objective obj = build_problem(config.problem);
    const Vector x0 = config.x0.resolve(obj.dim());
    std::vector<Method> methods;
    for (const OptimizerSpec& o : config.optimizers) methods.push_back(build_method(o, config.problem));
    art.runs.resize(methods.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const auto start = std::chrono::steady_clock::now();
      Trajectory traj = run_optimizer(obj, methods[i], x0, config.run);
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      art.runs[i] = {config.optimizers[i].label, method_name(methods[i]), std::move(traj), took.count()};
    }

    std::vector<std::pair<std::string, const Trajectory*>> plotted;
    for (const RunResult& r : art.runs) {
      art.any_diverged = art.any_diverged || r.trajectory.diverged;
      if (config.outputs.csv) {
        art.files.push_back(join(output_dir, r.label + ".csv"));
        emit_csv(r.trajectory, art.files.back());
      }
      plotted.emplace_back(r.label, &r.trajectory);
    }
    if (config.outputs.svg) {
      art.files.push_back(join(output_dir, "convergence.svg"));
      emit_svg(plotted, art.files.back());
    }
  }
  art.files.push_back(join(output_dir, "config.yaml"));
  write_text_file(art.files.back(), dump_config(config));
  return art;
}

}  // namespace pdd
