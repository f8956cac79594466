#pragma once

#include "pdd/objective.hpp"
#include "pdd/optimizers.hpp"
#include "pdd/toynet.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pdd {

/// Test problem by name: quadratic, logsumexp, quadcos, rosenbrock, ackley.
struct ProblemSpec {
  std::string name = "quadratic";
  int dim = 2;
  std::uint64_t seed = 0;
  double a = 1.0;    // rosenbrock
  double b = 100.0;  // rosenbrock
  double scale = 1.0;  // logsumexp: Q is multiplied by this
  std::vector<double> diag;            // quadratic: Q = diag(...)
  std::vector<std::vector<double>> Q;  // quadratic: dense rows, overrides diag
};

/// Starting point: explicit values or every entry equal to `fill`.
struct X0Spec {
  std::vector<double> values;
  std::optional<double> fill;

  Vector resolve(Index dim) const;
};

/// One optimizer entry. Methods and their parameter keys:
///   gd          tau
///   nag         tau, beta
///   heavy_ball  tau, beta
///   igahd       tau, alpha (3), beta1
///   igahd_sc    tau, m1, beta2 (from compute_beta2 when absent)
///   pdd         tau, sigma (tau), A (1), epsilon (1), omega (1)
/// preconditioner: identity, or diag_inv_q (gd and pdd on quadratic/logsumexp).
struct OptimizerSpec {
  std::string method;
  std::string label;  // defaults to the method name
  std::map<std::string, double> params;
  std::string preconditioner = "identity";
};

struct OutputSpec {
  bool csv = true;
  bool svg = true;
};

/// Continuous-time run for the `dynamics` subcommand. schedule is "constant"
/// or "nesterov" (eps(t) = 3/t).
struct DynamicsSpec {
  double A = 1.0;
  double epsilon = 1.0;
  double gamma = 0.0;
  std::string schedule = "constant";
  double t_end = 10.0;
  double dt = 1e-3;
  long record_every = 100;
};

/// Settings for the `analyze` subcommand. NaN gamma/epsilon/A are taken from
/// the first pdd optimizer of the config.
struct AnalysisSpec {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double A = std::numeric_limits<double>::quiet_NaN();
  double delta = 1.0;
  int samples = 20;
  double radius = 0.5;
  long steps = 2000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  X0Spec x0;
  std::vector<OptimizerSpec> optimizers;
  RunOptions run;
  OutputSpec outputs;
  std::string output_dir;  // empty: resolved by resolve_output_dir
  std::optional<ToynetConfig> toynet;
  std::optional<DynamicsSpec> dynamics;
  std::optional<AnalysisSpec> analysis;
};

/// Throws std::invalid_argument on unknown names, missing or unexpected keys,
/// and out-of-range values.
void validate(const ExperimentConfig& config);

Objective build_problem(const ProblemSpec& spec);
Method build_method(const OptimizerSpec& spec, const ProblemSpec& problem);

/// Named presets with the published hyperparameters.
ExperimentConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// YAML round trip.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& config);

/// --out, then config.output_dir, then $PDD_OUT_DIR/<name>, then pdd_out/<name>.
std::string resolve_output_dir(const ExperimentConfig& config, const std::string& cli_out = "");

struct RunResult {
  std::string label;
  std::string method;
  Trajectory trajectory;
  double wall_seconds = 0.0;
};

struct RunArtifact {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  std::vector<MetricRow> toynet_metrics;
  std::vector<std::string> files;
  bool any_diverged = false;
};

/// Runs every optimizer from the shared x0 (concurrently) and writes
/// <label>.csv per run, convergence.svg and config.yaml into output_dir.
/// A toynet config trains instead and writes metrics.csv and loss.svg.
RunArtifact run_experiment(const ExperimentConfig& config, const std::string& output_dir);

/// Spectral report of the linearization at the minimizer (or x0), sampled
/// curvature constants, and a Lyapunov decay check of PDD run with the
/// step-size recipe. Writes spectral.csv, spectral_summary.csv,
/// constants.csv, discrete.csv and discrete_summary.csv.
std::vector<std::string> run_analysis(const ExperimentConfig& config, const std::string& output_dir,
                                      std::uint64_t seed = 0);

/// Integrates the continuous system from (x0, 0) and writes dynamics.csv with
/// columns t,lyapunov,f,grad_norm,x_0..,p_0..
std::vector<std::string> run_dynamics(const ExperimentConfig& config, const std::string& output_dir);

// Reports.

/// `iter,f,grad_norm,lyapunov,dist_to_min`, %.17g, LF line endings.
void emit_csv(const Trajectory& traj, const std::string& path);
std::string csv_text(const Trajectory& traj);
/// Parses emit_csv output back into records.
std::vector<Record> parse_csv(const std::string& text);

struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Log-log line chart; non-positive points are dropped.
std::string svg_text(const std::vector<Series>& series, const std::string& x_label, const std::string& y_label);
/// Gradient norm against iteration + 1, one polyline per labelled trajectory.
void emit_svg(const std::vector<std::pair<std::string, const Trajectory*>>& trajs, const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace pdd
