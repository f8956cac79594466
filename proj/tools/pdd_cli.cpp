// Command-line front end: run configs and presets, analyze, integrate, train.
#include "pdd/harness.hpp"
#include "pdd/toynet.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> max_iter;
  std::optional<double> grad_tol;
  std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Problem / data seed");
  cmd->add_option("--max-iter", o.max_iter, "Iteration budget per optimizer");
  cmd->add_option("--grad-tol", o.grad_tol, "Stop when |grad f| <= this");
  cmd->add_option("--out", o.out, "Output directory");
}

void apply(const Overrides& o, pdd::ExperimentConfig& c) {
  if (o.seed) {
    c.problem.seed = *o.seed;
    if (c.toynet) c.toynet->data_seed = *o.seed;
  }
  if (o.max_iter) c.run.max_iter = *o.max_iter;
  if (o.grad_tol) c.run.grad_tol = *o.grad_tol;
}

int report(const pdd::RunArtifact& art) {
  if (!art.runs.empty()) {
    std::printf("%-12s %10s %24s %24s %9s %8s\n", "label", "iters", "f", "|grad f|", "diverged", "seconds");
    for (const pdd::RunResult& r : art.runs) {
      const pdd::Record& last = r.trajectory.records.back();
      std::printf("%-12s %10ld %24.16e %24.16e %9s %8.3f\n", r.label.c_str(), r.trajectory.iterations, last.f,
                  last.grad_norm, r.trajectory.diverged ? "yes" : "no", r.wall_seconds);
    }
  }
  if (!art.toynet_metrics.empty()) {
    std::printf("%-14s %16s %12s %9s\n", "method", "final loss", "test acc", "diverged");
    for (const pdd::MethodSummary& s : pdd::summarize_final(art.toynet_metrics)) {
      std::printf("%-14s %16.6f %12.4f %9d\n", pdd::to_string(s.method).c_str(), s.mean_train_loss, s.mean_test_acc,
                  s.diverged_runs);
    }
  }
  for (const std::string& f : art.files) std::printf("wrote %s\n", f.c_str());
  if (art.any_diverged) std::fprintf(stderr, "pdd: at least one run diverged\n");
  return art.any_diverged ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual damping optimizer benchmarks"};
  app.require_subcommand(1);

  Overrides run_o, preset_o, analyze_o, dyn_o;
  std::string config_path, preset_name, analyze_path, dyn_path;
  bool dump = false;

  CLI::App* run = app.add_subcommand("run", "Run every optimizer of a YAML config");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(run, run_o);

  CLI::App* pre = app.add_subcommand("preset", "Run a named preset");
  pre->add_option("name", preset_name, "Preset name")->required();
  pre->add_flag("--dump", dump, "Print the preset as YAML instead of running it");
  add_overrides(pre, preset_o);

  CLI::App* analyze = app.add_subcommand("analyze", "Spectral and Lyapunov-rate reports as CSV");
  analyze->add_option("config", analyze_path, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(analyze, analyze_o);

  CLI::App* dyn = app.add_subcommand("dynamics", "Integrate the continuous system and write CSV");
  dyn->add_option("config", dyn_path, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(dyn, dyn_o);

  int seeds = 10, epochs = 30;
  std::string toy_out;
  CLI::App* toy = app.add_subcommand("toynet", "Train the small network with every stochastic method");
  toy->add_option("--seeds", seeds, "Number of seeds (0..k-1)")->check(CLI::PositiveNumber);
  toy->add_option("--epochs", epochs, "Epochs per run")->check(CLI::PositiveNumber);
  toy->add_option("--out", toy_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; usage errors share the generic error code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      pdd::ExperimentConfig c = pdd::load_config(config_path);
      apply(run_o, c);
      return report(pdd::run_experiment(c, pdd::resolve_output_dir(c, run_o.out)));
    }
    if (*pre) {
      pdd::ExperimentConfig c = pdd::preset(preset_name);
      apply(preset_o, c);
      if (dump) {
        std::cout << pdd::dump_config(c);
        return 0;
      }
      return report(pdd::run_experiment(c, pdd::resolve_output_dir(c, preset_o.out)));
    }
    if (*analyze) {
      pdd::ExperimentConfig c = pdd::load_config(analyze_path);
      apply(analyze_o, c);
      for (const std::string& f : pdd::run_analysis(c, pdd::resolve_output_dir(c, analyze_o.out), analyze_o.seed.value_or(0))) {
        std::printf("wrote %s\n", f.c_str());
      }
      return 0;
    }
    if (*dyn) {
      pdd::ExperimentConfig c = pdd::load_config(dyn_path);
      apply(dyn_o, c);
      for (const std::string& f : pdd::run_dynamics(c, pdd::resolve_output_dir(c, dyn_o.out))) {
        std::printf("wrote %s\n", f.c_str());
      }
      return 0;
    }
    if (*toy) {
      pdd::ExperimentConfig c = pdd::preset("toynet");
      c.toynet->epochs = epochs;
      c.toynet->seeds.clear();
      for (int s = 0; s < seeds; ++s) c.toynet->seeds.push_back(static_cast<std::uint64_t>(s));
      return report(pdd::run_experiment(c, pdd::resolve_output_dir(c, toy_out)));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pdd: %s\n", e.what());
    return 2;
  }
  return 0;
}
