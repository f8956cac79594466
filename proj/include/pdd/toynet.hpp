#pragma once

#include "pdd/kernels.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pdd {

/// Labelled points, one sample per column of `features`.
struct Dataset {
  Matrix features;  // d_in x n
  std::vector<int> labels;
  std::vector<int> train;
  std::vector<int> test;
  int k = 0;
  std::uint64_t seed = 0;

  Matrix columns(std::span<const int> idx) const;
  std::vector<int> labels_of(std::span<const int> idx) const;
};

/// k Gaussian clusters around random unit-norm centers, labels i mod k, and a
/// per-class 80/20 train/test split. Requires n >= 10 k.
Dataset make_blobs(std::uint64_t seed, int n, int d_in, int k, double spread);

/// Class centers (unit norm) that make_blobs would use for this seed.
Matrix blob_centers(std::uint64_t seed, int d_in, int k);

enum class StochasticMethod { sgd, nag_momentum, pdd, igahd, adam };

std::string to_string(StochasticMethod m);
StochasticMethod stochastic_method_from_string(const std::string& name);
const std::vector<StochasticMethod>& all_stochastic_methods();

/// Mini-batch hyperparameters; the defaults are the training-comparison ones.
struct StochasticHyper {
  double sgd_tau = 0.001;
  double nag_tau = 0.001;
  double nag_beta = 0.9;
  double pdd_tau = 0.001;
  double pdd_sigma = 5.0;
  double pdd_epsilon = 0.005;
  double pdd_omega = 1.0;
  double pdd_A = 1.0;
  double igahd_tau = 0.001;
  double igahd_alpha = 3.0;
  double igahd_beta1 = 0.01;
  double adam_lr = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct SgdState {};
struct NagMomentumState {
  Vector y_prev;
  Vector y_prev2;
};
struct PddDualState {
  Vector p;
};
struct IgahdState {
  Vector x_prev;
  Vector g_prev;
  long n = 1;
};
struct AdamState {
  Vector m;
  Vector v;
  long t = 0;
};

using OptState = std::variant<SgdState, NagMomentumState, PddDualState, IgahdState, AdamState>;

/// Fresh optimizer state for parameters theta (zero dual, zero moments, ...).
OptState init_opt_state(StochasticMethod method, const Vector& theta);

/// Loss and gradient of the current mini-batch at an arbitrary point.
using BatchOracle = std::function<LossGrad(const Vector&)>;

struct StepOutcome {
  double loss = 0.0;  // mini-batch loss at the incoming parameters
  bool diverged = false;
};

/// One update of theta against a mini-batch oracle. On a non-finite loss,
/// gradient or result, theta and state are left as they were and the outcome
/// is flagged diverged.
StepOutcome stochastic_update(StochasticMethod method, OptState& state, Vector& theta,
                              const BatchOracle& oracle, const StochasticHyper& hyper);

/// stochastic_update on the columns `batch` of the dataset.
StepOutcome stochastic_step(StochasticMethod method, OptState& state, MlpParams& params,
                            const Dataset& data, std::span<const int> batch, const StochasticHyper& hyper);

struct ToynetConfig {
  std::uint64_t data_seed = 0;
  int n = 2000;
  int d_in = 20;
  int k = 5;
  double spread = 0.5;
  int hidden1 = 16;
  int hidden2 = 16;
  int epochs = 30;
  int batch_size = 32;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<StochasticMethod> methods = all_stochastic_methods();
  StochasticHyper hyper;
};

struct MetricRow {
  int epoch = 0;
  StochasticMethod method = StochasticMethod::sgd;
  std::uint64_t seed = 0;
  double train_loss = 0.0;  // NaN after divergence
  double test_acc = 0.0;
  bool diverged = false;
};

/// Trains every (method, seed) pair for the configured number of epochs.
/// The run seed fixes both the initial weights and the shuffling; all methods
/// share the initial weights for a given seed. Rows are ordered by method,
/// seed, epoch. Pairs run concurrently.
std::vector<MetricRow> train(const ToynetConfig& config);

/// `epoch,method,seed,train_loss,test_acc`
void write_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path);

struct MethodSummary {
  StochasticMethod method;
  double mean_train_loss = 0.0;
  double mean_test_acc = 0.0;
  int diverged_runs = 0;
};

/// Means over seeds at the final epoch.
std::vector<MethodSummary> summarize_final(const std::vector<MetricRow>& rows);

}  // namespace pdd
