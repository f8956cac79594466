#include "pdd/toynet.hpp"
#include "pdd/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace pdd {

Matrix Dataset::columns(std::span<const int> idx) const {
  Matrix out(features.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = features.col(idx[j]);
  return out;
}

std::vector<int> Dataset::labels_of(std::span<const int> idx) const {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(labels[i]);
  return out;
}

namespace {

Matrix draw_centers(std::mt19937_64& rng, int d_in, int k) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix centers(d_in, k);
  for (int c = 0; c < k; ++c) {
    do {
      for (int i = 0; i < d_in; ++i) centers(i, c) = gauss(rng);
    } while (centers.col(c).norm() == 0.0);
    centers.col(c).normalize();
  }
  return centers;
}

}  // namespace

Matrix blob_centers(std::uint64_t seed, int d_in, int k) {
  if (d_in < 1 || k < 1) throw std::invalid_argument("blobs: invalid sizes");
  std::mt19937_64 rng(seed);
  return draw_centers(rng, d_in, k);
}

Dataset make_blobs(std::uint64_t seed, int n, int d_in, int k, double spread) {
  if (d_in < 1 || k < 1 || n < 10 * k) throw std::invalid_argument("blobs: need d_in >= 1, k >= 1, n >= 10 k");
  if (!(spread >= 0.0) || !std::isfinite(spread)) throw std::invalid_argument("blobs: spread must be finite and >= 0");

  std::mt19937_64 rng(seed);
  const Matrix centers = draw_centers(rng, d_in, k);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset data;
  data.k = k;
  data.seed = seed;
  data.features.resize(d_in, n);
  data.labels.resize(n);
  for (int j = 0; j < n; ++j) {
    const int label = j % k;
    data.labels[j] = label;
    for (int i = 0; i < d_in; ++i) data.features(i, j) = centers(i, label) + spread * gauss(rng);
  }

  for (int c = 0; c < k; ++c) {
    std::vector<int> members;
    for (int j = c; j < n; j += k) members.push_back(j);
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n_train = std::max<std::size_t>(1, members.size() * 4 / 5);
    data.train.insert(data.train.end(), members.begin(), members.begin() + n_train);
    data.test.insert(data.test.end(), members.begin() + n_train, members.end());
  }
  std::sort(data.train.begin(), data.train.end());
  std::sort(data.test.begin(), data.test.end());
  return data;
}

std::string to_string(StochasticMethod m) {
  switch (m) {
    case StochasticMethod::sgd: return "sgd";
    case StochasticMethod::nag_momentum: return "nag_momentum";
    case StochasticMethod::pdd: return "pdd";
    case StochasticMethod::igahd: return "igahd";
    case StochasticMethod::adam: return "adam";
  }
  return "unknown";
}

StochasticMethod stochastic_method_from_string(const std::string& name) {
  for (StochasticMethod m : all_stochastic_methods()) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown stochastic method '" + name + "'");
}

const std::vector<StochasticMethod>& all_stochastic_methods() {
  static const std::vector<StochasticMethod> methods{StochasticMethod::sgd, StochasticMethod::nag_momentum,
                                                     StochasticMethod::pdd, StochasticMethod::igahd,
                                                     StochasticMethod::adam};
  return methods;
}

OptState init_opt_state(StochasticMethod method, const Vector& theta) {
  const Index n = theta.size();
  switch (method) {
    case StochasticMethod::sgd: return SgdState{};
    case StochasticMethod::nag_momentum: return NagMomentumState{theta, theta};
    case StochasticMethod::pdd: return PddDualState{Vector::Zero(n)};
    case StochasticMethod::igahd: return IgahdState{theta, Vector(), 1};
    case StochasticMethod::adam: return AdamState{Vector::Zero(n), Vector::Zero(n), 0};
  }
  throw std::invalid_argument("unknown stochastic method");
}

namespace {

bool finite(const LossGrad& lg) { return std::isfinite(lg.loss) && lg.grad.allFinite(); }

template <class S>
S& state_as(OptState& state, StochasticMethod method) {
  S* s = std::get_if<S>(&state);
  if (!s) throw std::invalid_argument("optimizer state does not match method " + to_string(method));
  return *s;
}

}  // namespace

StepOutcome stochastic_update(StochasticMethod method, OptState& state, Vector& theta,
                              const BatchOracle& oracle, const StochasticHyper& hyper) {
  const LossGrad lg = oracle(theta);
  if (lg.grad.size() != theta.size()) throw std::invalid_argument("batch oracle: gradient length mismatch");
  StepOutcome out{lg.loss, !finite(lg)};
  if (out.diverged) return out;

  Vector next;
  switch (method) {
    case StochasticMethod::sgd: {
      state_as<SgdState>(state, method);
      next = theta - hyper.sgd_tau * lg.grad;
      break;
    }
    case StochasticMethod::nag_momentum: {
      auto& s = state_as<NagMomentumState>(state, method);
      Vector y = theta - hyper.nag_tau * lg.grad;
      next = y + hyper.nag_beta * (s.y_prev - s.y_prev2);
      if (!next.allFinite()) break;
      s.y_prev2 = std::move(s.y_prev);
      s.y_prev = std::move(y);
      break;
    }
    case StochasticMethod::pdd: {
      auto& s = state_as<PddDualState>(state, method);
      PddParams params;
      params.tau = hyper.pdd_tau;
      params.sigma = hyper.pdd_sigma;
      params.epsilon = hyper.pdd_epsilon;
      params.omega = hyper.pdd_omega;
      params.A = hyper.pdd_A;
      const PddState stepped = pdd_update(PddState{theta, s.p, 0, false}, params, lg.grad);
      if (stepped.diverged) {
        out.diverged = true;
        return out;
      }
      next = stepped.x;
      s.p = stepped.p;
      break;
    }
    case StochasticMethod::igahd: {
      auto& s = state_as<IgahdState>(state, method);
      const Vector& g = lg.grad;
      const Vector g_prev = s.g_prev.size() == g.size() ? s.g_prev : g;
      const double n = static_cast<double>(s.n);
      const double damping = hyper.igahd_beta1 * std::sqrt(hyper.igahd_tau);
      const Vector y = theta + (1.0 - hyper.igahd_alpha / n) * (theta - s.x_prev) - damping * (g - g_prev) -
                       (damping / n) * g_prev;
      const LossGrad at_y = oracle(y);
      if (!finite(at_y)) {
        out.diverged = true;
        return out;
      }
      next = y - hyper.igahd_tau * at_y.grad;
      if (!next.allFinite()) break;
      s.x_prev = theta;
      s.g_prev = g;
      ++s.n;
      break;
    }
    case StochasticMethod::adam: {
      auto& s = state_as<AdamState>(state, method);
      const long t = s.t + 1;
      Vector m = hyper.adam_beta1 * s.m + (1.0 - hyper.adam_beta1) * lg.grad;
      Vector v = hyper.adam_beta2 * s.v + (1.0 - hyper.adam_beta2) * lg.grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(hyper.adam_beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(hyper.adam_beta2, static_cast<double>(t));
      next = theta - hyper.adam_lr * ((m / c1).array() / ((v / c2).array().sqrt() + hyper.adam_eps)).matrix();
      if (!next.allFinite()) break;
      s.m = std::move(m);
      s.v = std::move(v);
      s.t = t;
      break;
    }
  }
  if (!next.allFinite()) {
    out.diverged = true;
    return out;
  }
  theta = std::move(next);
  return out;
}

StepOutcome stochastic_step(StochasticMethod method, OptState& state, MlpParams& params, const Dataset& data,
                            std::span<const int> batch, const StochasticHyper& hyper) {
  if (batch.empty()) throw std::invalid_argument("stochastic_step: empty batch");
  const Matrix X = data.columns(batch);
  const std::vector<int> y = data.labels_of(batch);
  const std::array<int, 4> sizes = params.sizes;
  BatchOracle oracle = [&](const Vector& theta) {
    return mlp_loss_grad_parallel(MlpParams{sizes, theta}, X, y);
  };
  return stochastic_update(method, state, params.theta, oracle, hyper);
}

std::vector<MetricRow> train(const ToynetConfig& config) {
  if (config.epochs < 1 || config.batch_size < 1) throw std::invalid_argument("toynet: epochs and batch size must be positive");
  if (config.seeds.empty() || config.methods.empty()) throw std::invalid_argument("toynet: need seeds and methods");
  const Dataset data = make_blobs(config.data_seed, config.n, config.d_in, config.k, config.spread);
  const std::array<int, 4> sizes{config.d_in, config.hidden1, config.hidden2, config.k};
  const Matrix X_train = data.columns(data.train);
  const std::vector<int> y_train = data.labels_of(data.train);
  const Matrix X_test = data.columns(data.test);
  const std::vector<int> y_test = data.labels_of(data.test);

  const long jobs = static_cast<long>(config.methods.size() * config.seeds.size());
  std::vector<std::vector<MetricRow>> results(jobs);

#pragma omp parallel for schedule(dynamic)
  for (long job = 0; job < jobs; ++job) {
    const StochasticMethod method = config.methods[job / config.seeds.size()];
    const std::uint64_t seed = config.seeds[job % config.seeds.size()];
    MlpParams params = init_mlp(sizes, seed);
    OptState state = init_opt_state(method, params.theta);
    std::mt19937_64 shuffle_rng(seed ^ 0x5DEECE66DULL);
    std::vector<int> order(data.train.size());
    bool diverged = false;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      MetricRow row{epoch, method, seed, std::numeric_limits<double>::quiet_NaN(), 0.0, true};
      if (!diverged) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size() && !diverged; start += config.batch_size) {
          const std::size_t len = std::min<std::size_t>(config.batch_size, order.size() - start);
          std::vector<int> batch(len);
          for (std::size_t i = 0; i < len; ++i) batch[i] = data.train[order[start + i]];
          diverged = stochastic_step(method, state, params, data, batch, config.hyper).diverged;
        }
      }
      if (!diverged) {
        row.train_loss = mlp_loss_grad_parallel(params, X_train, y_train).loss;
        row.test_acc = accuracy(params, X_test, y_test);
        row.diverged = !std::isfinite(row.train_loss);
        diverged = row.diverged;
      }
      results[job].push_back(row);
    }
  }

  std::vector<MetricRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "epoch,method,seed,train_loss,test_acc\n";
  char buf[128];
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.train_loss, r.test_acc);
    out << r.epoch << ',' << to_string(r.method) << ',' << r.seed << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<MethodSummary> summarize_final(const std::vector<MetricRow>& rows) {
  int last = 0;
  for (const MetricRow& r : rows) last = std::max(last, r.epoch);
  std::map<StochasticMethod, std::vector<const MetricRow*>> by_method;
  for (const MetricRow& r : rows) {
    if (r.epoch == last) by_method[r.method].push_back(&r);
  }
  std::vector<MethodSummary> out;
  for (StochasticMethod m : all_stochastic_methods()) {
    auto it = by_method.find(m);
    if (it == by_method.end()) continue;
    MethodSummary s{m};
    for (const MetricRow* r : it->second) {
      s.mean_train_loss += r->train_loss;
      s.mean_test_acc += r->test_acc;
      if (r->diverged) ++s.diverged_runs;
    }
    s.mean_train_loss /= static_cast<double>(it->second.size());
    s.mean_test_acc /= static_cast<double>(it->second.size());
    out.push_back(s);
  }
  return out;
}

}  // namespace pdd
