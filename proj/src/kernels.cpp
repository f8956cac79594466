#include "pdd/kernels.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace pdd {

Index MlpParams::param_count(const std::array<int, 4>& sizes) {
  Index total = 0;
  for (int l = 0; l < 3; ++l) total += static_cast<Index>(sizes[l + 1]) * (sizes[l] + 1);
  return total;
}

MlpParams MlpParams::zeros(const std::array<int, 4>& sizes) {
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("mlp: layer sizes must be positive");
  }
  return {sizes, Vector::Zero(param_count(sizes))};
}

Index MlpParams::offset(int layer) const {
  if (layer < 0 || layer > 2) throw std::out_of_range("mlp: layer index");
  Index off = 0;
  for (int l = 0; l < layer; ++l) off += static_cast<Index>(sizes[l + 1]) * (sizes[l] + 1);
  return off;
}

Eigen::Map<Matrix> MlpParams::weight(int layer) {
  return {theta.data() + offset(layer), sizes[layer + 1], sizes[layer]};
}
Eigen::Map<const Matrix> MlpParams::weight(int layer) const {
  return {theta.data() + offset(layer), sizes[layer + 1], sizes[layer]};
}
Eigen::Map<Vector> MlpParams::bias(int layer) {
  return {theta.data() + offset(layer) + Index{sizes[layer + 1]} * sizes[layer], sizes[layer + 1]};
}
Eigen::Map<const Vector> MlpParams::bias(int layer) const {
  return {theta.data() + offset(layer) + Index{sizes[layer + 1]} * sizes[layer], sizes[layer + 1]};
}

void MlpParams::validate() const {
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("mlp: layer sizes must be positive");
  }
  if (theta.size() != param_count(sizes)) throw std::invalid_argument("mlp: parameter vector has wrong length");
  require_finite(theta, "mlp parameters");
}

MlpParams init_mlp(const std::array<int, 4>& sizes, std::uint64_t seed) {
  MlpParams params = MlpParams::zeros(sizes);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < 3; ++l) {
    const double limit = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto W = params.weight(l);
    for (Index j = 0; j < W.cols(); ++j) {
      for (Index i = 0; i < W.rows(); ++i) W(i, j) = dist(rng);
    }
  }
  return params;
}

namespace {

void check_batch(const MlpParams& params, const Matrix& X, std::span<const int> labels) {
  if (X.cols() == 0) throw std::invalid_argument("mlp: empty batch");
  if (X.rows() != params.sizes[0]) throw std::invalid_argument("mlp: feature dimension mismatch");
  if (static_cast<Index>(labels.size()) != X.cols()) throw std::invalid_argument("mlp: label count mismatch");
  if (params.theta.size() != MlpParams::param_count(params.sizes)) {
    throw std::invalid_argument("mlp: parameter vector has wrong length");
  }
  for (int y : labels) {
    if (y < 0 || y >= params.sizes[3]) throw std::invalid_argument("mlp: label out of range");
  }
}

// Summed (not averaged) loss and gradient over the columns of Xb.
double block_loss_grad(const MlpParams& params, const Eigen::Ref<const Matrix>& Xb,
                       std::span<const int> labels, MlpParams& grad) {
  const Matrix Z1 = (params.weight(0) * Xb).colwise() + params.bias(0);
  const Matrix H1 = Z1.cwiseMax(0.0);
  const Matrix Z2 = (params.weight(1) * H1).colwise() + params.bias(1);
  const Matrix H2 = Z2.cwiseMax(0.0);
  Matrix D3 = (params.weight(2) * H2).colwise() + params.bias(2);

  double loss = 0.0;
  for (Index j = 0; j < D3.cols(); ++j) {
    auto z = D3.col(j);
    const double shift = z.maxCoeff();
    const double lse = shift + std::log((z.array() - shift).exp().sum());
    loss += lse - z(labels[j]);
    z = (z.array() - lse).exp().matrix();
    z(labels[j]) -= 1.0;
  }

  grad.weight(2).noalias() += D3 * H2.transpose();
  grad.bias(2) += D3.rowwise().sum();
  const Matrix D2 = (params.weight(2).transpose() * D3).cwiseProduct((Z2.array() > 0.0).cast<double>().matrix());
  grad.weight(1).noalias() += D2 * H1.transpose();
  grad.bias(1) += D2.rowwise().sum();
  const Matrix D1 = (params.weight(1).transpose() * D2).cwiseProduct((Z1.array() > 0.0).cast<double>().matrix());
  grad.weight(0).noalias() += D1 * Xb.transpose();
  grad.bias(0) += D1.rowwise().sum();
  return loss;
}

}  // namespace

LossGrad mlp_loss_grad_serial(const MlpParams& params, const Matrix& X, std::span<const int> labels) {
  check_batch(params, X, labels);
  MlpParams grad = MlpParams::zeros(params.sizes);
  double loss = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    loss += block_loss_grad(params, X.col(j), labels.subspan(j, 1), grad);
  }
  const double n = static_cast<double>(X.cols());
  return {loss / n, grad.theta / n};
}

LossGrad mlp_loss_grad_parallel(const MlpParams& params, const Matrix& X, std::span<const int> labels) {
  check_batch(params, X, labels);
  const Index n = X.cols();
  const Index blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> losses(blocks, 0.0);
  std::vector<Vector> grads(blocks);

#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlock;
    const Index len = std::min(kBlock, n - start);
    MlpParams g = MlpParams::zeros(params.sizes);
    losses[b] = block_loss_grad(params, X.middleCols(start, len), labels.subspan(start, len), g);
    grads[b] = std::move(g.theta);
  }

  LossGrad out{0.0, Vector::Zero(params.theta.size())};
  for (Index b = 0; b < blocks; ++b) {
    out.loss += losses[b];
    out.grad += grads[b];
  }
  out.loss /= static_cast<double>(n);
  out.grad /= static_cast<double>(n);
  return out;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& X) {
  if (X.rows() != params.sizes[0]) throw std::invalid_argument("mlp: feature dimension mismatch");
  const Matrix H1 = ((params.weight(0) * X).colwise() + params.bias(0)).cwiseMax(0.0);
  const Matrix H2 = ((params.weight(1) * H1).colwise() + params.bias(1)).cwiseMax(0.0);
  return (params.weight(2) * H2).colwise() + params.bias(2);
}

double accuracy(const MlpParams& params, const Matrix& X, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != X.cols()) throw std::invalid_argument("mlp: label count mismatch");
  if (X.cols() == 0) return 0.0;
  const Matrix logits = mlp_forward(params, X);
  Index correct = 0;
  for (Index j = 0; j < logits.cols(); ++j) {
    Index best = 0;
    logits.col(j).maxCoeff(&best);
    if (best == labels[j]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(X.cols());
}

}  // namespace pdd
