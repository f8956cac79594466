#pragma once

#include "pdd/types.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace pdd {

/// Fully connected ReLU network d_in -> h1 -> h2 -> k with softmax output.
/// All weights and biases live in one flat vector so that optimizers can treat
/// the network as a point in R^n.
///
/// Layout per layer l: W_l (sizes[l+1] x sizes[l], column-major), then b_l.
struct MlpParams {
  std::array<int, 4> sizes{};
  Vector theta;

  static Index param_count(const std::array<int, 4>& sizes);
  static MlpParams zeros(const std::array<int, 4>& sizes);

  Eigen::Map<Matrix> weight(int layer);
  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<Vector> bias(int layer);
  Eigen::Map<const Vector> bias(int layer) const;

  void validate() const;

 private:
  Index offset(int layer) const;
};

/// Glorot-uniform weights, zero biases.
MlpParams init_mlp(const std::array<int, 4>& sizes, std::uint64_t seed);

struct LossGrad {
  double loss = 0.0;
  Vector grad;  // same layout as MlpParams::theta
};

/// Mean softmax cross-entropy over the columns of X (one sample per column)
/// and its gradient by backprop. One sample at a time; kept as the reference.
LossGrad mlp_loss_grad_serial(const MlpParams& params, const Matrix& X, std::span<const int> labels);

/// Same quantity, batched over fixed blocks of kBlock samples. Blocks are
/// distributed over OpenMP threads and reduced in block order, so the result
/// does not depend on the thread count.
LossGrad mlp_loss_grad_parallel(const MlpParams& params, const Matrix& X, std::span<const int> labels);

inline constexpr Index kBlock = 32;

/// Logits k x n.
Matrix mlp_forward(const MlpParams& params, const Matrix& X);

/// Fraction of columns whose argmax logit equals the label.
double accuracy(const MlpParams& params, const Matrix& X, std::span<const int> labels);

}  // namespace pdd
