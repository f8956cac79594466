#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pdd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when an iteration produces a non-finite gradient, value or iterate.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw std::invalid_argument(what + ": non-finite entry");
}

inline void require_dim(const Vector& v, Index dim, const std::string& what) {
  if (v.size() != dim) {
    throw std::invalid_argument(what + ": expected length " + std::to_string(dim) +
                                ", got " + std::to_string(v.size()));
  }
}

/// Symmetric part (M + M^T) / 2.
inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace pdd
