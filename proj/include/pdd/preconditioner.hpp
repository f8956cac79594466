#pragma once

#include "pdd/types.hpp"

#include <functional>
#include <memory>
#include <variant>

namespace pdd {

/// The primal preconditioner C(x) applied to the extrapolated dual.
///
/// Diagonal entries must be strictly positive and dense matrices symmetric
/// positive definite; both are checked on construction. Callback
/// preconditioners are trusted.
class Preconditioner {
 public:
  enum class Kind { identity, diagonal, dense, callback };
  using Callback = std::function<Matrix(const Vector&)>;

  Preconditioner() = default;  // identity

  static Preconditioner identity() { return {}; }
  static Preconditioner diagonal(Vector d);
  static Preconditioner dense(Matrix m);
  static Preconditioner callback(Callback fn);

  Kind kind() const;
  bool is_constant() const { return kind() != Kind::callback; }

  /// C(x) v.
  Vector apply(const Vector& x, const Vector& v) const;
  /// C(x) as a dense dim x dim matrix.
  Matrix matrix(const Vector& x) const;

 private:
  struct Diagonal { std::shared_ptr<const Vector> d; };
  struct Dense { std::shared_ptr<const Matrix> m; };
  struct Func { std::shared_ptr<const Callback> fn; };
  std::variant<std::monostate, Diagonal, Dense, Func> rep_;
};

}  // namespace pdd
