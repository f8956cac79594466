#include "pdd/preconditioner.hpp"

#include <utility>

namespace pdd {

Preconditioner Preconditioner::diagonal(Vector d) {
  if (d.size() == 0 || !d.allFinite() || (d.array() <= 0.0).any()) {
    throw std::invalid_argument("Preconditioner::diagonal: entries must be finite and positive");
  }
  Preconditioner c;
  c.rep_ = Diagonal{std::make_shared<const Vector>(std::move(d))};
  return c;
}

Preconditioner Preconditioner::dense(Matrix m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw std::invalid_argument("Preconditioner::dense: not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("Preconditioner::dense: not symmetric");
  }
  if (m.llt().info() != Eigen::Success) throw std::invalid_argument("Preconditioner::dense: not positive definite");
  Preconditioner c;
  c.rep_ = Dense{std::make_shared<const Matrix>(std::move(m))};
  return c;
}

Preconditioner Preconditioner::callback(Callback fn) {
  if (!fn) throw std::invalid_argument("Preconditioner::callback: empty function");
  Preconditioner c;
  c.rep_ = Func{std::make_shared<const Callback>(std::move(fn))};
  return c;
}

Preconditioner::Kind Preconditioner::kind() const {
  switch (rep_.index()) {
    case 1: return Kind::diagonal;
    case 2: return Kind::dense;
    case 3: return Kind::callback;
    default: return Kind::identity;
  }
}

Vector Preconditioner::apply(const Vector& x, const Vector& v) const {
  if (const auto* d = std::get_if<Diagonal>(&rep_)) {
    require_dim(v, d->d->size(), "Preconditioner::apply");
    return d->d->cwiseProduct(v);
  }
  if (const auto* m = std::get_if<Dense>(&rep_)) {
    require_dim(v, m->m->rows(), "Preconditioner::apply");
    return *m->m * v;
  }
  if (const auto* f = std::get_if<Func>(&rep_)) return (*f->fn)(x) * v;
  return v;
}

Matrix Preconditioner::matrix(const Vector& x) const {
  if (const auto* d = std::get_if<Diagonal>(&rep_)) return d->d->asDiagonal();
  if (const auto* m = std::get_if<Dense>(&rep_)) return *m->m;
  if (const auto* f = std::get_if<Func>(&rep_)) return (*f->fn)(x);
  return Matrix::Identity(x.size(), x.size());
}

}  // namespace pdd
