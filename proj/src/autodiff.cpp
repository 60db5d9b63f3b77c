#include "czsl/autodiff.hpp"

#include <cmath>
#include <numeric>

#include "czsl/linalg.hpp"

namespace czsl {

const Matrix& Var::value() const {
  if (!valid()) throw ContractError("Var: value() on an invalid handle");
  return tape_->value_of(*this);
}

const Matrix& Tape::value_of(Var v) const { return node(v).value; }

const Tape::Node& Tape::node(Var v) const {
  check_owned(v, "node");
  return nodes_[static_cast<std::size_t>(v.id_)];
}

void Tape::check_owned(Var v, const char* op) const {
  if (v.tape_ != this || v.id_ < 0 ||
      v.id_ >= static_cast<int>(nodes_.size())) {
    throw ContractError(std::string(op) + ": Var does not belong to this tape");
  }
}

Var Tape::leaf(Matrix value, bool trainable) {
  Node n;
  n.value = std::move(value);
  n.trainable = trainable;
  n.is_leaf = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, std::function<void(const Matrix&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& grad) {
  auto idx = static_cast<std::size_t>(id);
  if (!has_adjoint_[idx]) {
    adjoints_[idx] = grad;
    has_adjoint_[idx] = true;
  } else {
    adjoints_[idx] += grad;
  }
}

Var Tape::matmul(Var a, Var b) {
  check_owned(a, "matmul");
  check_owned(b, "matmul");
  Matrix out = czsl::matmul(a.value(), b.value());
  const int ia = a.id_, ib = b.id_;
  return record(std::move(out), [this, ia, ib](const Matrix& g) {
    accumulate(ia, g * nodes_[ib].value.transpose());
    accumulate(ib, nodes_[ia].value.transpose() * g);
  });
}

Var Tape::add(Var a, Var b) {
  check_owned(a, "add");
  check_owned(b, "add");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("add: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
  const int ia = a.id_, ib = b.id_;
  return record(a.value() + b.value(), [this, ia, ib](const Matrix& g) {
    accumulate(ia, g);
    accumulate(ib, g);
  });
}

Var Tape::subtract(Var a, Var b) {
  check_owned(a, "subtract");
  check_owned(b, "subtract");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("subtract: " + shape_str(a.value()) + " vs " +
                         shape_str(b.value()));
  }
  const int ia = a.id_, ib = b.id_;
  return record(a.value() - b.value(), [this, ia, ib](const Matrix& g) {
    accumulate(ia, g);
    accumulate(ib, -g);
  });
}

Var Tape::hadamard(Var a, Var b) {
  check_owned(a, "hadamard");
  check_owned(b, "hadamard");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hadamard: " + shape_str(a.value()) + " vs " +
                         shape_str(b.value()));
  }
  const int ia = a.id_, ib = b.id_;
  return record(a.value().cwiseProduct(b.value()), [this, ia, ib](const Matrix& g) {
    accumulate(ia, g.cwiseProduct(nodes_[ib].value));
    accumulate(ib, g.cwiseProduct(nodes_[ia].value));
  });
}

Var Tape::scale(Var a, Scalar factor) {
  check_owned(a, "scale");
  const int ia = a.id_;
  return record(a.value() * factor, [this, ia, factor](const Matrix& g) {
    accumulate(ia, g * factor);
  });
}

Var Tape::relu(Var a) {
  check_owned(a, "relu");
  // Subgradient at 0 is 0.
  Matrix mask = (a.value().array() > 0.0).cast<Scalar>();
  const int ia = a.id_;
  Matrix out = a.value().cwiseProduct(mask);
  return record(std::move(out), [this, ia, mask](const Matrix& g) {
    accumulate(ia, g.cwiseProduct(mask));
  });
}

Var Tape::transpose(Var a) {
  check_owned(a, "transpose");
  const int ia = a.id_;
  return record(a.value().transpose(), [this, ia](const Matrix& g) {
    accumulate(ia, g.transpose());
  });
}

Var Tape::slice_rows(Var a, Index first, Index count) {
  check_owned(a, "slice_rows");
  if (first < 0 || count < 1 || first + count > a.rows()) {
    throw IndexError("slice_rows: [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") out of " +
                     std::to_string(a.rows()) + " rows");
  }
  const int ia = a.id_;
  const Index rows = a.rows(), cols = a.cols();
  return record(a.value().middleRows(first, count),
                [this, ia, first, count, rows, cols](const Matrix& g) {
                  Matrix full = Matrix::Zero(rows, cols);
                  full.middleRows(first, count) = g;
                  accumulate(ia, full);
                });
}

Var Tape::slice_cols(Var a, Index first, Index count) {
  check_owned(a, "slice_cols");
  if (first < 0 || count < 1 || first + count > a.cols()) {
    throw IndexError("slice_cols: [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") out of " +
                     std::to_string(a.cols()) + " cols");
  }
  const int ia = a.id_;
  const Index rows = a.rows(), cols = a.cols();
  return record(a.value().middleCols(first, count),
                [this, ia, first, count, rows, cols](const Matrix& g) {
                  Matrix full = Matrix::Zero(rows, cols);
                  full.middleCols(first, count) = g;
                  accumulate(ia, full);
                });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  Index total = 0;
  const Index cols = parts.front().cols();
  std::vector<int> ids;
  std::vector<Index> heights;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    check_owned(p, "concat_rows");
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch: " +
                           std::to_string(cols) + " vs " + std::to_string(p.cols()));
    }
    ids.push_back(p.id_);
    heights.push_back(p.rows());
    total += p.rows();
  }
  Matrix out(total, cols);
  Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return record(std::move(out), [this, ids, heights](const Matrix& g) {
    Index at = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      accumulate(ids[i], g.middleRows(at, heights[i]));
      at += heights[i];
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no parts");
  Index total = 0;
  const Index rows = parts.front().rows();
  std::vector<int> ids;
  std::vector<Index> widths;
  for (const Var& p : parts) {
    check_owned(p, "concat_cols");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch: " + std::to_string(rows) +
                           " vs " + std::to_string(p.rows()));
    }
    ids.push_back(p.id_);
    widths.push_back(p.cols());
    total += p.cols();
  }
  Matrix out(rows, total);
  Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return record(std::move(out), [this, ids, widths](const Matrix& g) {
    Index at = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      accumulate(ids[i], g.middleCols(at, widths[i]));
      at += widths[i];
    }
  });
}

Var Tape::row_softmax(Var a) {
  check_owned(a, "row_softmax");
  Matrix y = czsl::row_softmax(a.value());
  const int ia = a.id_;
  return record(y, [this, ia, y](const Matrix& g) {
    Matrix dx(y.rows(), y.cols());
    for (Index r = 0; r < y.rows(); ++r) {
      const Scalar dot = g.row(r).dot(y.row(r));
      dx.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    accumulate(ia, dx);
  });
}

Var Tape::l2_normalize_rows(Var a) {
  check_owned(a, "l2_normalize_rows");
  Matrix y = czsl::l2_normalize_rows(a.value());
  Vector norms(a.rows());
  for (Index r = 0; r < a.rows(); ++r) norms(r) = a.value().row(r).norm();
  const int ia = a.id_;
  return record(y, [this, ia, y, norms](const Matrix& g) {
    Matrix dx(y.rows(), y.cols());
    for (Index r = 0; r < y.rows(); ++r) {
      const Scalar dot = g.row(r).dot(y.row(r));
      dx.row(r) = (g.row(r) - y.row(r) * dot) / norms(r);
    }
    accumulate(ia, dx);
  });
}

Var Tape::layer_norm_rows(Var a, Scalar eps) {
  check_owned(a, "layer_norm_rows");
  const Index rows = a.rows(), cols = a.cols();
  Matrix y(rows, cols);
  Vector inv_std(rows);
  for (Index r = 0; r < rows; ++r) {
    const Scalar mean = a.value().row(r).mean();
    Eigen::RowVectorXd centered = a.value().row(r).array() - mean;
    const Scalar var = centered.squaredNorm() / static_cast<Scalar>(cols);
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    y.row(r) = centered * inv_std(r);
  }
  const int ia = a.id_;
  return record(y, [this, ia, y, inv_std, cols](const Matrix& g) {
    Matrix dx(y.rows(), y.cols());
    const Scalar d = static_cast<Scalar>(cols);
    for (Index r = 0; r < y.rows(); ++r) {
      const Scalar g_mean = g.row(r).mean();
      const Scalar gy_mean = g.row(r).dot(y.row(r)) / d;
      dx.row(r) =
          inv_std(r) *
          (g.row(r).array() - g_mean - y.row(r).array() * gy_mean).matrix();
    }
    accumulate(ia, dx);
  });
}

Var Tape::sum(Var a) {
  check_owned(a, "sum");
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id_;
  const Index rows = a.rows(), cols = a.cols();
  return record(std::move(out), [this, ia, rows, cols](const Matrix& g) {
    accumulate(ia, Matrix::Constant(rows, cols, g(0, 0)));
  });
}

Var Tape::sum_squares(Var a) {
  check_owned(a, "sum_squares");
  Matrix out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  const int ia = a.id_;
  return record(std::move(out), [this, ia](const Matrix& g) {
    accumulate(ia, 2.0 * g(0, 0) * nodes_[ia].value);
  });
}

Var Tape::softmax_cross_entropy(Var logits, const std::vector<int>& target_cols) {
  check_owned(logits, "softmax_cross_entropy");
  const Index rows = logits.rows(), cols = logits.cols();
  if (static_cast<Index>(target_cols.size()) != rows) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(target_cols.size()) +
                         " targets for " + std::to_string(rows) + " rows");
  }
  for (int t : target_cols) {
    if (t < 0 || t >= cols) {
      throw IndexError("softmax_cross_entropy: target column " + std::to_string(t) +
                       " out of " + std::to_string(cols));
    }
  }
  Matrix probs = czsl::row_softmax(logits.value());
  Scalar total = 0.0;
  for (Index r = 0; r < rows; ++r) {
    const Scalar m = logits.value().row(r).maxCoeff();
    const Scalar lse =
        m + std::log((logits.value().row(r).array() - m).exp().sum());
    total += lse - logits.value()(r, target_cols[static_cast<std::size_t>(r)]);
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<Scalar>(rows);
  const int ia = logits.id_;
  return record(std::move(out), [this, ia, probs, target_cols](const Matrix& g) {
    Matrix dz = probs;
    for (Index r = 0; r < dz.rows(); ++r) {
      dz(r, target_cols[static_cast<std::size_t>(r)]) -= 1.0;
    }
    accumulate(ia, dz * (g(0, 0) / static_cast<Scalar>(dz.rows())));
  });
}

GradientMap Tape::backward(Var loss) {
  check_owned(loss, "backward");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        shape_str(loss.value()));
  }
  adjoints_.assign(nodes_.size(), Matrix());
  has_adjoint_.assign(nodes_.size(), false);
  accumulate(loss.id_, Matrix::Ones(1, 1));

  for (int i = loss.id_; i >= 0; --i) {
    auto idx = static_cast<std::size_t>(i);
    if (!has_adjoint_[idx] || !nodes_[idx].backprop) continue;
    nodes_[idx].backprop(adjoints_[idx]);
  }

  GradientMap grads;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf || !nodes_[i].trainable) continue;
    if (has_adjoint_[i]) {
      grads.emplace(static_cast<int>(i), adjoints_[i]);
    } else {
      grads.emplace(static_cast<int>(i),
                    Matrix::Zero(nodes_[i].value.rows(), nodes_[i].value.cols()));
    }
  }
  adjoints_.clear();
  has_adjoint_.clear();
  return grads;
}

void Tape::reset() {
  nodes_.clear();
  adjoints_.clear();
  has_adjoint_.clear();
}

}  // namespace czsl
