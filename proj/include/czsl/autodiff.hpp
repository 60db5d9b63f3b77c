#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "czsl/types.hpp"

namespace czsl {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; invalid after the
// owning tape is reset.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr && id_ >= 0; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Gradients keyed by the id of the trainable leaf they belong to.
using GradientMap = std::unordered_map<int, Matrix>;

// Reverse-mode tape over dense matrices. Operations append records in
// construction order, which is a topological order by construction; backward()
// walks them in reverse. Single-owner: a Tape must not be shared across
// threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool trainable);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var subtract(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, Scalar factor);
  Var relu(Var a);
  Var transpose(Var a);
  Var slice_rows(Var a, Index first, Index count);
  Var slice_cols(Var a, Index first, Index count);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var row_softmax(Var a);
  Var l2_normalize_rows(Var a);
  Var layer_norm_rows(Var a, Scalar eps = 1e-5);
  Var sum(Var a);
  Var sum_squares(Var a);
  // Mean over rows of (logsumexp(row) - row[target]); the fused form keeps the
  // backward pass exact for extreme logits.
  Var softmax_cross_entropy(Var logits, const std::vector<int>& target_cols);

  // Populates gradients for every trainable leaf reachable from `loss` (zeros
  // for trainable leaves off the loss path). Frozen leaves never appear.
  GradientMap backward(Var loss);

  const Matrix& value_of(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }
  void reset();

 private:
  struct Node {
    Matrix value;
    bool trainable = false;
    bool is_leaf = false;
    // Accumulates contributions into parent adjoints given this node's adjoint.
    std::function<void(const Matrix&)> backprop;
  };

  Var record(Matrix value, std::function<void(const Matrix&)> backprop);
  void accumulate(int id, const Matrix& grad);
  const Node& node(Var v) const;
  void check_owned(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
  std::vector<bool> has_adjoint_;
};

}  // namespace czsl
