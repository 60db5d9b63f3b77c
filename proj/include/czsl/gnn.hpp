#pragma once

#include <cstdint>
#include <vector>

#include "czsl/autodiff.hpp"
#include "czsl/types.hpp"

namespace czsl {

struct GcnConfig {
  int layers = 2;
  Index hidden_dim = 0;  // 0 means "same as the embedding dimension"
  bool final_relu = true;
  std::uint64_t seed = 7;

  void validate() const;
};

struct GcnParameters {
  std::vector<Matrix> weights;  // layer l maps width w_{l-1} -> w_l; w_0 = w_L = d

  // Glorot-uniform, seeded. Widths run d -> hidden... -> d.
  static GcnParameters init(const GcnConfig& cfg, Index dim);
};

// H^{l+1} = ReLU(A_hat H^l Phi^l). The final ReLU is applied iff `final_relu`.
Var gcn_forward(Tape& tape, Var normalized_adjacency, Var features,
                const std::vector<Var>& weights, bool final_relu = true);

struct ElementEmbeddings {
  Var attrs;    // n x d
  Var objects;  // m x d
};

// Rows [0,n) and [n,n+m) of the node matrix; pair-node rows stay internal.
ElementEmbeddings element_embeddings(Tape& tape, Var node_matrix, int attr_count,
                                     int object_count);

}  // namespace czsl
