#include "czsl/gnn.hpp"

#include "czsl/util.hpp"

namespace czsl {

void GcnConfig::validate() const {
  if (layers < 1) throw ConfigError("gcn_layers must be >= 1");
  if (hidden_dim < 0) throw ConfigError("gcn_hidden must be >= 0");
}

GcnParameters GcnParameters::init(const GcnConfig& cfg, Index dim) {
  cfg.validate();
  const Index hidden = cfg.hidden_dim == 0 ? dim : cfg.hidden_dim;
  Rng rng(cfg.seed);
  GcnParameters params;
  for (int l = 0; l < cfg.layers; ++l) {
    const Index in = l == 0 ? dim : hidden;
    const Index out = l == cfg.layers - 1 ? dim : hidden;
    params.weights.push_back(glorot_uniform_matrix(rng, in, out));
  }
  return params;
}

Var gcn_forward(Tape& tape, Var normalized_adjacency, Var features,
                const std::vector<Var>& weights, bool final_relu) {
  if (weights.empty()) throw ContractError("gcn_forward: no layers");
  if (normalized_adjacency.rows() != normalized_adjacency.cols() ||
      normalized_adjacency.rows() != features.rows()) {
    throw DimensionError("gcn_forward: adjacency " +
                         shape_str(normalized_adjacency.value()) +
                         " incompatible with features " + shape_str(features.value()));
  }
  Var h = features;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (h.cols() != weights[l].rows()) {
      throw DimensionError("gcn_forward: layer " + std::to_string(l) + " expects width " +
                           std::to_string(weights[l].rows()) + ", got " +
                           std::to_string(h.cols()));
    }
    Var pre = tape.matmul(tape.matmul(normalized_adjacency, h), weights[l]);
    h = (l + 1 < weights.size() || final_relu) ? tape.relu(pre) : pre;
  }
  return h;
}

ElementEmbeddings element_embeddings(Tape& tape, Var node_matrix, int attr_count,
                                     int object_count) {
  if (node_matrix.rows() < attr_count + object_count) {
    throw DimensionError("element_embeddings: node matrix has " +
                         std::to_string(node_matrix.rows()) + " rows, need " +
                         std::to_string(attr_count + object_count));
  }
  return {tape.slice_rows(node_matrix, 0, attr_count),
          tape.slice_rows(node_matrix, attr_count, object_count)};
}

}  // namespace czsl
