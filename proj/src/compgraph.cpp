#include "czsl/compgraph.hpp"

#include <cmath>
#include <fstream>

namespace czsl {

Matrix normalize_adjacency(const Matrix& adjacency) {
  const Index k = adjacency.rows();
  if (adjacency.cols() != k) {
    throw DimensionError("normalize_adjacency: matrix must be square, got " +
                         shape_str(adjacency));
  }
  for (Index i = 0; i < k; ++i) {
    if (adjacency(i, i) <= 0.0) {
      throw ContractError("normalize_adjacency: missing self-loop at node " +
                          std::to_string(i));
    }
    for (Index j = 0; j < k; ++j) {
      if (adjacency(i, j) != 0.0 && adjacency(i, j) != 1.0) {
        throw ContractError("normalize_adjacency: entries must be 0/1");
      }
      if (adjacency(i, j) != adjacency(j, i)) {
        throw ContractError("normalize_adjacency: matrix must be symmetric");
      }
    }
  }
  Vector inv_sqrt_deg(k);
  for (Index i = 0; i < k; ++i) {
    inv_sqrt_deg(i) = 1.0 / std::sqrt(adjacency.row(i).sum());
  }
  Matrix out(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      out(i, j) = adjacency(i, j) * inv_sqrt_deg(i) * inv_sqrt_deg(j);
    }
  }
  return out;
}

CompositionalGraph build_graph(const ConceptVocabulary& vocab,
                               const std::vector<ConceptPair>& seen_pairs,
                               const Matrix& element_embeddings) {
  const int n = vocab.attr_count();
  const int m = vocab.object_count();
  if (element_embeddings.rows() != n + m) {
    throw DimensionError("build_graph: element embedding matrix has " +
                         std::to_string(element_embeddings.rows()) + " rows for " +
                         std::to_string(n + m) + " element concepts");
  }

  CompositionalGraph g;
  g.attr_count = n;
  g.object_count = m;
  g.pairs = seen_pairs;
  const int k = g.node_count();

  g.adjacency = Matrix::Identity(k, k);
  for (std::size_t i = 0; i < seen_pairs.size(); ++i) {
    const ConceptPair& p = seen_pairs[i];
    if (p.attr < 0 || p.attr >= n || p.object < 0 || p.object >= m) {
      throw IndexError("build_graph: pair (" + std::to_string(p.attr) + "," +
                       std::to_string(p.object) + ") references unknown ids");
    }
    const int c = g.pair_node(static_cast<int>(i));
    const int a = g.attr_node(p.attr);
    const int o = g.object_node(p.object);
    g.adjacency(c, a) = g.adjacency(a, c) = 1.0;
    g.adjacency(c, o) = g.adjacency(o, c) = 1.0;
    g.adjacency(a, o) = g.adjacency(o, a) = 1.0;
  }
  g.normalized_adjacency = normalize_adjacency(g.adjacency);

  const Index d = element_embeddings.cols();
  g.initial_features.resize(k, d);
  g.initial_features.topRows(n + m) = element_embeddings;
  for (std::size_t i = 0; i < seen_pairs.size(); ++i) {
    const ConceptPair& p = seen_pairs[i];
    g.initial_features.row(g.pair_node(static_cast<int>(i))) =
        0.5 * (element_embeddings.row(p.attr) + element_embeddings.row(n + p.object));
  }
  return g;
}

void CompositionalGraph::dump_edges(const std::filesystem::path& file) const {
  std::ofstream out(file);
  const Index k = adjacency.rows();
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      if (adjacency(i, j) != 0.0) out << i << ' ' << j << '\n';
    }
  }
}

}  // namespace czsl
