#pragma once

#include <filesystem>
#include <vector>

#include "czsl/dataset.hpp"
#include "czsl/types.hpp"

namespace czsl {

// Graph over attribute, object and seen-pair nodes. Node index convention:
// attributes [0,n), objects [n,n+m), pair nodes [n+m, K) in seen-pair order.
struct CompositionalGraph {
  int attr_count = 0;
  int object_count = 0;
  std::vector<ConceptPair> pairs;  // the seen pairs, in node order
  Matrix adjacency;                // K x K symmetric 0/1 with unit diagonal
  Matrix normalized_adjacency;     // D^(-1/2) A D^(-1/2)
  Matrix initial_features;         // K x d

  int node_count() const { return attr_count + object_count + static_cast<int>(pairs.size()); }
  int attr_node(int attr) const { return attr; }
  int object_node(int object) const { return attr_count + object; }
  int pair_node(int pair_index) const { return attr_count + object_count + pair_index; }

  // Edge list "src dst" (each undirected edge once, src < dst; self-loops
  // omitted), for inspection.
  void dump_edges(const std::filesystem::path& file) const;
};

// Symmetric normalization D^(-1/2) A D^(-1/2) of a symmetric 0/1 adjacency
// with positive diagonal.
Matrix normalize_adjacency(const Matrix& adjacency);

// For each seen pair c=(a,o), adds edges c-a, c-o and a-o plus self-loops
// everywhere. Element rows of the initial features copy `element_embeddings`
// (attributes first); a pair row is the mean of its two element rows.
CompositionalGraph build_graph(const ConceptVocabulary& vocab,
                               const std::vector<ConceptPair>& seen_pairs,
                               const Matrix& element_embeddings);

}  // namespace czsl
