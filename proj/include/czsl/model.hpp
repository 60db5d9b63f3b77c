#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "czsl/autodiff.hpp"
#include "czsl/compgraph.hpp"
#include "czsl/dataset.hpp"
#include "czsl/encoders.hpp"
#include "czsl/gnn.hpp"
#include "czsl/prompt.hpp"
#include "czsl/types.hpp"

namespace czsl {

struct ModelConfig {
  Index dim = 32;  // shared embedding width d
  int prefix_length = 3;
  std::string prefix_template = "a photo of";
  int gcn_layers = 2;
  Index gcn_hidden = 0;
  bool gcn_final_relu = true;
  int encoder_layers = 2;
  int encoder_heads = 2;
  Index encoder_ffn = 64;
  Index max_seq_len = 16;
  std::uint64_t encoder_seed = 1234;
  std::uint64_t init_seed = 1;
  bool freeze_prefix = false;  // "without prefix" ablation
  bool bypass_gnn = false;     // "without GNN" ablation: trainable element table

  void validate() const;
};

// The trainable state: the prefix vectors, the GCN weights, and (in the
// bypass-GNN ablation) a directly trainable element-embedding table.
struct ModelParameters {
  Matrix prefix;
  std::vector<Matrix> gcn;
  Matrix elements;
};

// Frozen encoders + compositional graph + trainable parameters, with one
// bind() entry point that lays the differentiable class-encoding path onto a
// tape.
class Model {
 public:
  Model(ModelConfig cfg, const ConceptVocabulary& vocab,
        const std::vector<ConceptPair>& seen_pairs, Index image_feature_dim);

  const ModelConfig& config() const { return cfg_; }
  const ConceptVocabulary& vocab() const { return vocab_; }
  const std::vector<ConceptPair>& seen_pairs() const { return graph_.pairs; }
  const CompositionalGraph& graph() const { return graph_; }
  const FrozenTextEncoder& text_encoder() const { return text_; }
  const FrozenImageEncoder& image_encoder() const { return image_; }
  ModelParameters& params() { return params_; }
  const ModelParameters& params() const { return params_; }

  // Covers everything training must not touch: encoder parameters, image
  // projection, H0 and the SOS/EOS rows.
  std::string frozen_fingerprint() const;

  struct Bound {
    Var prefix;
    std::vector<Var> gcn;
    Var elements;     // bypass mode only
    Var attr_matrix;  // n x d rows feeding the prompts
    Var obj_matrix;   // m x d
    FrozenTextEncoder::Bound text;
    SpecialTokens specials;

    // Unit class vector (1 x d) for one composition.
    Var encode_pair(Tape& tape, const ConceptPair& pair) const;
    // Stacked unit class vectors, one row per pair.
    Var encode_pairs(Tape& tape, const std::vector<ConceptPair>& pairs) const;
    // Higher-order attr-attr-object class vector.
    Var encode_aao(Tape& tape, int attr_i, int attr_j, int object) const;
  };
  Bound bind(Tape& tape) const;

  // Inference-only class vectors (|pairs| x d) on a private tape.
  Matrix class_vectors(const std::vector<ConceptPair>& pairs) const;
  Matrix class_vectors_aao(const std::vector<std::array<int, 3>>& triples) const;

 private:
  ModelConfig cfg_;
  ConceptVocabulary vocab_;
  FrozenTextEncoder text_;
  FrozenImageEncoder image_;
  CompositionalGraph graph_;
  ModelParameters params_;
};

}  // namespace czsl
