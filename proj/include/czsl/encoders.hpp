#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "czsl/autodiff.hpp"
#include "czsl/dataset.hpp"
#include "czsl/types.hpp"

namespace czsl {

struct TextEncoderConfig {
  int layers = 2;
  int heads = 2;
  Index dim = 32;
  Index ffn_width = 64;
  Index max_seq_len = 16;
  std::uint64_t seed = 1234;

  void validate() const;
};

// Seeded micro-transformer with a CLIP-shaped contract: causal mask, EOS
// position = last row, unit-norm output. Parameters never receive updates;
// gradients flow only to the prompt inputs.
class FrozenTextEncoder {
 public:
  FrozenTextEncoder(TextEncoderConfig cfg, std::vector<std::string> tokens);

  const TextEncoderConfig& config() const { return cfg_; }
  Index dim() const { return cfg_.dim; }
  bool has_token(const std::string& token) const { return token_ids_.count(token) > 0; }
  Vector token_embedding(const std::string& token) const;  // VocabularyError if unknown
  Matrix sos_embedding() const { return token_table_.row(kSosRow); }
  Matrix eos_embedding() const { return token_table_.row(kEosRow); }

  // Frozen token-embedding rows for every attribute then object name.
  Matrix embed_elements(const ConceptVocabulary& vocab) const;

  // Per-tape facade: frozen parameters become constants once, shared by all
  // encode calls on that tape.
  class Bound {
   public:
    Var encode(Var prompt) const;
    Var sos() const { return sos_; }
    Var eos() const { return eos_; }

   private:
    friend class FrozenTextEncoder;
    struct LayerVars {
      Var wq, wk, wv, wo, w1, w2;
    };
    Tape* tape_ = nullptr;
    const FrozenTextEncoder* enc_ = nullptr;
    Var positional_;
    Var sos_, eos_;
    std::vector<LayerVars> layers_;
  };
  Bound bind(Tape& tape) const;

  // Convenience for inference paths: encodes on a private tape.
  Matrix encode_plain(const Matrix& prompt) const;

  // SHA-256 over every parameter buffer; the freeze-invariance witness.
  std::string parameter_fingerprint() const;

 private:
  static constexpr Index kSosRow = 0;
  static constexpr Index kEosRow = 1;

  struct Layer {
    Matrix wq, wk, wv, wo, w1, w2;
  };

  TextEncoderConfig cfg_;
  std::unordered_map<std::string, int> token_ids_;  // into token_table_ rows
  Matrix token_table_;  // (2 + tokens) x dim; rows 0/1 are SOS/EOS
  Matrix positional_;   // max_seq_len x dim
  std::vector<Layer> layers_;
};

// Fixed seeded projection from image-feature space to the shared embedding
// space, followed by L2 normalization.
class FrozenImageEncoder {
 public:
  FrozenImageEncoder(Index feature_dim, Index dim, std::uint64_t seed);

  Index feature_dim() const { return projection_.rows(); }
  Index dim() const { return projection_.cols(); }
  const Matrix& projection() const { return projection_; }

  Vector encode(const Vector& feature) const;  // unit d-vector
  // One unit row per sample.
  Matrix encode_all(const std::vector<Sample>& samples) const;

  std::string parameter_fingerprint() const;

 private:
  Matrix projection_;  // feature_dim x dim
};

}  // namespace czsl
