#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "czsl/types.hpp"

namespace czsl {

struct ConceptPair {
  int attr = -1;
  int object = -1;
  friend bool operator==(const ConceptPair&, const ConceptPair&) = default;
  friend auto operator<=>(const ConceptPair&, const ConceptPair&) = default;
};

struct ConceptPairHash {
  std::size_t operator()(const ConceptPair& p) const noexcept {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.attr)) << 32) |
        static_cast<std::uint32_t>(p.object));
  }
};

class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;
  // Rejects duplicate names within either list.
  ConceptVocabulary(std::vector<std::string> attributes, std::vector<std::string> objects);

  int attr_count() const { return static_cast<int>(attributes_.size()); }
  int object_count() const { return static_cast<int>(objects_.size()); }
  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<std::string>& objects() const { return objects_; }
  const std::string& attribute(int id) const;
  const std::string& object(int id) const;
  int attr_id(const std::string& name) const;    // VocabularyError if unknown
  int object_id(const std::string& name) const;  // VocabularyError if unknown
  bool has_attr(const std::string& name) const { return attr_ids_.count(name) > 0; }
  bool has_object(const std::string& name) const { return obj_ids_.count(name) > 0; }

 private:
  std::vector<std::string> attributes_;
  std::vector<std::string> objects_;
  std::unordered_map<std::string, int> attr_ids_;
  std::unordered_map<std::string, int> obj_ids_;
};

struct PairSplit {
  std::vector<ConceptPair> train;        // the seen set
  std::vector<ConceptPair> val_seen;
  std::vector<ConceptPair> val_unseen;
  std::vector<ConceptPair> test_seen;
  std::vector<ConceptPair> test_unseen;

  // Checks id ranges and that no unseen pair appears in train.
  void validate(const ConceptVocabulary& vocab) const;
  bool is_seen(const ConceptPair& p) const;
};

struct Sample {
  std::string id;
  Vector feature;
  ConceptPair label;
};

struct SamplePartitions {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
  Index feature_dim = 0;
};

// Token-to-vector table standing in for GloVe. Lookup canonicalizes to
// lowercase with underscores as spaces; multi-token names average their
// token vectors.
class WordEmbeddingTable {
 public:
  WordEmbeddingTable() = default;
  WordEmbeddingTable(std::unordered_map<std::string, Vector> vectors, Index dim);
  static WordEmbeddingTable load(const std::filesystem::path& file);

  Index dim() const { return dim_; }
  bool empty() const { return vectors_.empty(); }
  Vector lookup(const std::string& name) const;  // VocabularyError if unresolvable
  static std::string canonicalize(const std::string& name);

 private:
  std::unordered_map<std::string, Vector> vectors_;
  Index dim_ = 0;
};

struct Dataset {
  ConceptVocabulary vocab;
  PairSplit split;
  SamplePartitions samples;
  WordEmbeddingTable words;
  bool has_word_embeddings = false;
  std::string content_hash;  // over the canonical serialization

  std::string summary() const;
};

// Reads attributes.txt, objects.txt, the five pair files, the per-partition
// feature files and (when present) embeddings.txt from `dir`.
Dataset load_dataset(const std::filesystem::path& dir);

enum class WorldMode { Closed, Open };
WorldMode parse_world_mode(const std::string& s);  // "closed" | "open"

// Closed: test_seen then novel test_unseen pairs, deduplicated. Open: the full
// attr-major Cartesian product.
std::vector<ConceptPair> target_set(const PairSplit& split, WorldMode mode,
                                    const ConceptVocabulary& vocab);

struct SyntheticConfig {
  int attrs = 8;
  int objects = 8;
  double seen_ratio = 0.6;
  Index feature_dim = 16;  // must be even: features are [attr half | object half]
  double noise_sigma = 0.1;
  int train_per_pair = 40;
  int eval_per_pair = 10;
  Index word_dim = 16;
  std::uint64_t seed = 1;

  void validate() const;  // ConfigError on infeasible settings
};

struct SyntheticDataset {
  ConceptVocabulary vocab;
  PairSplit split;
  SamplePartitions samples;
  Matrix attr_latents;  // attrs x feature_dim/2
  Matrix obj_latents;   // objects x feature_dim/2
  Matrix word_vectors;  // (attrs+objects) x word_dim, attrs first
};

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg);
void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data);

// Noise-free blend used by the generator; exposed so out-of-distribution
// evaluations (e.g. attr-attr-object probes) can reuse the latents.
Vector blend_feature(const Matrix& attr_latents, const Matrix& obj_latents, int attr,
                     int object);

}  // namespace czsl
