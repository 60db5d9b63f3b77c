#include "czsl/encoders.hpp"

#include <cmath>

#include "czsl/util.hpp"

namespace czsl {

namespace {
constexpr Scalar kMaskValue = -1e9;

Matrix causal_mask(Index len) {
  Matrix mask = Matrix::Zero(len, len);
  for (Index i = 0; i < len; ++i) {
    for (Index j = i + 1; j < len; ++j) mask(i, j) = kMaskValue;
  }
  return mask;
}
}  // namespace

void TextEncoderConfig::validate() const {
  if (layers < 0) throw ConfigError("encoder_layers must be >= 0");
  if (heads < 1) throw ConfigError("encoder_heads must be >= 1");
  if (dim < 1 || ffn_width < 1) throw ConfigError("encoder dims must be >= 1");
  if (dim % heads != 0) {
    throw ConfigError("encoder dim " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (max_seq_len < 2) throw ConfigError("max_seq_len must be >= 2");
}

FrozenTextEncoder::FrozenTextEncoder(TextEncoderConfig cfg, std::vector<std::string> tokens)
    : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.seed);

  int next_row = 2;  // rows 0/1 reserved for SOS/EOS
  for (const std::string& t : tokens) {
    if (t.empty()) throw VocabularyError("empty token name");
    if (token_ids_.emplace(t, next_row).second) ++next_row;
  }
  token_table_ = gaussian_matrix(rng, next_row, cfg_.dim, 0.02);
  positional_ = gaussian_matrix(rng, cfg_.max_seq_len, cfg_.dim, 0.02);

  layers_.reserve(static_cast<std::size_t>(cfg_.layers));
  for (int l = 0; l < cfg_.layers; ++l) {
    Layer layer;
    layer.wq = glorot_uniform_matrix(rng, cfg_.dim, cfg_.dim);
    layer.wk = glorot_uniform_matrix(rng, cfg_.dim, cfg_.dim);
    layer.wv = glorot_uniform_matrix(rng, cfg_.dim, cfg_.dim);
    layer.wo = glorot_uniform_matrix(rng, cfg_.dim, cfg_.dim);
    layer.w1 = glorot_uniform_matrix(rng, cfg_.dim, cfg_.ffn_width);
    layer.w2 = glorot_uniform_matrix(rng, cfg_.ffn_width, cfg_.dim);
    layers_.push_back(std::move(layer));
  }
}

Vector FrozenTextEncoder::token_embedding(const std::string& token) const {
  auto it = token_ids_.find(token);
  if (it == token_ids_.end()) {
    throw VocabularyError("token '" + token + "' not in encoder vocabulary");
  }
  return token_table_.row(it->second).transpose();
}

Matrix FrozenTextEncoder::embed_elements(const ConceptVocabulary& vocab) const {
  Matrix out(vocab.attr_count() + vocab.object_count(), cfg_.dim);
  for (int a = 0; a < vocab.attr_count(); ++a) {
    out.row(a) = token_embedding(vocab.attribute(a)).transpose();
  }
  for (int o = 0; o < vocab.object_count(); ++o) {
    out.row(vocab.attr_count() + o) = token_embedding(vocab.object(o)).transpose();
  }
  return out;
}

FrozenTextEncoder::Bound FrozenTextEncoder::bind(Tape& tape) const {
  Bound b;
  b.tape_ = &tape;
  b.enc_ = this;
  b.positional_ = tape.constant(positional_);
  b.sos_ = tape.constant(token_table_.row(kSosRow));
  b.eos_ = tape.constant(token_table_.row(kEosRow));
  for (const Layer& l : layers_) {
    Bound::LayerVars v;
    v.wq = tape.constant(l.wq);
    v.wk = tape.constant(l.wk);
    v.wv = tape.constant(l.wv);
    v.wo = tape.constant(l.wo);
    v.w1 = tape.constant(l.w1);
    v.w2 = tape.constant(l.w2);
    b.layers_.push_back(v);
  }
  return b;
}

Var FrozenTextEncoder::Bound::encode(Var prompt) const {
  Tape& t = *tape_;
  const Index len = prompt.rows();
  const TextEncoderConfig& cfg = enc_->cfg_;
  if (prompt.cols() != cfg.dim) {
    throw DimensionError("encode_text: prompt width " + std::to_string(prompt.cols()) +
                         " != encoder dim " + std::to_string(cfg.dim));
  }
  if (len > cfg.max_seq_len) {
    throw ContractError("encode_text: sequence length " + std::to_string(len) +
                        " exceeds maximum " + std::to_string(cfg.max_seq_len));
  }

  Var x = t.add(prompt, t.slice_rows(positional_, 0, len));
  const Index head_dim = cfg.dim / cfg.heads;
  const Scalar attn_scale = 1.0 / std::sqrt(static_cast<Scalar>(head_dim));
  Var mask = t.constant(causal_mask(len));

  for (const LayerVars& l : layers_) {
    Var a_in = t.layer_norm_rows(x);
    Var q = t.matmul(a_in, l.wq);
    Var k = t.matmul(a_in, l.wk);
    Var v = t.matmul(a_in, l.wv);
    std::vector<Var> heads;
    heads.reserve(static_cast<std::size_t>(cfg.heads));
    for (int h = 0; h < cfg.heads; ++h) {
      Var qh = t.slice_cols(q, h * head_dim, head_dim);
      Var kh = t.slice_cols(k, h * head_dim, head_dim);
      Var vh = t.slice_cols(v, h * head_dim, head_dim);
      Var logits = t.add(t.scale(t.matmul(qh, t.transpose(kh)), attn_scale), mask);
      heads.push_back(t.matmul(t.row_softmax(logits), vh));
    }
    x = t.add(x, t.matmul(t.concat_cols(heads), l.wo));

    Var f_in = t.layer_norm_rows(x);
    x = t.add(x, t.matmul(t.relu(t.matmul(f_in, l.w1)), l.w2));
  }

  Var eos_state = t.slice_rows(x, len - 1, 1);
  return t.l2_normalize_rows(eos_state);
}

Matrix FrozenTextEncoder::encode_plain(const Matrix& prompt) const {
  Tape tape;
  Bound b = bind(tape);
  return b.encode(tape.constant(prompt)).value();
}

std::string FrozenTextEncoder::parameter_fingerprint() const {
  Sha256 h;
  h.update(token_table_);
  h.update(positional_);
  for (const Layer& l : layers_) {
    h.update(l.wq);
    h.update(l.wk);
    h.update(l.wv);
    h.update(l.wo);
    h.update(l.w1);
    h.update(l.w2);
  }
  return h.hex();
}

FrozenImageEncoder::FrozenImageEncoder(Index feature_dim, Index dim, std::uint64_t seed) {
  if (feature_dim < 1 || dim < 1) throw ConfigError("image encoder dims must be >= 1");
  Rng rng(seed);
  projection_ = glorot_uniform_matrix(rng, feature_dim, dim);
}

Vector FrozenImageEncoder::encode(const Vector& feature) const {
  if (feature.size() != projection_.rows()) {
    throw DimensionError("encode_image: feature dim " + std::to_string(feature.size()) +
                         " != " + std::to_string(projection_.rows()));
  }
  if (!all_finite(feature)) throw ContractError("encode_image: non-finite feature");
  if (feature.norm() <= kNormEps) {
    throw DegenerateVectorError("encode_image: feature vector is (near) zero");
  }
  Matrix row = feature.transpose() * projection_;
  return l2_normalize_rows(row).row(0).transpose();
}

Matrix FrozenImageEncoder::encode_all(const std::vector<Sample>& samples) const {
  Matrix out(static_cast<Index>(samples.size()), dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.row(static_cast<Index>(i)) = encode(samples[i].feature).transpose();
  }
  return out;
}

std::string FrozenImageEncoder::parameter_fingerprint() const {
  Sha256 h;
  h.update(projection_);
  return h.hex();
}

}  // namespace czsl
