#include "czsl/prompt.hpp"

#include <sstream>

#include "czsl/util.hpp"

namespace czsl {

namespace {
void check_row(const Var& v, const char* what, Index cols) {
  if (v.rows() != 1 || v.cols() != cols) {
    throw DimensionError(std::string("prompt assembly: ") + what + " must be 1x" +
                         std::to_string(cols) + ", got " + shape_str(v.value()));
  }
}
}  // namespace

Var assemble_pair_prompt(Tape& tape, Var prefix, Var attr_embedding, Var obj_embedding,
                         const SpecialTokens& specials) {
  const Index d = prefix.cols();
  if (prefix.rows() < 1) throw ContractError("prompt assembly: empty prefix");
  check_row(attr_embedding, "attribute embedding", d);
  check_row(obj_embedding, "object embedding", d);
  check_row(specials.sos, "SOS", d);
  check_row(specials.eos, "EOS", d);
  return tape.concat_rows({specials.sos, prefix, attr_embedding, obj_embedding,
                           specials.eos});
}

Var assemble_aao_prompt(Tape& tape, Var prefix, Var attr_matrix, int attr_i, int attr_j,
                        Var obj_embedding, const SpecialTokens& specials) {
  if (attr_i == attr_j) {
    throw ContractError("aao prompt: attribute indices must differ, both are " +
                        std::to_string(attr_i));
  }
  if (attr_i < 0 || attr_j < 0 || attr_i >= attr_matrix.rows() ||
      attr_j >= attr_matrix.rows()) {
    throw IndexError("aao prompt: attribute index out of range");
  }
  const Index d = prefix.cols();
  if (prefix.rows() < 1) throw ContractError("prompt assembly: empty prefix");
  check_row(obj_embedding, "object embedding", d);
  Var a_i = tape.slice_rows(attr_matrix, attr_i, 1);
  Var a_j = tape.slice_rows(attr_matrix, attr_j, 1);
  return tape.concat_rows({specials.sos, prefix, a_i, a_j, obj_embedding, specials.eos});
}

Matrix init_prefix(const FrozenTextEncoder& encoder, const std::string& template_text,
                   int prefix_length, std::uint64_t seed) {
  if (prefix_length < 1) {
    throw ConfigError("prefix_length must be >= 1, got " + std::to_string(prefix_length));
  }
  std::istringstream ss(template_text);
  std::vector<std::string> tokens;
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);

  Rng rng(seed);
  Matrix prefix = gaussian_matrix(rng, prefix_length, encoder.dim(), 0.02);
  const int copied = std::min<int>(prefix_length, static_cast<int>(tokens.size()));
  for (int i = 0; i < copied; ++i) {
    prefix.row(i) = encoder.token_embedding(tokens[static_cast<std::size_t>(i)]).transpose();
  }
  return prefix;
}

}  // namespace czsl
