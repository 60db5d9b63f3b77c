#pragma once

#include <cstdint>
#include <string>

#include "czsl/autodiff.hpp"
#include "czsl/encoders.hpp"
#include "czsl/types.hpp"

namespace czsl {

struct SpecialTokens {
  Var sos;  // 1 x d, frozen
  Var eos;  // 1 x d, frozen
};

// [SOS, theta_1..theta_k, attr, obj, EOS]: k+4 rows.
Var assemble_pair_prompt(Tape& tape, Var prefix, Var attr_embedding, Var obj_embedding,
                         const SpecialTokens& specials);

// Higher-order attr-attr-object prompt, k+5 rows. The two attribute indices
// must differ; rows are taken from `attr_matrix`.
Var assemble_aao_prompt(Tape& tape, Var prefix, Var attr_matrix, int attr_i, int attr_j,
                        Var obj_embedding, const SpecialTokens& specials);

// Prefix initialization: the first min(k, len(template)) rows copy the frozen
// embeddings of the template's tokens; remaining rows are Normal(0, 0.02^2).
Matrix init_prefix(const FrozenTextEncoder& encoder, const std::string& template_text,
                   int prefix_length, std::uint64_t seed);

}  // namespace czsl
