#pragma once

#include <map>
#include <string>
#include <vector>

#include "protomol/graph_encoder.hpp"
#include "protomol/tape.hpp"

namespace protomol {

// Lowercase, strip punctuation, split on whitespace. Empty tokens vanish.
std::vector<std::string> normalize_tokens(const std::string& text);

// Token ids dense in [0, size); id 0 is reserved for unknown tokens. Built
// from the training corpus with tokens sorted lexicographically, so two
// builds over the same corpus are identical.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const std::vector<std::string>& corpus);
  static Vocabulary from_map(std::map<std::string, int> token_to_id);

  int id(const std::string& token) const;
  int size() const { return static_cast<int>(token_to_id_.size()) + 1; }

  // Tokenize and map; throws EmptyText when nothing survives normalization.
  std::vector<int> encode(const std::string& text) const;

  const std::map<std::string, int>& map() const { return token_to_id_; }

 private:
  std::map<std::string, int> token_to_id_;
};

struct TextEncoderParams {
  Tensor embedding;          // vocab_size x text_dim
  std::vector<Mlp2> blocks;  // residual refinement blocks, one per layer
};

struct TextEncoderVars {
  Var embedding;
  std::vector<Mlp2Vars> blocks;
};

TextEncoderParams init_text_encoder(int vocab_size, int text_dim,
                                    int num_layers, uint64_t seed);
TextEncoderVars bind_text_encoder(Tape& tape, const TextEncoderParams& p);

// Mean of the token embedding rows.
Var embed_and_pool(Tape& tape, const std::vector<int>& ids, Var embedding);

// Residual refinement: z <- z + block(z), collected per layer. On a single
// pooled vector a transformer layer's self-attention is the identity, so the
// layer reduces exactly to its residual feed-forward block.
std::vector<Var> refine_layers(Tape& tape, Var pooled,
                               const std::vector<Mlp2Vars>& blocks);

std::vector<Var> encode_text(Tape& tape, const std::vector<int>& ids,
                             const TextEncoderVars& params);

}  // namespace protomol
