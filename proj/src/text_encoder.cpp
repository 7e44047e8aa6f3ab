#include "protomol/text_encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>

#include "protomol/errors.hpp"

namespace protomol {

std::vector<std::string> normalize_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    if (std::isspace((unsigned char)c)) {
      flush();
    } else if (!std::ispunct((unsigned char)c)) {
      cur += static_cast<char>(std::tolower((unsigned char)c));
    }
  }
  flush();
  return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus) {
  std::set<std::string> unique;
  for (const std::string& text : corpus) {
    for (std::string& tok : normalize_tokens(text)) unique.insert(std::move(tok));
  }
  Vocabulary v;
  int next_id = 1;  // 0 is the unknown token
  for (const std::string& tok : unique) v.token_to_id_[tok] = next_id++;
  return v;
}

Vocabulary Vocabulary::from_map(std::map<std::string, int> token_to_id) {
  Vocabulary v;
  v.token_to_id_ = std::move(token_to_id);
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  const std::vector<std::string> tokens = normalize_tokens(text);
  if (tokens.empty()) throw EmptyText("no tokens after normalization");
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& tok : tokens) ids.push_back(id(tok));
  return ids;
}

TextEncoderParams init_text_encoder(int vocab_size, int text_dim,
                                    int num_layers, uint64_t seed) {
  TextEncoderParams p;
  {
    Rng rng(seed, "text_encoder.embedding");
    p.embedding = Tensor(vocab_size, text_dim);
    const double stddev = 1.0 / std::sqrt(text_dim);
    for (int i = 0; i < p.embedding.size(); ++i) p.embedding[i] = rng.normal(stddev);
  }
  for (int l = 0; l < num_layers; ++l) {
    Rng rng(seed, "text_encoder.block" + std::to_string(l));
    p.blocks.push_back(init_mlp2(text_dim, text_dim, text_dim, rng));
  }
  return p;
}

TextEncoderVars bind_text_encoder(Tape& tape, const TextEncoderParams& p) {
  TextEncoderVars v;
  v.embedding = tape.leaf(Tensor(p.embedding).set_requires_grad(true));
  for (const Mlp2& m : p.blocks) v.blocks.push_back(bind_mlp2(tape, m));
  return v;
}

Var embed_and_pool(Tape& tape, const std::vector<int>& ids, Var embedding) {
  if (ids.empty()) throw EmptyText("cannot pool an empty token sequence");
  return tape.mean_rows(tape.gather_rows(embedding, ids));
}

std::vector<Var> refine_layers(Tape& tape, Var pooled,
                               const std::vector<Mlp2Vars>& blocks) {
  std::vector<Var> layers;
  layers.reserve(blocks.size());
  Var z = pooled;
  for (const Mlp2Vars& block : blocks) {
    z = tape.add(z, apply_mlp2(tape, block, z));
    layers.push_back(z);
  }
  return layers;
}

std::vector<Var> encode_text(Tape& tape, const std::vector<int>& ids,
                             const TextEncoderVars& params) {
  return refine_layers(tape, embed_and_pool(tape, ids, params.embedding),
                       params.blocks);
}

}  // namespace protomol
