#pragma once

#include <utility>
#include <vector>

#include "protomol/rng.hpp"
#include "protomol/tape.hpp"

namespace protomol {

// Per-layer projection pairs between the two modality spaces. Weights are
// (in x out) for row-vector inputs.
struct FusionParams {
  std::vector<Tensor> w_g2t;  // graph_dim x text_dim
  std::vector<Tensor> w_t2g;  // text_dim x graph_dim
};

struct FusionVars {
  std::vector<Var> w_g2t;
  std::vector<Var> w_t2g;
};

enum class FusionMode {
  Full,           // fuse at every layer
  FinalLayerOnly, // fuse only at the last layer
  Off,            // pass both embeddings through unchanged
};

FusionParams init_fusion(int graph_dim, int text_dim, int num_layers,
                         uint64_t seed);
FusionVars bind_fusion(Tape& tape, const FusionParams& p);

Var project_g_to_t(Tape& tape, Var z_g, Var w_g2t);
Var project_t_to_g(Tape& tape, Var z_t, Var w_t2g);

// Single-vector cross attention. The query-key product is one logit whose
// softmax is exactly 1, so each attended vector equals the projected one;
// the scaled logit is still computed and the gradient through it is exactly
// zero.
std::pair<Var, Var> cross_attend_pair(Tape& tape, Var z_g, Var z_t, Var w_g2t,
                                      Var w_t2g);

std::pair<Var, Var> fuse_residual(Tape& tape, Var z_g, Var z_t, Var att_g,
                                  Var att_t);

// Layer-wise application of project / attend / residual-fuse over both
// hierarchies. Throws LayerCountMismatch when layer counts disagree.
std::pair<std::vector<Var>, std::vector<Var>> fuse_all(
    Tape& tape, const std::vector<Var>& graph_layers,
    const std::vector<Var>& text_layers, const FusionVars& params,
    FusionMode mode);

}  // namespace protomol
