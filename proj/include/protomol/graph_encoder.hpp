#pragma once

#include <vector>

#include "protomol/molgraph.hpp"
#include "protomol/rng.hpp"
#include "protomol/tape.hpp"

namespace protomol {

// Two-layer perceptron, linear -> relu -> linear. Weights are stored
// (in x out) for row-vector inputs.
struct Mlp2 {
  Tensor w1, b1, w2, b2;
};

struct Mlp2Vars {
  Var w1, b1, w2, b2;
};

Mlp2 init_mlp2(int in_dim, int hidden_dim, int out_dim, Rng& rng);
Mlp2Vars bind_mlp2(Tape& tape, const Mlp2& p);
Var apply_mlp2(Tape& tape, const Mlp2Vars& p, Var x);

// GIN-style message passing branch: an input MLP, then per layer a sum
// aggregation over neighbors followed by an update MLP, with a mean readout
// per layer.
struct GraphEncoderParams {
  Mlp2 init_mlp;                 // feature_dim -> graph_dim
  std::vector<Mlp2> layer_mlps;  // graph_dim -> graph_dim, one per layer
  double eps_gin = 0.0;
};

struct GraphEncoderVars {
  Mlp2Vars init_mlp;
  std::vector<Mlp2Vars> layer_mlps;
  double eps_gin = 0.0;
};

GraphEncoderParams init_graph_encoder(int feature_dim, int graph_dim,
                                      int num_layers, uint64_t seed);
GraphEncoderVars bind_graph_encoder(Tape& tape, const GraphEncoderParams& p);

// Per-atom embedding of the raw feature rows.
Var init_atom_embed(Tape& tape, Var features, const Mlp2Vars& init_mlp);

// One message-passing update: h_v <- mlp((1+eps) h_v + sum_{u in N(v)} h_u).
// Isolated atoms aggregate the zero vector.
Var gin_layer(Tape& tape, Var states, const MolecularGraph& graph,
              const Mlp2Vars& update_mlp, double eps_gin);

// Mean over atoms.
Var readout_mean(Tape& tape, Var states);

// Layer-wise graph-level representations: one pooled vector per layer.
std::vector<Var> encode_graph(Tape& tape, const MolecularGraph& graph,
                              Var features, const GraphEncoderVars& params);

}  // namespace protomol
