#include "protomol/graph_encoder.hpp"

#include <cmath>
#include <string>

#include "protomol/errors.hpp"

namespace protomol {

namespace {

Tensor normal_matrix(int rows, int cols, double stddev, Rng& rng) {
  Tensor t(rows, cols);
  for (int i = 0; i < t.size(); ++i) t[i] = rng.normal(stddev);
  return t;
}

}  // namespace

Mlp2 init_mlp2(int in_dim, int hidden_dim, int out_dim, Rng& rng) {
  Mlp2 p;
  p.w1 = normal_matrix(in_dim, hidden_dim, 1.0 / std::sqrt(in_dim), rng);
  p.b1 = Tensor(1, hidden_dim);
  p.w2 = normal_matrix(hidden_dim, out_dim, 1.0 / std::sqrt(hidden_dim), rng);
  p.b2 = Tensor(1, out_dim);
  return p;
}

Mlp2Vars bind_mlp2(Tape& tape, const Mlp2& p) {
  Mlp2Vars v;
  v.w1 = tape.leaf(Tensor(p.w1).set_requires_grad(true));
  v.b1 = tape.leaf(Tensor(p.b1).set_requires_grad(true));
  v.w2 = tape.leaf(Tensor(p.w2).set_requires_grad(true));
  v.b2 = tape.leaf(Tensor(p.b2).set_requires_grad(true));
  return v;
}

Var apply_mlp2(Tape& tape, const Mlp2Vars& p, Var x) {
  Var h = tape.relu(tape.add_rowvec(tape.matmul(x, p.w1), p.b1));
  return tape.add_rowvec(tape.matmul(h, p.w2), p.b2);
}

GraphEncoderParams init_graph_encoder(int feature_dim, int graph_dim,
                                      int num_layers, uint64_t seed) {
  GraphEncoderParams p;
  {
    Rng rng(seed, "graph_encoder.init_mlp");
    p.init_mlp = init_mlp2(feature_dim, graph_dim, graph_dim, rng);
  }
  for (int l = 0; l < num_layers; ++l) {
    Rng rng(seed, "graph_encoder.layer" + std::to_string(l));
    p.layer_mlps.push_back(init_mlp2(graph_dim, graph_dim, graph_dim, rng));
  }
  return p;
}

GraphEncoderVars bind_graph_encoder(Tape& tape, const GraphEncoderParams& p) {
  GraphEncoderVars v;
  v.init_mlp = bind_mlp2(tape, p.init_mlp);
  for (const Mlp2& m : p.layer_mlps) v.layer_mlps.push_back(bind_mlp2(tape, m));
  v.eps_gin = p.eps_gin;
  return v;
}

Var init_atom_embed(Tape& tape, Var features, const Mlp2Vars& init_mlp) {
  if (tape.value(features).cols() != tape.value(init_mlp.w1).rows())
    throw ShapeMismatch("init_atom_embed: feature width does not match MLP");
  return apply_mlp2(tape, init_mlp, features);
}

Var gin_layer(Tape& tape, Var states, const MolecularGraph& graph,
              const Mlp2Vars& update_mlp, double eps_gin) {
  const Tensor& h = tape.value(states);
  const int n = static_cast<int>(graph.atoms.size());
  if (h.rows() != n) throw ShapeMismatch("gin_layer: one state row per atom required");
  // (1+eps) I + A as a constant; message passing is one matmul.
  Tensor agg(n, n);
  for (int v = 0; v < n; ++v) {
    agg.at(v, v) = 1.0 + eps_gin;
    for (int u : graph.adjacency[v]) agg.at(v, u) += 1.0;
  }
  Var aggregated = tape.matmul(tape.constant(std::move(agg)), states);
  return apply_mlp2(tape, update_mlp, aggregated);
}

Var readout_mean(Tape& tape, Var states) { return tape.mean_rows(states); }

std::vector<Var> encode_graph(Tape& tape, const MolecularGraph& graph,
                              Var features, const GraphEncoderVars& params) {
  std::vector<Var> layers;
  layers.reserve(params.layer_mlps.size());
  Var h = init_atom_embed(tape, features, params.init_mlp);
  for (const Mlp2Vars& mlp : params.layer_mlps) {
    h = gin_layer(tape, h, graph, mlp, params.eps_gin);
    layers.push_back(readout_mean(tape, h));
  }
  return layers;
}

}  // namespace protomol
