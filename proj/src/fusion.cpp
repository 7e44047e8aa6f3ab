#include "protomol/fusion.hpp"

#include <cmath>
#include <string>

#include "protomol/errors.hpp"

namespace protomol {

FusionParams init_fusion(int graph_dim, int text_dim, int num_layers,
                         uint64_t seed) {
  FusionParams p;
  for (int l = 0; l < num_layers; ++l) {
    Rng rng(seed, "fusion.layer" + std::to_string(l));
    Tensor g2t(graph_dim, text_dim);
    const double sg = 1.0 / std::sqrt(graph_dim);
    for (int i = 0; i < g2t.size(); ++i) g2t[i] = rng.normal(sg);
    Tensor t2g(text_dim, graph_dim);
    const double st = 1.0 / std::sqrt(text_dim);
    for (int i = 0; i < t2g.size(); ++i) t2g[i] = rng.normal(st);
    p.w_g2t.push_back(std::move(g2t));
    p.w_t2g.push_back(std::move(t2g));
  }
  return p;
}

FusionVars bind_fusion(Tape& tape, const FusionParams& p) {
  FusionVars v;
  for (const Tensor& w : p.w_g2t)
    v.w_g2t.push_back(tape.leaf(Tensor(w).set_requires_grad(true)));
  for (const Tensor& w : p.w_t2g)
    v.w_t2g.push_back(tape.leaf(Tensor(w).set_requires_grad(true)));
  return v;
}

Var project_g_to_t(Tape& tape, Var z_g, Var w_g2t) {
  return tape.matmul(z_g, w_g2t);
}

Var project_t_to_g(Tape& tape, Var z_t, Var w_t2g) {
  return tape.matmul(z_t, w_t2g);
}

namespace {

// softmax(q k^T / sqrt(scale_dim)) v with a single key/value row.
Var attend_single(Tape& tape, Var query, Var key_value, int scale_dim) {
  const int width = tape.value(key_value).cols();
  Var logit = tape.matmul(query, tape.reshape(key_value, width, 1));
  logit = tape.mul_scalar(logit, 1.0 / std::sqrt(double(scale_dim)));
  Var weight = tape.row_softmax(logit);  // one logit: exactly 1
  return tape.mul(weight, key_value);
}

}  // namespace

std::pair<Var, Var> cross_attend_pair(Tape& tape, Var z_g, Var z_t, Var w_g2t,
                                      Var w_t2g) {
  const int graph_dim = tape.value(z_g).cols();
  Var g_in_t = project_g_to_t(tape, z_g, w_g2t);
  Var t_in_g = project_t_to_g(tape, z_t, w_t2g);
  Var att_t = attend_single(tape, z_t, g_in_t, graph_dim);
  Var att_g = attend_single(tape, z_g, t_in_g, graph_dim);
  return {att_g, att_t};
}

std::pair<Var, Var> fuse_residual(Tape& tape, Var z_g, Var z_t, Var att_g,
                                  Var att_t) {
  return {tape.add(z_g, att_g), tape.add(z_t, att_t)};
}

std::pair<std::vector<Var>, std::vector<Var>> fuse_all(
    Tape& tape, const std::vector<Var>& graph_layers,
    const std::vector<Var>& text_layers, const FusionVars& params,
    FusionMode mode) {
  const size_t L = graph_layers.size();
  if (text_layers.size() != L)
    throw LayerCountMismatch("fuse_all: modality layer counts differ");
  if (mode != FusionMode::Off && params.w_g2t.size() != L)
    throw LayerCountMismatch("fuse_all: parameter layer count differs");

  std::vector<Var> fused_g, fused_t;
  fused_g.reserve(L);
  fused_t.reserve(L);
  for (size_t l = 0; l < L; ++l) {
    const bool fuse_this_layer =
        mode == FusionMode::Full ||
        (mode == FusionMode::FinalLayerOnly && l + 1 == L);
    if (!fuse_this_layer) {
      fused_g.push_back(graph_layers[l]);
      fused_t.push_back(text_layers[l]);
      continue;
    }
    auto [att_g, att_t] = cross_attend_pair(tape, graph_layers[l], text_layers[l],
                                            params.w_g2t[l], params.w_t2g[l]);
    auto [zg, zt] = fuse_residual(tape, graph_layers[l], text_layers[l], att_g, att_t);
    fused_g.push_back(zg);
    fused_t.push_back(zt);
  }
  return {fused_g, fused_t};
}

}  // namespace protomol
