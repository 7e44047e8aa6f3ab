#include "protomol/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "protomol/errors.hpp"

namespace protomol {

PrototypeSpaceParams init_prototype_space(int graph_dim, int text_dim,
                                          int proto_dim, int num_classes,
                                          int protos_per_class, int top_k,
                                          double sim_eps, uint64_t seed,
                                          const char* stream_prefix) {
  PrototypeSpaceParams p;
  p.num_classes = num_classes;
  p.protos_per_class = protos_per_class;
  p.top_k = top_k;
  p.sim_eps = sim_eps;
  const std::string prefix(stream_prefix);
  {
    // Unit-scale distances at start: entries N(0, 1/proto_dim).
    Rng rng(seed, prefix + ".anchors");
    p.protos = Tensor(num_classes * protos_per_class, proto_dim);
    const double stddev = 1.0 / std::sqrt(proto_dim);
    for (int i = 0; i < p.protos.size(); ++i) p.protos[i] = rng.normal(stddev);
  }
  {
    Rng rng(seed, prefix + ".graph_projection");
    p.w_g2p = Tensor(graph_dim, proto_dim);
    const double s = 1.0 / std::sqrt(graph_dim);
    for (int i = 0; i < p.w_g2p.size(); ++i) p.w_g2p[i] = rng.normal(s);
    p.b_g = Tensor(1, proto_dim);
  }
  {
    Rng rng(seed, prefix + ".text_projection");
    p.w_t2p = Tensor(text_dim, proto_dim);
    const double s = 1.0 / std::sqrt(text_dim);
    for (int i = 0; i < p.w_t2p.size(); ++i) p.w_t2p[i] = rng.normal(s);
    p.b_t = Tensor(1, proto_dim);
  }
  return p;
}

PrototypeSpaceVars bind_prototype_space(Tape& tape,
                                        const PrototypeSpaceParams& p) {
  PrototypeSpaceVars v;
  v.protos = tape.leaf(Tensor(p.protos).set_requires_grad(true));
  v.w_g2p = tape.leaf(Tensor(p.w_g2p).set_requires_grad(true));
  v.b_g = tape.leaf(Tensor(p.b_g).set_requires_grad(true));
  v.w_t2p = tape.leaf(Tensor(p.w_t2p).set_requires_grad(true));
  v.b_t = tape.leaf(Tensor(p.b_t).set_requires_grad(true));
  v.num_classes = p.num_classes;
  v.protos_per_class = p.protos_per_class;
  v.top_k = p.top_k;
  v.sim_eps = p.sim_eps;
  return v;
}

Var aggregate_layers(Tape& tape, const std::vector<Var>& layers) {
  if (layers.size() == 1) return layers[0];
  return tape.mean_rows(tape.concat_rows(layers));
}

Var project_to_proto(Tape& tape, Var z, Var w, Var b) {
  return tape.add_rowvec(tape.matmul(z, w), b);
}

Var proto_distances(Tape& tape, Var z_p, Var protos) {
  return tape.sq_dist_rows(z_p, protos);
}

Var log_ratio_similarity(Tape& tape, Var distances, double eps) {
  // log((D+1)/(D+eps)) computed as log(D+1) - log(D+eps).
  return tape.sub(tape.log(tape.add_scalar(distances, 1.0)),
                  tape.log(tape.add_scalar(distances, eps)));
}

std::vector<int> topk_support(const Tensor& scores, int k) {
  const int n = scores.size();
  if (k > n) throw KTooLarge("top-K larger than the score vector");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;  // ties: lowest flat index wins
  });
  std::vector<int> support(order.begin(), order.begin() + k);
  std::sort(support.begin(), support.end());
  return support;
}

namespace {

// Column gather/scatter on 1 x n rows, built from the row ops via reshape.
Var gather_cols(Tape& tape, Var row, const std::vector<int>& idx) {
  const int n = tape.value(row).cols();
  Var col = tape.reshape(row, n, 1);
  return tape.reshape(tape.gather_rows(col, idx), 1,
                      static_cast<int>(idx.size()));
}

Var scatter_cols(Tape& tape, Var row, const std::vector<int>& idx, int out) {
  const int k = tape.value(row).cols();
  Var col = tape.reshape(row, k, 1);
  return tape.reshape(tape.scatter_rows(col, idx, out), 1, out);
}

}  // namespace

Var topk_masked(Tape& tape, Var scores, const std::vector<int>& support) {
  const int n = tape.value(scores).cols();
  return scatter_cols(tape, gather_cols(tape, scores, support), support, n);
}

Var ProtoDistribution::full(Tape& tape) const {
  return scatter_cols(tape, support_probs, support, total);
}

ProtoDistribution proto_distribution(Tape& tape, Var scores,
                                     const std::vector<int>& support,
                                     int total) {
  ProtoDistribution dist;
  dist.support = support;
  dist.total = total;
  // Softmax over the retained scores only; everything else stays at exactly
  // zero probability.
  dist.support_probs = tape.row_softmax(gather_cols(tape, scores, support));
  return dist;
}

Var alignment_loss(Tape& tape, const ProtoDistribution& graph_dist,
                   const ProtoDistribution& text_dist) {
  if (graph_dist.total != text_dist.total)
    throw ShapeMismatch("alignment_loss: distributions over different spaces");

  const bool subset = std::includes(
      text_dist.support.begin(), text_dist.support.end(),
      graph_dist.support.begin(), graph_dist.support.end());

  Var q;  // text probabilities at the graph support
  if (subset) {
    std::vector<int> positions;
    positions.reserve(graph_dist.support.size());
    for (int flat : graph_dist.support) {
      const auto it = std::lower_bound(text_dist.support.begin(),
                                       text_dist.support.end(), flat);
      positions.push_back(
          static_cast<int>(it - text_dist.support.begin()));
    }
    q = gather_cols(tape, text_dist.support_probs, positions);
  } else {
    // Supports differ: smooth the text distribution so the divergence stays
    // defined.
    const double delta = 1e-8;
    Var full = text_dist.full(tape);
    Var smoothed = tape.mul_scalar(tape.add_scalar(full, delta),
                                   1.0 / (1.0 + text_dist.total * delta));
    q = gather_cols(tape, smoothed, graph_dist.support);
  }

  Var p = graph_dist.support_probs;
  return tape.sum(tape.mul(p, tape.sub(tape.log(p), tape.log(q))));
}

ProtoDistribution proto_pipeline(Tape& tape, Var aggregated, Var w, Var b,
                                 const PrototypeSpaceVars& space) {
  Var projected = project_to_proto(tape, aggregated, w, b);
  Var distances = proto_distances(tape, projected, space.protos);
  Var scores = log_ratio_similarity(tape, distances, space.sim_eps);
  const std::vector<int> support =
      topk_support(tape.value(scores), space.top_k);
  return proto_distribution(tape, scores, support, space.total());
}

}  // namespace protomol
