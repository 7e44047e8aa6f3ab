#pragma once

#include <vector>

#include "protomol/rng.hpp"
#include "protomol/tape.hpp"

namespace protomol {

// Shared space of class-specific anchors plus the two modality projections
// into it. Prototypes are stored flattened: row c * protos_per_class + n is
// prototype n of class c.
struct PrototypeSpaceParams {
  Tensor protos;  // (num_classes * protos_per_class) x proto_dim
  Tensor w_g2p;   // graph_dim x proto_dim
  Tensor b_g;     // 1 x proto_dim
  Tensor w_t2p;   // text_dim x proto_dim
  Tensor b_t;     // 1 x proto_dim
  int num_classes = 1;
  int protos_per_class = 5;
  int top_k = 5;
  double sim_eps = 1e-4;

  int total() const { return num_classes * protos_per_class; }
};

struct PrototypeSpaceVars {
  Var protos, w_g2p, b_g, w_t2p, b_t;
  int num_classes = 1;
  int protos_per_class = 5;
  int top_k = 5;
  double sim_eps = 1e-4;

  int total() const { return num_classes * protos_per_class; }
};

PrototypeSpaceParams init_prototype_space(int graph_dim, int text_dim,
                                          int proto_dim, int num_classes,
                                          int protos_per_class, int top_k,
                                          double sim_eps, uint64_t seed,
                                          const char* stream_prefix = "proto");
PrototypeSpaceVars bind_prototype_space(Tape& tape,
                                        const PrototypeSpaceParams& p);

// Elementwise mean over the layer vectors of a hierarchical embedding.
Var aggregate_layers(Tape& tape, const std::vector<Var>& layers);

// Affine map into the prototype space: z W + b.
Var project_to_proto(Tape& tape, Var z, Var w, Var b);

// Squared euclidean distance to every prototype, flat index c*N + n.
Var proto_distances(Tape& tape, Var z_p, Var protos);

// log((D+1)/(D+eps)) elementwise; strictly decreasing in D with range
// (0, log(1/eps)].
Var log_ratio_similarity(Tape& tape, Var distances, double eps);

// Data-level top-K selection. Ties broken by lowest flat index; the support
// is returned sorted ascending. Selection carries no gradient.
std::vector<int> topk_support(const Tensor& scores, int k);

// The masked vector of the sparsification step: top-K entries kept, all
// others exactly zero.
Var topk_masked(Tape& tape, Var scores, const std::vector<int>& support);

// Probability vector over the C*N prototypes with exactly K nonzero entries:
// softmax over the retained scores only.
struct ProtoDistribution {
  Var support_probs;         // 1 x K, sums to 1
  std::vector<int> support;  // ascending flat indices
  int total = 0;             // C*N

  // Dense 1 x total probabilities (zeros off support).
  Var full(Tape& tape) const;
};

ProtoDistribution proto_distribution(Tape& tape, Var scores,
                                     const std::vector<int>& support,
                                     int total);

// KL(alpha_g || alpha_t) over the graph support. When the text distribution
// is zero somewhere on that support, it is smoothed as (a + d)/(1 + total*d)
// with d = 1e-8 first.
Var alignment_loss(Tape& tape, const ProtoDistribution& graph_dist,
                   const ProtoDistribution& text_dist);

// Full pipeline from an aggregated modality vector to its distribution.
ProtoDistribution proto_pipeline(Tape& tape, Var aggregated, Var w, Var b,
                                 const PrototypeSpaceVars& space);

}  // namespace protomol
