#pragma once

#include <cstdint>
#include <vector>

#include "protomol/rng.hpp"
#include "protomol/tape.hpp"

namespace protomol {

// One linear head per layer; outputs are averaged into the final prediction.
struct PredictionHeadsParams {
  std::vector<Tensor> w;  // graph_dim x out_dim
  std::vector<Tensor> b;  // 1 x out_dim
};

struct PredictionHeadsVars {
  std::vector<Var> w;
  std::vector<Var> b;
};

// Heads start at zero: the supervised gradient is nonzero there, and with
// the supervised loss ablated the outputs stay exactly tied.
PredictionHeadsParams init_heads(int graph_dim, int out_dim, int num_layers);
PredictionHeadsVars bind_heads(Tape& tape, const PredictionHeadsParams& p);

// Mean over layers of head_l(fused_graph_layer_l).
Var predict(Tape& tape, const std::vector<Var>& fused_graph,
            const PredictionHeadsVars& heads);

// -log softmax(logits)[label].
Var ce_loss(Tape& tape, Var logits, int label);

// (pred - target)^2.
Var mse_loss(Tape& tape, Var pred, double target);

struct ContrastiveConfig {
  double tau = 0.5;          // temperature
  int pseudo_clusters = 2;   // regression pseudo-class count, fixed at 2
  int kmeans_iters = 50;
  uint64_t kmeans_seed = 0;  // reserved; the clustering itself is deterministic
  bool exclude_anchor = false;  // drop the anchor's self term from denominators
};

// InfoNCE-style loss over class prototypes: same-class prototypes are the
// positives of each anchor, all prototypes (anchor included unless
// exclude_anchor) form the denominator. Throws DegenerateConfig when
// protos_per_class == 1 and ZeroVectorPrototype on a zero-norm prototype.
Var proto_contrastive_cls(Tape& tape, Var protos, int num_classes,
                          int protos_per_class, const ContrastiveConfig& cfg);

struct KMeans2Result {
  std::vector<int> assignment;  // 0 or 1 per point
  Tensor centroids;             // 2 x dim
  bool all_points_identical = false;
};

// Lloyd's algorithm with k = 2. Deterministic: centroids start at the two
// points with maximum pairwise distance; an emptied cluster is reseeded with
// the point farthest from the other centroid. Identical points get the
// declared {first}/{rest} split with a warning flag.
KMeans2Result kmeans2(const Tensor& points, const ContrastiveConfig& cfg);

// Regression variant: prototypes are split into two pseudo-classes by
// kmeans2, then contrasted within/between clusters. Anchors whose cluster is
// a singleton have no positives and are skipped; skipped_anchors reports how
// many. All anchors skipped yields a zero loss.
Var proto_contrastive_reg(Tape& tape, Var protos, const ContrastiveConfig& cfg,
                          int* skipped_anchors = nullptr);

struct LossWeights {
  double align = 0.9;
  double pred = 0.9;
  double proto = 0.9;
};

Var total_loss(Tape& tape, Var align, Var pred, Var proto,
               const LossWeights& weights);

}  // namespace protomol
