#include "protomol/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "protomol/errors.hpp"

namespace protomol {

PredictionHeadsParams init_heads(int graph_dim, int out_dim, int num_layers) {
  PredictionHeadsParams p;
  for (int l = 0; l < num_layers; ++l) {
    p.w.emplace_back(graph_dim, out_dim);
    p.b.emplace_back(1, out_dim);
  }
  return p;
}

PredictionHeadsVars bind_heads(Tape& tape, const PredictionHeadsParams& p) {
  PredictionHeadsVars v;
  for (const Tensor& w : p.w)
    v.w.push_back(tape.leaf(Tensor(w).set_requires_grad(true)));
  for (const Tensor& b : p.b)
    v.b.push_back(tape.leaf(Tensor(b).set_requires_grad(true)));
  return v;
}

Var predict(Tape& tape, const std::vector<Var>& fused_graph,
            const PredictionHeadsVars& heads) {
  if (fused_graph.size() != heads.w.size())
    throw ShapeMismatch("predict: one head per layer required");
  std::vector<Var> outs;
  outs.reserve(fused_graph.size());
  for (size_t l = 0; l < fused_graph.size(); ++l) {
    outs.push_back(tape.add_rowvec(tape.matmul(fused_graph[l], heads.w[l]),
                                   heads.b[l]));
  }
  return tape.mean_rows(tape.concat_rows(outs));
}

Var ce_loss(Tape& tape, Var logits, int label) {
  const int num_classes = tape.value(logits).cols();
  if (label < 0 || label >= num_classes)
    throw InvalidLabel("class label outside [0, C)");
  Var probs = tape.row_softmax(logits);
  Var picked = tape.gather_rows(tape.reshape(probs, num_classes, 1), {label});
  return tape.mul_scalar(tape.log(tape.reshape(picked, 1, 1)), -1.0);
}

Var mse_loss(Tape& tape, Var pred, double target) {
  Var diff = tape.add_scalar(pred, -target);
  return tape.mul(diff, diff);
}

namespace {

void check_prototypes_nonzero(const Tensor& protos) {
  for (int r = 0; r < protos.rows(); ++r) {
    double norm2 = 0.0;
    for (int j = 0; j < protos.cols(); ++j)
      norm2 += protos.at(r, j) * protos.at(r, j);
    if (norm2 == 0.0)
      throw ZeroVectorPrototype("prototype with zero norm");
  }
}

// Pairwise exp(sim/tau) over prototype rows, computed once and shared by all
// anchors. Entries are symmetric; (i, i) is exp(1/tau).
std::vector<std::vector<Var>> exp_sim_matrix(Tape& tape, Var protos, int n,
                                             double tau) {
  std::vector<std::vector<Var>> m(n, std::vector<Var>(n));
  for (int i = 0; i < n; ++i) {
    Var row_i = tape.gather_rows(protos, {i});
    for (int j = i; j < n; ++j) {
      Var row_j = tape.gather_rows(protos, {j});
      Var e = tape.exp(tape.mul_scalar(tape.cosine(row_i, row_j), 1.0 / tau));
      m[i][j] = e;
      m[j][i] = e;
    }
  }
  return m;
}

Var sum_terms(Tape& tape, const std::vector<Var>& terms) {
  if (terms.size() == 1) return terms[0];
  return tape.sum(tape.concat_rows(terms));
}

// -log(num/den) for one anchor given its positive set and the denominator
// index set.
Var anchor_loss(Tape& tape, const std::vector<std::vector<Var>>& sims,
                int anchor, const std::vector<int>& positives,
                const std::vector<int>& denominator_set) {
  std::vector<Var> pos_terms, den_terms;
  for (int j : positives) pos_terms.push_back(sims[anchor][j]);
  for (int j : denominator_set) den_terms.push_back(sims[anchor][j]);
  Var num = tape.mul_scalar(sum_terms(tape, pos_terms),
                            1.0 / double(pos_terms.size()));
  Var den = sum_terms(tape, den_terms);
  return tape.sub(tape.log(den), tape.log(num));
}

}  // namespace

Var proto_contrastive_cls(Tape& tape, Var protos, int num_classes,
                          int protos_per_class, const ContrastiveConfig& cfg) {
  if (protos_per_class < 2)
    throw DegenerateConfig(
        "classification contrastive loss needs at least 2 prototypes per class");
  check_prototypes_nonzero(tape.value(protos));
  const int total = num_classes * protos_per_class;
  const auto sims = exp_sim_matrix(tape, protos, total, cfg.tau);

  std::vector<Var> losses;
  losses.reserve(total);
  for (int c = 0; c < num_classes; ++c) {
    for (int n = 0; n < protos_per_class; ++n) {
      const int anchor = c * protos_per_class + n;
      std::vector<int> positives;
      for (int n2 = 0; n2 < protos_per_class; ++n2) {
        if (n2 != n) positives.push_back(c * protos_per_class + n2);
      }
      std::vector<int> den_set;
      for (int j = 0; j < total; ++j) {
        if (cfg.exclude_anchor && j == anchor) continue;
        den_set.push_back(j);
      }
      losses.push_back(anchor_loss(tape, sims, anchor, positives, den_set));
    }
  }
  return tape.mean(tape.concat_rows(losses));
}

KMeans2Result kmeans2(const Tensor& points, const ContrastiveConfig& cfg) {
  const int n = points.rows(), d = points.cols();
  if (n < 2) throw DegenerateConfig("kmeans2 needs at least 2 points");

  auto dist2 = [&](int i, const Tensor& c, int crow) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = points.at(i, j) - c.at(crow, j);
      s += diff * diff;
    }
    return s;
  };
  auto point_dist2 = [&](int i, int j) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = points.at(i, k) - points.at(j, k);
      s += diff * diff;
    }
    return s;
  };

  // Deterministic init: the pair at maximum distance (first such pair).
  int init_a = 0, init_b = 1;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dd = point_dist2(i, j);
      if (dd > best) {
        best = dd;
        init_a = i;
        init_b = j;
      }
    }
  }

  KMeans2Result result;
  if (best == 0.0) {
    result.all_points_identical = true;
    result.assignment.assign(n, 1);
    result.assignment[0] = 0;
    result.centroids = Tensor(2, d);
    for (int j = 0; j < d; ++j) {
      result.centroids.at(0, j) = points.at(0, j);
      result.centroids.at(1, j) = points.at(0, j);
    }
    return result;
  }

  Tensor centroids(2, d);
  for (int j = 0; j < d; ++j) {
    centroids.at(0, j) = points.at(init_a, j);
    centroids.at(1, j) = points.at(init_b, j);
  }

  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < cfg.kmeans_iters; ++iter) {
    std::vector<int> next(n);
    for (int i = 0; i < n; ++i) {
      next[i] = dist2(i, centroids, 0) <= dist2(i, centroids, 1) ? 0 : 1;
    }
    // Reseed an emptied cluster with the point farthest from the survivor.
    for (int c = 0; c < 2; ++c) {
      if (std::count(next.begin(), next.end(), c) == 0) {
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double dd = dist2(i, centroids, 1 - c);
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        next[far] = c;
      }
    }
    const bool stable = next == assignment;
    assignment = std::move(next);
    centroids = Tensor(2, d);
    int counts[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      counts[assignment[i]]++;
      for (int j = 0; j < d; ++j)
        centroids.at(assignment[i], j) += points.at(i, j);
    }
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < d; ++j) centroids.at(c, j) /= counts[c];
    if (stable) break;
  }
  result.assignment = std::move(assignment);
  result.centroids = std::move(centroids);
  return result;
}

Var proto_contrastive_reg(Tape& tape, Var protos, const ContrastiveConfig& cfg,
                          int* skipped_anchors) {
  const Tensor& values = tape.value(protos);
  const int total = values.rows();
  if (total < 2)
    throw DegenerateConfig("regression contrastive loss needs at least 2 prototypes");
  check_prototypes_nonzero(values);

  const KMeans2Result clusters = kmeans2(values, cfg);
  int cluster_size[2] = {0, 0};
  for (int a : clusters.assignment) cluster_size[a]++;

  const auto sims = exp_sim_matrix(tape, protos, total, cfg.tau);

  std::vector<Var> losses;
  int skipped = 0;
  for (int anchor = 0; anchor < total; ++anchor) {
    const int my_cluster = clusters.assignment[anchor];
    if (cluster_size[my_cluster] < 2) {
      // Singleton cluster: the positive set is empty, skip the anchor.
      ++skipped;
      continue;
    }
    std::vector<int> positives;
    for (int j = 0; j < total; ++j) {
      if (j != anchor && clusters.assignment[j] == my_cluster)
        positives.push_back(j);
    }
    std::vector<int> den_set;
    for (int j = 0; j < total; ++j) {
      if (cfg.exclude_anchor && j == anchor) continue;
      den_set.push_back(j);
    }
    losses.push_back(anchor_loss(tape, sims, anchor, positives, den_set));
  }
  if (skipped_anchors) *skipped_anchors = skipped;
  if (losses.empty()) return tape.constant(Tensor::scalar(0.0));
  return tape.mean(tape.concat_rows(losses));
}

Var total_loss(Tape& tape, Var align, Var pred, Var proto,
               const LossWeights& weights) {
  Var weighted = tape.add(tape.mul_scalar(align, weights.align),
                          tape.mul_scalar(pred, weights.pred));
  return tape.add(weighted, tape.mul_scalar(proto, weights.proto));
}

}  // namespace protomol
