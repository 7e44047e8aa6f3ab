#pragma once

#include <cstdint>
#include <string>

#include "protomol/molgraph.hpp"

namespace protomol {

// Every knob of a run. Defaults follow the reference recipe (Adam 8e-5,
// weight decay 1e-4, cosine schedule, 100 epochs, batch 128, loss weights
// 0.9, five prototypes per class with top-5 retention) with desk-scale
// widths.
struct TrainConfig {
  TaskKind task_kind = TaskKind::Classification;
  int layers = 3;
  int graph_dim = 64;
  int text_dim = 64;
  int proto_dim = 64;
  int classes = 2;  // 1 for regression
  int protos_per_class = 5;
  int top_k = 5;
  double sim_eps = 1e-4;
  double tau = 0.5;
  double lambda_align = 0.9;
  double lambda_pred = 0.9;
  double lambda_proto = 0.9;
  double lr = 8e-5;
  double weight_decay = 1e-4;
  int epochs = 100;
  int batch_size = 128;
  uint64_t seed = 1;

  // Ablation switches.
  bool no_ca = false;                // drop cross-modal fusion entirely
  bool final_layer_only_ca = false;  // fuse only at the last layer
  bool no_up = false;                // independent prototype spaces per modality
  bool no_al = false;                // zero the alignment weight
  bool no_cl = false;                // zero the supervised weight
  bool no_pr = false;                // zero the prototype-contrastive weight

  bool contrastive_exclude_anchor = false;
  int kmeans_iters = 50;
  uint64_t kmeans_seed = 0;

  int head_out_dim() const {
    return task_kind == TaskKind::Classification ? classes : 1;
  }

  void validate() const;  // throws ConfigError
};

// INI-style `key = value` lines with `#` comments. Unknown keys are an
// error naming the key.
TrainConfig parse_config_text(const std::string& text);
TrainConfig parse_config_file(const std::string& path);

}  // namespace protomol
