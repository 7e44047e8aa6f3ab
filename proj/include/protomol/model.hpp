#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "protomol/config.hpp"
#include "protomol/fusion.hpp"
#include "protomol/graph_encoder.hpp"
#include "protomol/objectives.hpp"
#include "protomol/prototypes.hpp"
#include "protomol/text_encoder.hpp"

namespace protomol {

// All learnable state of one run plus the frozen preprocessing state
// (vocabulary, regression target scaling).
struct Model {
  TrainConfig config;
  Vocabulary vocab;
  GraphEncoderParams graph_enc;
  TextEncoderParams text_enc;
  FusionParams fusion;
  PrototypeSpaceParams proto_space;
  // Present only under the separate-prototype-spaces ablation.
  std::optional<PrototypeSpaceParams> text_proto_space;
  PredictionHeadsParams heads;

  // Regression targets are standardized on the training split; these undo
  // the scaling at prediction time. Identity for classification.
  double target_mean = 0.0;
  double target_std = 1.0;

  static Model init(const TrainConfig& config, Vocabulary vocab);

  // Trainable tensors in a fixed traversal order; this order defines the
  // gradient layout and must match bind_model's leaf order.
  std::vector<std::pair<std::string, Tensor*>> named_params();
  std::vector<std::pair<std::string, const Tensor*>> named_params() const;

  FusionMode fusion_mode() const {
    if (config.no_ca) return FusionMode::Off;
    if (config.final_layer_only_ca) return FusionMode::FinalLayerOnly;
    return FusionMode::Full;
  }

  // Effective loss weights after ablation flags.
  LossWeights effective_weights() const;
};

struct ModelVars {
  GraphEncoderVars graph_enc;
  TextEncoderVars text_enc;
  FusionVars fusion;
  PrototypeSpaceVars proto_space;
  std::optional<PrototypeSpaceVars> text_proto_space;
  PredictionHeadsVars heads;
  // Leaves in named_params order.
  std::vector<Var> param_leaves;
};

ModelVars bind_model(Tape& tape, const Model& model);

// Parse/featurize/tokenize once per record.
struct PreparedSample {
  MolecularGraph graph;
  Tensor features;
  std::vector<int> token_ids;
  double target = 0.0;  // raw target (label or regression value)
};

PreparedSample prepare_sample(const DatasetRecord& record, const Vocabulary& vocab);

// Per-sample forward pass through both branches, fusion, and the prototype
// space.
struct SampleForward {
  Var prediction;  // 1 x C logits, or 1 x 1 standardized output
  Var pred_loss;   // cross-entropy or squared error
  Var align_loss;  // KL between modality distributions (constant 0 w/o UP)
  ProtoDistribution graph_dist;
  ProtoDistribution text_dist;
};

SampleForward forward_sample(Tape& tape, const Model& model,
                             const ModelVars& vars,
                             const PreparedSample& sample);

// Batch-level prototype contrastive loss; depends only on the prototype
// tensors, never on samples. skipped_anchors reports regression anchors
// without positives.
Var proto_loss(Tape& tape, const Model& model, Var protos,
               int* skipped_anchors = nullptr);

}  // namespace protomol
