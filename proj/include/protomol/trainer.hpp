#pragma once

#include <cstdint>
#include <vector>

#include "protomol/model.hpp"

namespace protomol {

struct SplitIndices {
  std::vector<int> train, valid, test;
};

// 80/10/10 split, stratified per class for classification, plain shuffled
// for regression. Fractional remainders go to train. Deterministic in the
// seed; throws TooFewRecords below 10 records.
SplitIndices split_dataset(const std::vector<DatasetRecord>& records,
                           TaskKind kind, uint64_t seed);

struct AdamState {
  std::vector<Tensor> m, v;  // moments, mirroring the parameter shapes
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay (param *= 1 - lr*wd) followed by a bias-corrected
// Adam update.
void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr_t, double weight_decay);

// 0.5 * lr0 * (1 + cos(pi * step / total)).
double cosine_lr(long step, long total_steps, double lr0);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochStats> history;
  int best_epoch = 0;  // 1-based; 0 when epochs == 0
  double best_val_metric = 0.0;
};

// Full training run: split, vocabulary build, seeded shuffling, per-batch
// forward/backward on independent tapes, Adam with the cosine schedule, and
// best-validation-epoch selection.
TrainResult train(const TrainConfig& config,
                  const std::vector<DatasetRecord>& records);

struct EvalReport {
  double metric = 0.0;  // ROC-AUC (classification) or RMSE (regression)
  std::vector<double> predictions;  // per sample, raw units
  std::vector<double> targets;
};

EvalReport evaluate(const Model& model,
                    const std::vector<DatasetRecord>& records);

// Per-sample prototype distributions for the inspection dump.
struct SampleActivations {
  std::vector<int> graph_support;
  std::vector<double> graph_probs;
  std::vector<int> text_support;
  std::vector<double> text_probs;
};

SampleActivations prototype_activations(const Model& model,
                                        const DatasetRecord& record);

// Worker cap from PROTOMOL_THREADS; 0 (or unset) means serial.
int worker_count();

// Mean gradient of the per-sample losses over a batch plus the once-per-batch
// prototype term, in named_params order. Exposed for the serial/parallel
// equivalence tests and the benchmark; parallel evaluation over samples is
// blocked and reduced in sample order, so the result is identical for any
// worker count.
struct BatchGradients {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

BatchGradients batch_gradients(const Model& model,
                               const std::vector<PreparedSample>& batch,
                               int workers);

}  // namespace protomol
