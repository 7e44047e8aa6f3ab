#include "protomol/trainer.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "protomol/errors.hpp"
#include "protomol/metrics.hpp"
#include "protomol/rng.hpp"

namespace protomol {

SplitIndices split_dataset(const std::vector<DatasetRecord>& records,
                           TaskKind kind, uint64_t seed) {
  const int n = static_cast<int>(records.size());
  if (n < 10) throw TooFewRecords("need at least 10 records to split");

  Rng rng(seed, "split");
  SplitIndices out;
  auto split_group = [&](std::vector<int>& indices) {
    rng.shuffle(indices);
    const int n_group = static_cast<int>(indices.size());
    const int n_valid = n_group / 10;
    const int n_test = n_group / 10;
    const int n_train = n_group - n_valid - n_test;
    for (int i = 0; i < n_group; ++i) {
      if (i < n_train) {
        out.train.push_back(indices[i]);
      } else if (i < n_train + n_valid) {
        out.valid.push_back(indices[i]);
      } else {
        out.test.push_back(indices[i]);
      }
    }
  };

  if (kind == TaskKind::Classification) {
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i)
      by_class[static_cast<int>(records[i].target)].push_back(i);
    for (auto& [label, indices] : by_class) split_group(indices);
  } else {
    std::vector<int> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    split_group(indices);
  }
  return out;
}

void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr_t, double weight_decay) {
  if (params.size() != grads.size())
    throw ShapeMismatch("adam_step: one gradient per parameter required");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    if (!p.same_shape(g)) throw ShapeMismatch("adam_step: gradient shape mismatch");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (int j = 0; j < p.size(); ++j) {
      p[j] *= 1.0 - lr_t * weight_decay;
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr_t * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double cosine_lr(long step, long total_steps, double lr0) {
  if (total_steps <= 0) return lr0;
  return 0.5 * lr0 *
         (1.0 + std::cos(3.14159265358979323846 * double(step) / double(total_steps)));
}

int worker_count() {
  const char* env = std::getenv("PROTOMOL_THREADS");
  if (!env) return 0;
  const int n = std::atoi(env);
  return n > 0 ? n : 0;
}

namespace {

// One sample's weighted loss and leaf gradients.
struct SampleGrads {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

SampleGrads sample_gradients(const Model& model, const PreparedSample& sample,
                             const LossWeights& weights) {
  Tape tape;
  ModelVars vars = bind_model(tape, model);
  SampleForward fwd = forward_sample(tape, model, vars, sample);
  Var loss = tape.add(tape.mul_scalar(fwd.pred_loss, weights.pred),
                      tape.mul_scalar(fwd.align_loss, weights.align));
  tape.backward(loss);
  SampleGrads out;
  out.loss = tape.value(loss)[0];
  out.grads.reserve(vars.param_leaves.size());
  for (Var leaf : vars.param_leaves) out.grads.push_back(tape.grad(leaf));
  return out;
}

// Fixed block width keeps the reduction order independent of the worker
// count, so any PROTOMOL_THREADS setting reproduces the serial result
// bitwise.
constexpr int kParallelBlock = 16;

}  // namespace

BatchGradients batch_gradients(const Model& model,
                               const std::vector<PreparedSample>& batch,
                               int workers) {
  const LossWeights weights = model.effective_weights();
  const auto named = model.named_params();
  const int num_samples = static_cast<int>(batch.size());

  BatchGradients out;
  out.grads.reserve(named.size());
  for (const auto& [name, tensor] : named)
    out.grads.emplace_back(tensor->rows(), tensor->cols());

  auto accumulate = [&](const SampleGrads& s) {
    out.loss += s.loss;
    for (size_t i = 0; i < out.grads.size(); ++i) {
      Tensor& dst = out.grads[i];
      const Tensor& src = s.grads[i];
      for (int j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  };

  if (workers <= 1) {
    for (int s = 0; s < num_samples; ++s)
      accumulate(sample_gradients(model, batch[s], weights));
  } else {
    for (int block = 0; block < num_samples; block += kParallelBlock) {
      const int block_end = std::min(block + kParallelBlock, num_samples);
      std::vector<SampleGrads> results(block_end - block);
#pragma omp parallel for num_threads(workers) schedule(dynamic)
      for (int s = block; s < block_end; ++s) {
        results[s - block] = sample_gradients(model, batch[s], weights);
      }
      for (const SampleGrads& r : results) accumulate(r);
    }
  }

  const double inv = 1.0 / double(num_samples);
  out.loss *= inv;
  for (Tensor& g : out.grads)
    for (int j = 0; j < g.size(); ++j) g[j] *= inv;

  // The prototype contrastive term is sample-independent; it enters once per
  // batch.
  {
    Tape tape;
    Var protos = tape.leaf(Tensor(model.proto_space.protos).set_requires_grad(true));
    Var loss = proto_loss(tape, model, protos);
    Var text_protos;
    if (model.text_proto_space.has_value()) {
      text_protos =
          tape.leaf(Tensor(model.text_proto_space->protos).set_requires_grad(true));
      // Independent spaces each contribute; keep the magnitude comparable to
      // the shared-space term by averaging.
      loss = tape.mul_scalar(
          tape.add(loss, proto_loss(tape, model, text_protos)), 0.5);
    }
    Var weighted = tape.mul_scalar(loss, weights.proto);
    tape.backward(weighted);
    out.loss += tape.value(weighted)[0];
    for (size_t i = 0; i < named.size(); ++i) {
      if (named[i].first == "proto.anchors") {
        const Tensor& g = tape.grad(protos);
        for (int j = 0; j < g.size(); ++j) out.grads[i][j] += g[j];
      } else if (named[i].first == "proto_text.anchors" && text_protos.valid()) {
        const Tensor& g = tape.grad(text_protos);
        for (int j = 0; j < g.size(); ++j) out.grads[i][j] += g[j];
      }
    }
  }
  return out;
}

namespace {

std::vector<PreparedSample> prepare_all(
    const std::vector<DatasetRecord>& records, const Vocabulary& vocab) {
  std::vector<PreparedSample> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) out.push_back(prepare_sample(r, vocab));
  return out;
}

EvalReport evaluate_prepared(const Model& model,
                             const std::vector<PreparedSample>& samples,
                             int workers) {
  const int n = static_cast<int>(samples.size());
  std::vector<double> scores(n), predictions(n), targets(n);

  auto eval_one = [&](int i) {
    Tape tape;
    ModelVars vars = bind_model(tape, model);
    SampleForward fwd = forward_sample(tape, model, vars, samples[i]);
    const Tensor& pred = tape.value(fwd.prediction);
    if (model.config.task_kind == TaskKind::Classification) {
      Tape scratch;  // softmax over the logits copied off the main tape
      Var probs = scratch.row_softmax(scratch.constant(pred));
      const int positive = model.config.classes > 1 ? 1 : 0;
      scores[i] = scratch.value(probs)[positive];
      predictions[i] = scores[i];
    } else {
      predictions[i] = pred[0] * model.target_std + model.target_mean;
    }
    targets[i] = samples[i].target;
  };

  if (workers <= 1) {
    for (int i = 0; i < n; ++i) eval_one(i);
  } else {
#pragma omp parallel for num_threads(workers) schedule(dynamic)
    for (int i = 0; i < n; ++i) eval_one(i);
  }

  EvalReport report;
  report.predictions = std::move(predictions);
  report.targets = std::move(targets);
  if (model.config.task_kind == TaskKind::Classification) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(targets[i]);
    report.metric = roc_auc(scores, labels);
  } else {
    report.metric = rmse(report.predictions, report.targets);
  }
  return report;
}

bool metric_improved(TaskKind kind, double candidate, double best) {
  return kind == TaskKind::Classification ? candidate > best : candidate < best;
}

}  // namespace

TrainResult train(const TrainConfig& config,
                  const std::vector<DatasetRecord>& records) {
  config.validate();
  const SplitIndices split = split_dataset(records, config.task_kind, config.seed);
  const int workers = worker_count();

  // Vocabulary and target scaling come from the training split only.
  std::vector<std::string> corpus;
  corpus.reserve(split.train.size());
  for (int i : split.train) corpus.push_back(records[i].description);
  Vocabulary vocab = Vocabulary::build(corpus);

  Model model = Model::init(config, std::move(vocab));
  if (config.task_kind == TaskKind::Regression) {
    double mean = 0.0;
    for (int i : split.train) mean += records[i].target;
    mean /= double(split.train.size());
    double var = 0.0;
    for (int i : split.train) {
      const double d = records[i].target - mean;
      var += d * d;
    }
    var /= double(split.train.size());
    model.target_mean = mean;
    model.target_std = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  std::vector<PreparedSample> all = prepare_all(records, model.vocab);
  std::vector<PreparedSample> valid_samples;
  for (int i : split.valid) valid_samples.push_back(all[i]);

  TrainResult result;
  result.best_val_metric =
      config.task_kind == TaskKind::Classification
          ? -std::numeric_limits<double>::infinity()
          : std::numeric_limits<double>::infinity();

  std::vector<int> train_order = split.train;
  Rng shuffle_rng(config.seed, "train.shuffle");

  const long batches_per_epoch =
      (long(train_order.size()) + config.batch_size - 1) / config.batch_size;
  const long total_steps = batches_per_epoch * config.epochs;

  auto params = model.named_params();
  std::vector<Tensor*> param_ptrs;
  for (auto& [name, tensor] : params) param_ptrs.push_back(tensor);
  AdamState adam;

  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(train_order);
    double epoch_loss = 0.0;
    double last_lr = 0.0;
    long batch_count = 0;
    for (size_t start = 0; start < train_order.size();
         start += config.batch_size) {
      const size_t end =
          std::min(start + config.batch_size, train_order.size());
      std::vector<PreparedSample> batch;
      batch.reserve(end - start);
      for (size_t i = start; i < end; ++i) batch.push_back(all[train_order[i]]);

      BatchGradients bg = batch_gradients(model, batch, workers);
      if (!std::isfinite(bg.loss)) {
        throw NonFiniteLoss("non-finite loss in epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_count));
      }
      const double lr_t = cosine_lr(step, total_steps, config.lr);
      adam_step(param_ptrs, bg.grads, adam, lr_t, config.weight_decay);
      epoch_loss += bg.loss;
      last_lr = lr_t;
      ++step;
      ++batch_count;
    }

    const EvalReport val = evaluate_prepared(model, valid_samples, workers);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / double(batch_count);
    stats.val_metric = val.metric;
    stats.lr = last_lr;
    result.history.push_back(stats);

    if (metric_improved(config.task_kind, val.metric, result.best_val_metric)) {
      result.best_val_metric = val.metric;
      result.best_epoch = epoch;
      result.model = model;  // snapshot of the best parameters
    }
  }

  if (config.epochs == 0 || result.best_epoch == 0) {
    result.model = model;
    if (!valid_samples.empty() && config.epochs == 0) {
      result.best_val_metric =
          evaluate_prepared(model, valid_samples, workers).metric;
    }
  }
  return result;
}

EvalReport evaluate(const Model& model,
                    const std::vector<DatasetRecord>& records) {
  return evaluate_prepared(model, prepare_all(records, model.vocab),
                           worker_count());
}

SampleActivations prototype_activations(const Model& model,
                                        const DatasetRecord& record) {
  Tape tape;
  ModelVars vars = bind_model(tape, model);
  SampleForward fwd =
      forward_sample(tape, model, vars, prepare_sample(record, model.vocab));
  SampleActivations out;
  out.graph_support = fwd.graph_dist.support;
  out.text_support = fwd.text_dist.support;
  const Tensor& gp = tape.value(fwd.graph_dist.support_probs);
  const Tensor& tp = tape.value(fwd.text_dist.support_probs);
  out.graph_probs.assign(gp.data().begin(), gp.data().end());
  out.text_probs.assign(tp.data().begin(), tp.data().end());
  return out;
}

}  // namespace protomol
