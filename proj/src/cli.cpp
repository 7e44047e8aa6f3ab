#include "protomol/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "protomol/checkpoint.hpp"
#include "protomol/errors.hpp"

namespace protomol {

namespace {

// Shortest round-trip formatting, consistent across the CSV emitters.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile("cannot write history CSV '" + path + "'");
  out << "epoch,train_loss,val_metric,lr\n";
  for (const EpochStats& e : history) {
    out << e.epoch << ',' << format_double(e.train_loss) << ','
        << format_double(e.val_metric) << ',' << format_double(e.lr) << '\n';
  }
}

std::vector<DatasetRecord> select_split(const std::vector<DatasetRecord>& records,
                                        const Model& model,
                                        const std::string& split) {
  if (split == "all") return records;
  const SplitIndices idx =
      split_dataset(records, model.config.task_kind, model.config.seed);
  const std::vector<int>* chosen = nullptr;
  if (split == "train") chosen = &idx.train;
  if (split == "valid") chosen = &idx.valid;
  if (split == "test") chosen = &idx.test;
  if (!chosen) throw ConfigError("unknown split '" + split + "'");
  std::vector<DatasetRecord> out;
  out.reserve(chosen->size());
  for (int i : *chosen) out.push_back(records[i]);
  return out;
}

}  // namespace

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path) {
  try {
    const TrainConfig config = parse_config_file(config_path);
    const Dataset data = load_dataset(data_path, config.task_kind);
    std::cerr << "skipped=" << data.skipped << "\n";

    const TrainResult result = train(config, data.records);
    save_checkpoint(out_path, result.model, result.history);
    write_history_csv(out_path + ".history.csv", result.history);
    std::cout << "val_metric=" << format_double(result.best_val_metric) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& out_path, const std::string& split) {
  try {
    const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    const Dataset data =
        load_dataset(data_path, ckpt.model.config.task_kind);
    std::cerr << "skipped=" << data.skipped << "\n";
    const std::vector<DatasetRecord> records =
        select_split(data.records, ckpt.model, split);

    const EvalReport report = evaluate(ckpt.model, records);
    std::cout << "metric=" << format_double(report.metric) << "\n";

    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw UnreadableFile("cannot write predictions CSV '" + out_path + "'");
      out << "sample_id,target,prediction\n";
      for (size_t i = 0; i < report.predictions.size(); ++i) {
        out << i << ',' << format_double(report.targets[i]) << ','
            << format_double(report.predictions[i]) << '\n';
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_inspect_prototypes(const std::string& checkpoint_path,
                           const std::string& data_path,
                           const std::string& out_path) {
  try {
    const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    const Dataset data = load_dataset(data_path, ckpt.model.config.task_kind);
    std::cerr << "skipped=" << data.skipped << "\n";

    std::ofstream out(out_path);
    if (!out)
      throw UnreadableFile("cannot write activations CSV '" + out_path + "'");
    out << "sample_id,modality,flat_index,class,proto_index,activation_strength\n";
    const int per_class = ckpt.model.config.protos_per_class;
    for (size_t s = 0; s < data.records.size(); ++s) {
      const SampleActivations act =
          prototype_activations(ckpt.model, data.records[s]);
      auto emit = [&](const char* modality, const std::vector<int>& support,
                      const std::vector<double>& probs) {
        for (size_t k = 0; k < support.size(); ++k) {
          const int flat = support[k];
          out << s << ',' << modality << ',' << flat << ',' << flat / per_class
              << ',' << flat % per_class << ',' << format_double(probs[k])
              << '\n';
        }
      };
      emit("graph", act.graph_support, act.graph_probs);
      emit("text", act.text_support, act.text_probs);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace protomol
