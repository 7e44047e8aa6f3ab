#pragma once

#include <string>

namespace protomol {

// Train a model from a config file and dataset CSV, writing the checkpoint
// JSON to out_path and the epoch history CSV to "<out_path>.history.csv".
// Prints val_metric=<v> on success. Returns the process exit code.
int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path);

// Evaluate a checkpoint on a dataset (optionally one of its splits), print
// metric=<v>, and write per-sample predictions to out_path when given.
// split: "all", "train", "valid", or "test".
int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& out_path, const std::string& split);

// Dump per-sample prototype activations for both modalities as CSV.
int cmd_inspect_prototypes(const std::string& checkpoint_path,
                           const std::string& data_path,
                           const std::string& out_path);

}  // namespace protomol
