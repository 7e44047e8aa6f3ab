#pragma once

#include <string>

#include "protomol/trainer.hpp"

namespace protomol {

// JSON checkpoint: {format_version, config, vocabulary, tensors, history}.
// Tensors are stored as {shape: [rows, cols], data: [f64...]}; the regression
// target scaling travels as the extra tensor "target_scaler" of shape [1, 2].
// Keys are emitted sorted, so save -> load -> save is byte-identical.
inline constexpr int kCheckpointFormatVersion = 1;

std::string checkpoint_to_json(const Model& model,
                               const std::vector<EpochStats>& history);

struct LoadedCheckpoint {
  Model model;
  std::vector<EpochStats> history;
};

LoadedCheckpoint checkpoint_from_json(const std::string& json_text);

void save_checkpoint(const std::string& path, const Model& model,
                     const std::vector<EpochStats>& history);
LoadedCheckpoint load_checkpoint(const std::string& path);

// Best validation epoch recoverable from the stored history: highest
// val_metric for classification, lowest for regression; earliest on ties.
// Returns 0 for an empty history.
int best_epoch_in_history(const std::vector<EpochStats>& history, TaskKind kind);

}  // namespace protomol
