#include "protomol/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "protomol/errors.hpp"

namespace protomol {

using nlohmann::json;

namespace {

json config_to_json(const TrainConfig& c) {
  json j;
  j["task_kind"] =
      c.task_kind == TaskKind::Classification ? "classification" : "regression";
  j["layers"] = c.layers;
  j["graph_dim"] = c.graph_dim;
  j["text_dim"] = c.text_dim;
  j["proto_dim"] = c.proto_dim;
  j["classes"] = c.classes;
  j["protos_per_class"] = c.protos_per_class;
  j["top_k"] = c.top_k;
  j["sim_eps"] = c.sim_eps;
  j["tau"] = c.tau;
  j["lambda_align"] = c.lambda_align;
  j["lambda_pred"] = c.lambda_pred;
  j["lambda_proto"] = c.lambda_proto;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["no_ca"] = c.no_ca;
  j["final_layer_only_ca"] = c.final_layer_only_ca;
  j["no_up"] = c.no_up;
  j["no_al"] = c.no_al;
  j["no_cl"] = c.no_cl;
  j["no_pr"] = c.no_pr;
  j["contrastive_exclude_anchor"] = c.contrastive_exclude_anchor;
  j["kmeans_iters"] = c.kmeans_iters;
  j["kmeans_seed"] = c.kmeans_seed;
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  const std::string kind = j.at("task_kind").get<std::string>();
  if (kind == "classification") {
    c.task_kind = TaskKind::Classification;
  } else if (kind == "regression") {
    c.task_kind = TaskKind::Regression;
  } else {
    throw CheckpointError("unknown task_kind '" + kind + "'");
  }
  c.layers = j.at("layers").get<int>();
  c.graph_dim = j.at("graph_dim").get<int>();
  c.text_dim = j.at("text_dim").get<int>();
  c.proto_dim = j.at("proto_dim").get<int>();
  c.classes = j.at("classes").get<int>();
  c.protos_per_class = j.at("protos_per_class").get<int>();
  c.top_k = j.at("top_k").get<int>();
  c.sim_eps = j.at("sim_eps").get<double>();
  c.tau = j.at("tau").get<double>();
  c.lambda_align = j.at("lambda_align").get<double>();
  c.lambda_pred = j.at("lambda_pred").get<double>();
  c.lambda_proto = j.at("lambda_proto").get<double>();
  c.lr = j.at("lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.no_ca = j.at("no_ca").get<bool>();
  c.final_layer_only_ca = j.at("final_layer_only_ca").get<bool>();
  c.no_up = j.at("no_up").get<bool>();
  c.no_al = j.at("no_al").get<bool>();
  c.no_cl = j.at("no_cl").get<bool>();
  c.no_pr = j.at("no_pr").get<bool>();
  c.contrastive_exclude_anchor = j.at("contrastive_exclude_anchor").get<bool>();
  c.kmeans_iters = j.at("kmeans_iters").get<int>();
  c.kmeans_seed = j.at("kmeans_seed").get<uint64_t>();
  return c;
}

json tensor_to_json(const Tensor& t) {
  json j;
  j["shape"] = {t.rows(), t.cols()};
  j["data"] = t.data();
  return j;
}

Tensor tensor_from_json(const json& j, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() != 2)
    throw CheckpointError("tensor '" + name + "' must have a rank-2 shape");
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (data.size() != size_t(shape[0]) * size_t(shape[1]))
    throw CheckpointError("tensor '" + name + "' data does not match shape");
  return Tensor(shape[0], shape[1], std::move(data));
}

}  // namespace

std::string checkpoint_to_json(const Model& model,
                               const std::vector<EpochStats>& history) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["config"] = config_to_json(model.config);
  j["vocabulary"] = model.vocab.map();

  json tensors;
  for (const auto& [name, tensor] : model.named_params())
    tensors[name] = tensor_to_json(*tensor);
  tensors["target_scaler"] =
      tensor_to_json(Tensor(1, 2, {model.target_mean, model.target_std}));
  j["tensors"] = std::move(tensors);

  json hist = json::array();
  for (const EpochStats& e : history) {
    hist.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_metric", e.val_metric},
                    {"lr", e.lr}});
  }
  j["history"] = std::move(hist);
  return j.dump();
}

LoadedCheckpoint checkpoint_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("invalid checkpoint JSON: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw CheckpointError("unsupported checkpoint format_version " +
                            std::to_string(version));

    LoadedCheckpoint out;
    const TrainConfig config = config_from_json(j.at("config"));
    std::map<std::string, int> vocab_map;
    for (const auto& [token, id] : j.at("vocabulary").items())
      vocab_map[token] = id.get<int>();

    out.model = Model::init(config, Vocabulary::from_map(std::move(vocab_map)));

    const json& tensors = j.at("tensors");
    for (auto& [name, tensor] : out.model.named_params()) {
      if (!tensors.contains(name))
        throw CheckpointError("checkpoint is missing tensor '" + name + "'");
      Tensor loaded = tensor_from_json(tensors.at(name), name);
      if (!loaded.same_shape(*tensor))
        throw CheckpointError("tensor '" + name +
                              "' shape is inconsistent with the config");
      *tensor = std::move(loaded);
    }
    if (!tensors.contains("target_scaler"))
      throw CheckpointError("checkpoint is missing tensor 'target_scaler'");
    const Tensor scaler =
        tensor_from_json(tensors.at("target_scaler"), "target_scaler");
    if (scaler.rows() != 1 || scaler.cols() != 2)
      throw CheckpointError("target_scaler must have shape [1, 2]");
    out.model.target_mean = scaler[0];
    out.model.target_std = scaler[1];

    for (const json& e : j.at("history")) {
      EpochStats s;
      s.epoch = e.at("epoch").get<int>();
      s.train_loss = e.at("train_loss").get<double>();
      s.val_metric = e.at("val_metric").get<double>();
      s.lr = e.at("lr").get<double>();
      out.history.push_back(s);
    }
    return out;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Model& model,
                     const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableFile("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(model, history);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

int best_epoch_in_history(const std::vector<EpochStats>& history,
                          TaskKind kind) {
  int best = 0;
  for (const EpochStats& e : history) {
    if (best == 0) {
      best = e.epoch;
      continue;
    }
    const double current = history[best - 1].val_metric;
    const bool better = kind == TaskKind::Classification
                            ? e.val_metric > current
                            : e.val_metric < current;
    if (better) best = e.epoch;
  }
  return best;
}

}  // namespace protomol
