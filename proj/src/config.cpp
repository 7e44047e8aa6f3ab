#include "protomol/config.hpp"

#include <fstream>
#include <sstream>

#include "protomol/errors.hpp"

namespace protomol {

void TrainConfig::validate() const {
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (graph_dim < 1 || text_dim < 1 || proto_dim < 1)
    throw ConfigError("dimensions must be >= 1");
  if (task_kind == TaskKind::Classification && classes < 2)
    throw ConfigError("classification needs classes >= 2");
  if (task_kind == TaskKind::Regression && classes != 1)
    throw ConfigError("regression uses classes = 1");
  if (protos_per_class < 1) throw ConfigError("protos_per_class must be >= 1");
  if (top_k < 1 || top_k > classes * protos_per_class)
    throw ConfigError("top_k must be in [1, classes * protos_per_class]");
  if (sim_eps <= 0.0) throw ConfigError("sim_eps must be > 0");
  if (tau <= 0.0) throw ConfigError("tau must be > 0");
  if (lambda_align < 0.0 || lambda_pred < 0.0 || lambda_proto < 0.0)
    throw ConfigError("loss weights must be >= 0");
  if (lr <= 0.0) throw ConfigError("lr must be > 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (no_ca && final_layer_only_ca)
    throw ConfigError("no_ca and final_layer_only_ca are mutually exclusive");
  if (kmeans_iters < 1) throw ConfigError("kmeans_iters must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  const size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + value);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const double v = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const long v = std::stol(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for '" + key + "': " + value);
  }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const unsigned long long v = std::stoull(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for '" + key + "': " + value);
  }
}

void apply_key(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "task_kind") {
    if (value == "classification") {
      c.task_kind = TaskKind::Classification;
    } else if (value == "regression") {
      c.task_kind = TaskKind::Regression;
      c.classes = 1;
    } else {
      throw ConfigError("task_kind must be classification or regression");
    }
  } else if (key == "layers") {
    c.layers = parse_int(key, value);
  } else if (key == "graph_dim") {
    c.graph_dim = parse_int(key, value);
  } else if (key == "text_dim") {
    c.text_dim = parse_int(key, value);
  } else if (key == "proto_dim") {
    c.proto_dim = parse_int(key, value);
  } else if (key == "classes") {
    c.classes = parse_int(key, value);
  } else if (key == "protos_per_class") {
    c.protos_per_class = parse_int(key, value);
  } else if (key == "top_k") {
    c.top_k = parse_int(key, value);
  } else if (key == "sim_eps") {
    c.sim_eps = parse_double(key, value);
  } else if (key == "tau") {
    c.tau = parse_double(key, value);
  } else if (key == "lambda_align") {
    c.lambda_align = parse_double(key, value);
  } else if (key == "lambda_pred") {
    c.lambda_pred = parse_double(key, value);
  } else if (key == "lambda_proto") {
    c.lambda_proto = parse_double(key, value);
  } else if (key == "lr") {
    c.lr = parse_double(key, value);
  } else if (key == "weight_decay") {
    c.weight_decay = parse_double(key, value);
  } else if (key == "epochs") {
    c.epochs = parse_int(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_int(key, value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "no_ca") {
    c.no_ca = parse_bool(key, value);
  } else if (key == "final_layer_only_ca") {
    c.final_layer_only_ca = parse_bool(key, value);
  } else if (key == "no_up") {
    c.no_up = parse_bool(key, value);
  } else if (key == "no_al") {
    c.no_al = parse_bool(key, value);
  } else if (key == "no_cl") {
    c.no_cl = parse_bool(key, value);
  } else if (key == "no_pr") {
    c.no_pr = parse_bool(key, value);
  } else if (key == "contrastive_exclude_anchor") {
    c.contrastive_exclude_anchor = parse_bool(key, value);
  } else if (key == "kmeans_iters") {
    c.kmeans_iters = parse_int(key, value);
  } else if (key == "kmeans_seed") {
    c.kmeans_seed = parse_u64(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    apply_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace protomol
