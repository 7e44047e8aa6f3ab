#include <string>

#include <CLI11.hpp>

#include "protomol/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"prototype-guided multimodal molecular property prediction"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, checkpoint_path;
  std::string split = "all";

  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "config file (key = value lines)")
      ->required();
  train->add_option("--data", data_path, "dataset CSV")->required();
  train->add_option("--out", out_path, "checkpoint output path")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
  eval->add_option("--data", data_path, "dataset CSV")->required();
  eval->add_option("--out", out_path, "predictions CSV output");
  eval->add_option("--split", split, "all|train|valid|test (default all)");

  CLI::App* inspect =
      app.add_subcommand("inspect-prototypes", "dump prototype activations");
  inspect->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")
      ->required();
  inspect->add_option("--data", data_path, "dataset CSV")->required();
  inspect->add_option("--out", out_path, "activations CSV output")->required();

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return protomol::cmd_train(config_path, data_path, out_path);
  if (eval->parsed())
    return protomol::cmd_eval(checkpoint_path, data_path, out_path, split);
  return protomol::cmd_inspect_prototypes(checkpoint_path, data_path, out_path);
}
