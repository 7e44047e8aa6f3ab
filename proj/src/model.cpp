#include "protomol/model.hpp"

#include <cmath>

#include "protomol/errors.hpp"

namespace protomol {

Model Model::init(const TrainConfig& config, Vocabulary vocab) {
  config.validate();
  Model m;
  m.config = config;
  m.vocab = std::move(vocab);
  m.graph_enc = init_graph_encoder(atom_feature_dim(), config.graph_dim,
                                   config.layers, config.seed);
  m.text_enc = init_text_encoder(m.vocab.size(), config.text_dim, config.layers,
                                 config.seed);
  m.fusion = init_fusion(config.graph_dim, config.text_dim, config.layers,
                         config.seed);
  m.proto_space = init_prototype_space(
      config.graph_dim, config.text_dim, config.proto_dim, config.classes,
      config.protos_per_class, config.top_k, config.sim_eps, config.seed,
      "proto");
  if (config.no_up) {
    m.text_proto_space = init_prototype_space(
        config.graph_dim, config.text_dim, config.proto_dim, config.classes,
        config.protos_per_class, config.top_k, config.sim_eps, config.seed,
        "proto_text");
  }
  m.heads = init_heads(config.graph_dim, config.head_out_dim(), config.layers);
  return m;
}

namespace {

template <typename TensorPtr, typename ModelT>
std::vector<std::pair<std::string, TensorPtr>> collect_params(ModelT& m) {
  std::vector<std::pair<std::string, TensorPtr>> out;
  auto mlp = [&](const std::string& prefix, auto& p) {
    out.emplace_back(prefix + ".w1", &p.w1);
    out.emplace_back(prefix + ".b1", &p.b1);
    out.emplace_back(prefix + ".w2", &p.w2);
    out.emplace_back(prefix + ".b2", &p.b2);
  };
  auto proto = [&](const std::string& prefix, auto& p) {
    out.emplace_back(prefix + ".anchors", &p.protos);
    out.emplace_back(prefix + ".w_g2p", &p.w_g2p);
    out.emplace_back(prefix + ".b_g", &p.b_g);
    out.emplace_back(prefix + ".w_t2p", &p.w_t2p);
    out.emplace_back(prefix + ".b_t", &p.b_t);
  };

  mlp("graph_encoder.init_mlp", m.graph_enc.init_mlp);
  for (size_t l = 0; l < m.graph_enc.layer_mlps.size(); ++l)
    mlp("graph_encoder.layer" + std::to_string(l), m.graph_enc.layer_mlps[l]);

  out.emplace_back("text_encoder.embedding", &m.text_enc.embedding);
  for (size_t l = 0; l < m.text_enc.blocks.size(); ++l)
    mlp("text_encoder.block" + std::to_string(l), m.text_enc.blocks[l]);

  for (size_t l = 0; l < m.fusion.w_g2t.size(); ++l)
    out.emplace_back("fusion.layer" + std::to_string(l) + ".w_g2t",
                     &m.fusion.w_g2t[l]);
  for (size_t l = 0; l < m.fusion.w_t2g.size(); ++l)
    out.emplace_back("fusion.layer" + std::to_string(l) + ".w_t2g",
                     &m.fusion.w_t2g[l]);

  proto("proto", m.proto_space);
  if (m.text_proto_space.has_value()) proto("proto_text", *m.text_proto_space);

  for (size_t l = 0; l < m.heads.w.size(); ++l)
    out.emplace_back("heads.layer" + std::to_string(l) + ".w", &m.heads.w[l]);
  for (size_t l = 0; l < m.heads.b.size(); ++l)
    out.emplace_back("heads.layer" + std::to_string(l) + ".b", &m.heads.b[l]);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> Model::named_params() {
  return collect_params<Tensor*>(*this);
}

std::vector<std::pair<std::string, const Tensor*>> Model::named_params() const {
  return collect_params<const Tensor*>(*this);
}

LossWeights Model::effective_weights() const {
  LossWeights w;
  w.align = (config.no_al || config.no_up) ? 0.0 : config.lambda_align;
  w.pred = config.no_cl ? 0.0 : config.lambda_pred;
  w.proto = config.no_pr ? 0.0 : config.lambda_proto;
  return w;
}

ModelVars bind_model(Tape& tape, const Model& model) {
  // Leaf creation order here must mirror named_params.
  const int first = tape.size();
  ModelVars v;
  v.graph_enc = bind_graph_encoder(tape, model.graph_enc);
  v.text_enc = bind_text_encoder(tape, model.text_enc);
  v.fusion = bind_fusion(tape, model.fusion);
  v.proto_space = bind_prototype_space(tape, model.proto_space);
  if (model.text_proto_space.has_value())
    v.text_proto_space = bind_prototype_space(tape, *model.text_proto_space);
  v.heads = bind_heads(tape, model.heads);
  const int last = tape.size();
  v.param_leaves.reserve(last - first);
  for (int i = first; i < last; ++i) v.param_leaves.push_back(Var{i});
  return v;
}

PreparedSample prepare_sample(const DatasetRecord& record,
                              const Vocabulary& vocab) {
  PreparedSample s;
  s.graph = parse_smiles(record.smiles);
  s.features = featurize(s.graph);
  const std::string& text = record.description.empty()
                                ? generate_description(s.graph)
                                : record.description;
  s.token_ids = vocab.encode(text);
  s.target = record.target;
  return s;
}

SampleForward forward_sample(Tape& tape, const Model& model,
                             const ModelVars& vars,
                             const PreparedSample& sample) {
  Var features = tape.constant(sample.features);
  std::vector<Var> graph_layers =
      encode_graph(tape, sample.graph, features, vars.graph_enc);
  std::vector<Var> text_layers =
      encode_text(tape, sample.token_ids, vars.text_enc);

  auto [fused_g, fused_t] = fuse_all(tape, graph_layers, text_layers,
                                     vars.fusion, model.fusion_mode());

  Var agg_g = aggregate_layers(tape, fused_g);
  Var agg_t = aggregate_layers(tape, fused_t);

  SampleForward out;
  const PrototypeSpaceVars& gspace = vars.proto_space;
  const PrototypeSpaceVars& tspace =
      vars.text_proto_space.has_value() ? *vars.text_proto_space : vars.proto_space;
  out.graph_dist =
      proto_pipeline(tape, agg_g, gspace.w_g2p, gspace.b_g, gspace);
  out.text_dist =
      proto_pipeline(tape, agg_t, tspace.w_t2p, tspace.b_t, tspace);

  if (model.config.no_up) {
    // Separate spaces: the distributions live in different spaces, so the
    // cross-modal divergence is dropped.
    out.align_loss = tape.constant(Tensor::scalar(0.0));
  } else {
    out.align_loss = alignment_loss(tape, out.graph_dist, out.text_dist);
  }

  out.prediction = predict(tape, fused_g, vars.heads);
  if (model.config.task_kind == TaskKind::Classification) {
    out.pred_loss =
        ce_loss(tape, out.prediction, static_cast<int>(sample.target));
  } else {
    const double standardized =
        (sample.target - model.target_mean) / model.target_std;
    out.pred_loss = mse_loss(tape, out.prediction, standardized);
  }
  return out;
}

Var proto_loss(Tape& tape, const Model& model, Var protos,
               int* skipped_anchors) {
  ContrastiveConfig cfg;
  cfg.tau = model.config.tau;
  cfg.kmeans_iters = model.config.kmeans_iters;
  cfg.kmeans_seed = model.config.kmeans_seed;
  cfg.exclude_anchor = model.config.contrastive_exclude_anchor;
  if (model.config.task_kind == TaskKind::Classification) {
    return proto_contrastive_cls(tape, protos, model.config.classes,
                                 model.config.protos_per_class, cfg);
  }
  return proto_contrastive_reg(tape, protos, cfg, skipped_anchors);
}

}  // namespace protomol
