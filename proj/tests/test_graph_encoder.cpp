#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "protomol/errors.hpp"
#include "protomol/grad_check.hpp"
#include "protomol/graph_encoder.hpp"

using namespace protomol;

namespace {

Mlp2 zero_mlp(int in, int out) {
  Mlp2 p;
  p.w1 = Tensor(in, out);
  p.b1 = Tensor(1, out);
  p.w2 = Tensor(out, out);
  p.b2 = Tensor(1, out);
  return p;
}

// Passes positive inputs through unchanged: w1 = w2 = I, zero biases.
Mlp2 identity_mlp(int dim) {
  Mlp2 p = zero_mlp(dim, dim);
  for (int i = 0; i < dim; ++i) {
    p.w1.at(i, i) = 1.0;
    p.w2.at(i, i) = 1.0;
  }
  return p;
}

}  // namespace

TEST_CASE("init embed with zero params is zero") {
  const MolecularGraph g = parse_smiles("CCO");
  Tape t;
  Mlp2Vars mlp = bind_mlp2(t, zero_mlp(atom_feature_dim(), 4));
  Var h = init_atom_embed(t, t.constant(featurize(g)), mlp);
  const Tensor& hv = t.value(h);
  CHECK(hv.rows() == 3);
  CHECK(hv.cols() == 4);
  for (int i = 0; i < hv.size(); ++i) CHECK(hv[i] == 0.0);
}

TEST_CASE("init embed with identity-like params reproduces positive features") {
  const int d = atom_feature_dim();
  const MolecularGraph g = parse_smiles("CCO");
  const Tensor x = featurize(g);
  Tape t;
  Mlp2Vars mlp = bind_mlp2(t, identity_mlp(d));
  const Tensor& h = t.value(init_atom_embed(t, t.constant(x), mlp));
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] >= 0.0) CHECK(h[i] == x[i]);
  }
}

TEST_CASE("init embed produces one vector per atom") {
  Rng rng(5, "test.init-embed");
  const MolecularGraph g = parse_smiles("CCO");
  Tape t;
  Mlp2Vars mlp = bind_mlp2(t, init_mlp2(atom_feature_dim(), 8, 8, rng));
  const Tensor& h = t.value(init_atom_embed(t, t.constant(featurize(g)), mlp));
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 8);
  CHECK_THROWS_AS(
      init_atom_embed(t, t.constant(Tensor(3, atom_feature_dim() + 1)), mlp),
      ShapeMismatch);
}

TEST_CASE("gin update on an edge sums neighbor states") {
  const MolecularGraph g = parse_smiles("CC");
  Tape t;
  Var h = t.leaf(Tensor(2, 1, {1.0, 2.0}));
  Mlp2Vars mlp = bind_mlp2(t, identity_mlp(1));
  const Tensor& out = t.value(gin_layer(t, h, g, mlp, 0.0));
  CHECK(out.at(0, 0) == 3.0);  // 1 + 2
  CHECK(out.at(1, 0) == 3.0);  // 2 + 1
}

TEST_CASE("isolated atom aggregates only itself") {
  const MolecularGraph g = parse_smiles("C");
  Tape t;
  Var h = t.leaf(Tensor(1, 1, {5.0}));
  Mlp2Vars mlp = bind_mlp2(t, identity_mlp(1));
  CHECK(t.value(gin_layer(t, h, g, mlp, 0.0)).at(0, 0) == 5.0);
}

TEST_CASE("triangle with unit states gives threes") {
  const MolecularGraph g = parse_smiles("C1CC1");
  Tape t;
  Var h = t.leaf(Tensor(3, 1, {1.0, 1.0, 1.0}));
  Mlp2Vars mlp = bind_mlp2(t, identity_mlp(1));
  const Tensor& out = t.value(gin_layer(t, h, g, mlp, 0.0));
  for (int v = 0; v < 3; ++v) CHECK(out.at(v, 0) == 3.0);  // self + 2 neighbors
}

TEST_CASE("readout is the mean over atoms") {
  Tape t;
  CHECK(t.value(readout_mean(t, t.leaf(Tensor(1, 1, {7.0}))))[0] == 7.0);
  Var two = t.leaf(Tensor(2, 1, {0.0, 2.0}));
  CHECK(t.value(readout_mean(t, two))[0] == 1.0);
}

TEST_CASE("encode_graph shape contract") {
  const MolecularGraph g = parse_smiles("CCO");
  GraphEncoderParams params =
      init_graph_encoder(atom_feature_dim(), 8, 3, /*seed=*/2);
  Tape t;
  GraphEncoderVars vars = bind_graph_encoder(t, params);
  const std::vector<Var> layers =
      encode_graph(t, g, t.constant(featurize(g)), vars);
  REQUIRE(layers.size() == 3);
  for (Var l : layers) {
    CHECK(t.value(l).rows() == 1);
    CHECK(t.value(l).cols() == 8);
  }
}

TEST_CASE("all-zero params give all-zero layers") {
  const MolecularGraph g = parse_smiles("CCO");
  GraphEncoderParams params;
  params.init_mlp = zero_mlp(atom_feature_dim(), 4);
  params.layer_mlps = {zero_mlp(4, 4), zero_mlp(4, 4)};
  Tape t;
  GraphEncoderVars vars = bind_graph_encoder(t, params);
  for (Var l : encode_graph(t, g, t.constant(featurize(g)), vars)) {
    for (int i = 0; i < t.value(l).size(); ++i) CHECK(t.value(l)[i] == 0.0);
  }
}

TEST_CASE("permutation invariance of encode_graph") {
  // CCO and OCC are the same molecule with atoms relabeled.
  const MolecularGraph a = parse_smiles("CCO");
  const MolecularGraph b = parse_smiles("OCC");
  GraphEncoderParams params =
      init_graph_encoder(atom_feature_dim(), 8, 3, /*seed=*/3);
  Tape ta, tb;
  const std::vector<Var> za =
      encode_graph(ta, a, ta.constant(featurize(a)), bind_graph_encoder(ta, params));
  const std::vector<Var> zb =
      encode_graph(tb, b, tb.constant(featurize(b)), bind_graph_encoder(tb, params));
  for (size_t l = 0; l < za.size(); ++l) {
    for (int j = 0; j < 8; ++j) {
      CHECK(std::fabs(ta.value(za[l])[j] - tb.value(zb[l])[j]) <= 1e-12);
    }
  }
}

TEST_CASE("disconnected graph readout is the atom-weighted component mean") {
  const MolecularGraph whole = parse_smiles("CC.O");
  const MolecularGraph part1 = parse_smiles("CC");
  const MolecularGraph part2 = parse_smiles("O");
  GraphEncoderParams params =
      init_graph_encoder(atom_feature_dim(), 6, 2, /*seed=*/4);

  Tape tw, t1, t2;
  const auto zw = encode_graph(tw, whole, tw.constant(featurize(whole)),
                               bind_graph_encoder(tw, params));
  const auto z1 = encode_graph(t1, part1, t1.constant(featurize(part1)),
                               bind_graph_encoder(t1, params));
  const auto z2 = encode_graph(t2, part2, t2.constant(featurize(part2)),
                               bind_graph_encoder(t2, params));
  for (size_t l = 0; l < zw.size(); ++l) {
    for (int j = 0; j < 6; ++j) {
      const double expected =
          (2.0 * t1.value(z1[l])[j] + 1.0 * t2.value(z2[l])[j]) / 3.0;
      CHECK(tw.value(zw[l])[j] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("encoder gradients pass grad_check") {
  const MolecularGraph g = parse_smiles("CC(=O)O");
  const Tensor features = featurize(g);
  // Leaves: init MLP + one layer MLP, small dims to keep the sweep fast.
  auto f = [&](Tape& t, const std::vector<Var>& v) {
    Mlp2Vars init{v[0], v[1], v[2], v[3]};
    Mlp2Vars layer{v[4], v[5], v[6], v[7]};
    GraphEncoderVars vars;
    vars.init_mlp = init;
    vars.layer_mlps = {layer};
    vars.eps_gin = 0.0;
    const std::vector<Var> layers = encode_graph(t, g, t.constant(features), vars);
    return t.sum(t.mul(layers[0], layers[0]));
  };
  Rng rng(9, "test.graphenc-grad");
  const int d = atom_feature_dim(), h = 4;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Tensor> leaves;
    auto rnd = [&](int r, int c) {
      Tensor t(r, c);
      for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.8, 0.8);
      return t;
    };
    leaves.push_back(rnd(d, h));
    leaves.push_back(rnd(1, h));
    leaves.push_back(rnd(h, h));
    leaves.push_back(rnd(1, h));
    leaves.push_back(rnd(h, h));
    leaves.push_back(rnd(1, h));
    leaves.push_back(rnd(h, h));
    leaves.push_back(rnd(1, h));
    const GradCheckReport report = grad_check(f, leaves, 1e-6, 1e-4);
    CHECK(report.passed());
  }
}
