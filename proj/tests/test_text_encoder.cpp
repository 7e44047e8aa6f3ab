#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "protomol/errors.hpp"
#include "protomol/grad_check.hpp"
#include "protomol/text_encoder.hpp"

using namespace protomol;

TEST_CASE("tokenize lowercases and strips punctuation") {
  const std::vector<std::string> toks = normalize_tokens("2 Carbon atoms");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == "2");
  CHECK(toks[1] == "carbon");
  CHECK(toks[2] == "atoms");
  const std::vector<std::string> punct = normalize_tokens("1 ring , aromatic!");
  REQUIRE(punct.size() == 3);
  CHECK(punct[2] == "aromatic");
}

TEST_CASE("tokenize is idempotent on normalized text") {
  const std::string text = "3 carbon atoms 1 rings";
  const auto once = normalize_tokens(text);
  std::string rejoined;
  for (size_t i = 0; i < once.size(); ++i)
    rejoined += (i ? " " : "") + once[i];
  CHECK(normalize_tokens(rejoined) == once);
}

TEST_CASE("vocabulary assigns dense sorted ids with 0 reserved") {
  Vocabulary v = Vocabulary::build({"carbon atoms", "oxygen atoms"});
  CHECK(v.size() == 4);  // unknown + {atoms, carbon, oxygen}
  CHECK(v.id("atoms") == 1);
  CHECK(v.id("carbon") == 2);
  CHECK(v.id("oxygen") == 3);
  CHECK(v.id("missing") == 0);
}

TEST_CASE("vocabulary build is reproducible") {
  const std::vector<std::string> corpus = {"b a c", "c d", "a"};
  Vocabulary v1 = Vocabulary::build(corpus);
  Vocabulary v2 = Vocabulary::build(corpus);
  CHECK(v1.map() == v2.map());
}

TEST_CASE("encode maps out-of-vocabulary to 0 and rejects empty text") {
  Vocabulary v = Vocabulary::build({"carbon atoms"});
  const std::vector<int> ids = v.encode("2 carbon atoms");
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == 0);  // "2" unseen
  CHECK(ids[1] == v.id("carbon"));
  CHECK_THROWS_AS(v.encode(""), EmptyText);
  CHECK_THROWS_AS(v.encode(",,,"), EmptyText);
}

TEST_CASE("embed_and_pool means the embedding rows") {
  Tape t;
  Var emb = t.leaf(Tensor(3, 2, {9.0, 9.0, 0.0, 2.0, 2.0, 0.0}));
  SUBCASE("single token is its row") {
    const Tensor& z = t.value(embed_and_pool(t, {1}, emb));
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 2.0);
  }
  SUBCASE("two tokens average") {
    const Tensor& z = t.value(embed_and_pool(t, {1, 2}, emb));
    CHECK(z[0] == 1.0);
    CHECK(z[1] == 1.0);
  }
  SUBCASE("repeats of one token equal the single occurrence") {
    const Tensor& once = t.value(embed_and_pool(t, {2}, emb));
    const Tensor& thrice = t.value(embed_and_pool(t, {2, 2, 2}, emb));
    CHECK(once[0] == thrice[0]);
    CHECK(once[1] == thrice[1]);
  }
}

TEST_CASE("pooling is order invariant") {
  Rng rng(7, "test.pool-order");
  Tensor emb(5, 3);
  for (int i = 0; i < emb.size(); ++i) emb[i] = rng.uniform(-1.0, 1.0);
  Tape t;
  Var e = t.leaf(emb);
  const Tensor& a = t.value(embed_and_pool(t, {0, 2, 4, 2}, e));
  const Tensor& b = t.value(embed_and_pool(t, {2, 4, 0, 2}, e));
  for (int j = 0; j < 3; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-15));
}

TEST_CASE("zero blocks leave the pooled vector unchanged at every layer") {
  TextEncoderParams p;
  p.embedding = Tensor(4, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  for (int l = 0; l < 3; ++l) {
    Mlp2 z;
    z.w1 = Tensor(3, 3);
    z.b1 = Tensor(1, 3);
    z.w2 = Tensor(3, 3);
    z.b2 = Tensor(1, 3);
    p.blocks.push_back(z);
  }
  Tape t;
  TextEncoderVars vars = bind_text_encoder(t, p);
  const std::vector<Var> layers = encode_text(t, {1, 2}, vars);
  REQUIRE(layers.size() == 3);
  Tape t2;
  const Tensor pooled =
      t2.value(embed_and_pool(t2, {1, 2}, t2.leaf(p.embedding)));
  for (Var l : layers) {
    for (int j = 0; j < 3; ++j) CHECK(t.value(l)[j] == pooled[j]);
  }
}

TEST_CASE("constant block shifts by its bias") {
  // Zero weights, output bias c: block(z) = c, so layer 1 is z + c.
  TextEncoderParams p;
  p.embedding = Tensor(2, 2, {1.0, 2.0, 3.0, 4.0});
  Mlp2 block;
  block.w1 = Tensor(2, 2);
  block.b1 = Tensor(1, 2);
  block.w2 = Tensor(2, 2);
  block.b2 = Tensor(1, 2, {10.0, 20.0});
  p.blocks.push_back(block);
  Tape t;
  TextEncoderVars vars = bind_text_encoder(t, p);
  const std::vector<Var> layers = encode_text(t, {0}, vars);
  CHECK(t.value(layers[0])[0] == 11.0);
  CHECK(t.value(layers[0])[1] == 22.0);
}

TEST_CASE("layer count contract") {
  TextEncoderParams p = init_text_encoder(5, 4, 3, /*seed=*/3);
  Tape t;
  const std::vector<Var> layers =
      encode_text(t, {1, 3}, bind_text_encoder(t, p));
  CHECK(layers.size() == 3);
}

TEST_CASE("gradient flows only into touched embedding rows") {
  TextEncoderParams p = init_text_encoder(6, 4, 2, /*seed=*/4);
  Tape t;
  TextEncoderVars vars = bind_text_encoder(t, p);
  const std::vector<Var> layers = encode_text(t, {1, 3, 3}, vars);
  t.backward(t.sum(t.mul(layers.back(), layers.back())));
  const Tensor& g = t.grad(vars.embedding);
  auto row_norm = [&](int r) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += std::fabs(g.at(r, j));
    return s;
  };
  CHECK(row_norm(1) > 0.0);
  CHECK(row_norm(3) > 0.0);
  CHECK(row_norm(0) == 0.0);
  CHECK(row_norm(2) == 0.0);
  CHECK(row_norm(4) == 0.0);
  CHECK(row_norm(5) == 0.0);
}

TEST_CASE("text branch gradients pass grad_check") {
  const std::vector<int> ids = {0, 2, 1};
  auto f = [&](Tape& t, const std::vector<Var>& v) {
    TextEncoderVars vars;
    vars.embedding = v[0];
    vars.blocks.push_back({v[1], v[2], v[3], v[4]});
    const std::vector<Var> layers = encode_text(t, ids, vars);
    return t.sum(t.mul(layers.back(), layers.back()));
  };
  Rng rng(12, "test.textenc-grad");
  auto rnd = [&](int r, int c) {
    Tensor t(r, c);
    for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.8, 0.8);
    return t;
  };
  for (int trial = 0; trial < 3; ++trial) {
    const GradCheckReport report = grad_check(
        f, {rnd(3, 4), rnd(4, 4), rnd(1, 4), rnd(4, 4), rnd(1, 4)}, 1e-6, 1e-4);
    CHECK(report.passed());
  }
}
