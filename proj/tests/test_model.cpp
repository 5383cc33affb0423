#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "helpers.hpp"
#include "naru/bench.hpp"
#include "naru/inference.hpp"
#include "naru/model.hpp"
#include "naru/model_io.hpp"
#include "naru/training.hpp"

using namespace naru;

TEST_SUITE_BEGIN("armodel");

namespace {

Table tiny25() {
  // domains (2, 5)
  return testing::int_table({"a", "b"}, {{0, 0}, {0, 1}, {1, 2}, {1, 3}, {0, 4}, {1, 0}});
}

std::vector<int32_t> random_tuple(const Model& m, Rng& rng, double mask_prob = 0.0) {
  std::vector<int32_t> t(static_cast<size_t>(m.n()));
  for (int c = 0; c < m.n(); ++c) {
    if (mask_prob > 0 && rng.next_unit() < mask_prob)
      t[static_cast<size_t>(c)] = kMaskId;
    else
      t[static_cast<size_t>(c)] = static_cast<int32_t>(rng.below(static_cast<uint64_t>(m.domain(c))));
  }
  return t;
}

}  // namespace

TEST_CASE("zero weights give uniform conditionals") {
  Table t = tiny25();
  ModelConfig cfg;
  cfg.hidden_sizes = {8};
  Model m = Model::build(cfg, t.meta);
  m.zero_params();
  auto dists = m.forward({0, 0});
  REQUIRE(dists.size() == 2);
  for (double p : dists[0]) CHECK(p == doctest::Approx(0.5));
  for (double p : dists[1]) CHECK(p == doctest::Approx(0.2));
  CHECK(m.point_density({1, 3}) == doctest::Approx(0.1));
}

TEST_CASE("same config and seed build bit-identical parameters") {
  Table t = synth_small_correlated(300, 3);
  ModelConfig cfg;
  cfg.hidden_sizes = {16, 16};
  cfg.seed = 1234;
  Model a = Model::build(cfg, t.meta);
  Model b = Model::build(cfg, t.meta);
  REQUIRE(a.params.size() == b.params.size());
  for (size_t i = 0; i < a.params.size(); ++i) CHECK(a.params[i].v == b.params[i].v);
}

TEST_CASE("encoder selection by domain size") {
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({std::to_string(i), std::to_string(i % 3)});
  Table t = Table::from_raw_rows({"wide", "narrow"}, rows);
  ModelConfig cfg;
  cfg.hidden_sizes = {8};
  cfg.onehot_threshold = 64;
  cfg.embedding_dim = 4;
  Model m = Model::build(cfg, t.meta);
  CHECK(m.coding[0].embedded);       // |A| = 100 > 64
  CHECK(m.coding[0].reuse);
  CHECK_FALSE(m.coding[1].embedded);  // |A| = 3
  CHECK(m.coding[1].in_w == 4);       // 3 values + mask slot
}

TEST_CASE("autoregressive masking holds under input perturbation") {
  Table t = synth_small_correlated(200, 8);
  for (bool residual : {false, true}) {
    ModelConfig cfg;
    cfg.hidden_sizes = {12, 12};
    cfg.residual = residual;
    cfg.onehot_threshold = 6;  // forces column b (domain 8) onto the embedding path
    cfg.embedding_dim = 5;
    cfg.ordering = {2, 0, 3, 1};
    cfg.seed = 77;
    Model m = Model::build(cfg, t.meta);
    Rng rng(999);
    for (int trial = 0; trial < 200; ++trial) {
      auto a = random_tuple(m, rng, 0.25);
      auto b = a;
      // perturb everything at order positions >= j
      int j = static_cast<int>(rng.below(static_cast<uint64_t>(m.n())));
      for (int p = j; p < m.n(); ++p) {
        int c = m.order[static_cast<size_t>(p)];
        b[static_cast<size_t>(c)] =
            static_cast<int32_t>(rng.below(static_cast<uint64_t>(m.domain(c))));
      }
      auto da = m.forward(a);
      auto db = m.forward(b);
      for (int p = 0; p <= j && p < m.n(); ++p)
        CHECK(da[static_cast<size_t>(p)] == db[static_cast<size_t>(p)]);  // bit-identical
    }
  }
}

TEST_CASE("distributions normalize and total mass is one") {
  Table t = synth_small_correlated(400, 21);
  ModelConfig cfg;
  cfg.hidden_sizes = {16};
  cfg.seed = 5;
  Model m = Model::build(cfg, t.meta);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto dists = m.forward(random_tuple(m, rng, 0.3));
    for (const auto& d : dists) {
      double sum = 0;
      for (double p : d) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }

  // sum of point densities over the full cross product
  double total = 0;
  for (int32_t a = 0; a < m.domain(0); ++a)
    for (int32_t b = 0; b < m.domain(1); ++b)
      for (int32_t c = 0; c < m.domain(2); ++c)
        for (int32_t d = 0; d < m.domain(3); ++d) total += m.point_density({a, b, c, d});
  CHECK(std::abs(total - 1.0) <= 1e-6);
}

TEST_CASE("embedding reuse decodes scores across a 10^4 domain") {
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 10000; ++i) rows.push_back({std::to_string(i)});
  Table t = Table::from_raw_rows({"id"}, rows);
  ModelConfig cfg;
  cfg.hidden_sizes = {16};
  cfg.embedding_dim = 8;
  cfg.embedding_reuse = true;
  Model m = Model::build(cfg, t.meta);
  REQUIRE(m.coding[0].reuse);
  auto dists = m.forward({1234});
  REQUIRE(dists[0].size() == 10000);
  double sum = 0;
  for (double p : dists[0]) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-6);
}

TEST_CASE("model memorizes a one-row table") {
  Table t = testing::int_table({"a", "b", "c"}, {{0, 0, 0}});
  ModelConfig cfg;
  cfg.hidden_sizes = {8};
  Model m = Model::build(cfg, t.meta);
  TrainConfig tc;
  tc.epochs = 300;
  tc.batch_size = 1;
  tc.wildcard_augment = false;
  train(m, t, tc);
  CHECK(m.point_density({0, 0, 0}) > 0.99);
}

TEST_CASE("training-table density mass tracks the entropy gap") {
  Table t = synth_independent(100, {50, 40, 60}, 31);
  ModelConfig cfg;
  cfg.hidden_sizes = {64, 64};
  cfg.seed = 9;
  Model m = Model::build(cfg, t.meta);
  TrainConfig tc;
  tc.epochs = 400;
  tc.batch_size = 32;
  tc.wildcard_augment = false;
  tc.seed = 9;
  TrainReport rep = train(m, t, tc);
  double gap = rep.last().gap_bits;
  JointOracle o = JointOracle::build(t);
  double mass = 0;
  for (int64_t k = 0; k < o.distinct(); ++k) {
    std::vector<int32_t> tuple(o.tuple(k), o.tuple(k) + t.n());
    mass += m.point_density(tuple);
  }
  double predicted = std::exp2(-gap);
  CHECK(mass > predicted / 2);
  CHECK(mass < predicted * 2);
}

TEST_CASE("forward rejects out-of-range ids") {
  Table t = tiny25();
  ModelConfig cfg;
  cfg.hidden_sizes = {4};
  Model m = Model::build(cfg, t.meta);
  CHECK_THROWS_AS(m.forward({0, 9}), ValueError);
  CHECK_THROWS_AS(m.point_density({0, kMaskId}), ValueError);
  CHECK_THROWS_AS(m.forward({0}), ValueError);
}

TEST_CASE("build rejects bad configs") {
  Table t = tiny25();
  ModelConfig cfg;
  cfg.hidden_sizes = {};
  CHECK_THROWS_AS(Model::build(cfg, t.meta), ConfigError);
  cfg.hidden_sizes = {0};
  CHECK_THROWS_AS(Model::build(cfg, t.meta), ConfigError);
  cfg.hidden_sizes = {8};
  cfg.ordering = {0, 0};
  CHECK_THROWS_AS(Model::build(cfg, t.meta), ConfigError);
}

TEST_CASE("serialize round trip is bit exact") {
  Table t = synth_small_correlated(250, 77);
  ModelConfig cfg;
  cfg.hidden_sizes = {12, 12};
  cfg.residual = true;
  cfg.onehot_threshold = 5;
  cfg.embedding_dim = 6;
  cfg.ordering = {3, 1, 0, 2};
  cfg.seed = 10;
  Model m = Model::build(cfg, t.meta);
  TrainConfig tc;
  tc.epochs = 3;
  train(m, t, tc);

  auto bytes = serialize_model(m);
  Model back = deserialize_model(bytes.data(), bytes.size());
  CHECK(back.wildcard_trained == m.wildcard_trained);
  CHECK(back.order == m.order);
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    auto tuple = random_tuple(m, rng, 0.2);
    auto da = m.forward(tuple);
    auto db = back.forward(tuple);
    CHECK(da == db);
  }

  // serializing twice gives identical bytes
  CHECK(serialize_model(m) == bytes);
}

TEST_CASE("container failure modes are distinct") {
  Table t = tiny25();
  ModelConfig cfg;
  cfg.hidden_sizes = {4};
  Model m = Model::build(cfg, t.meta);
  auto bytes = serialize_model(m);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(bad_magic.data(), bad_magic.size()), ModelIoError);
  try {
    deserialize_model(bad_magic.data(), bad_magic.size());
  } catch (const ModelIoError& e) {
    CHECK(e.kind == ModelIoError::Kind::BadMagic);
  }

  auto truncated = bytes;
  truncated.resize(truncated.size() - 9);
  try {
    deserialize_model(truncated.data(), truncated.size());
    FAIL("expected size mismatch");
  } catch (const ModelIoError& e) {
    CHECK(e.kind == ModelIoError::Kind::SizeMismatch);
  }

  // a model whose dictionaries differ from the paired table
  Table other = testing::int_table({"a", "b"}, {{0, 0}, {1, 1}, {0, 5}});
  try {
    SamplerConfig sc;
    estimate(m, testing::one_pred("a", Op::Eq, "0"), other.meta, sc);
    FAIL("expected dictionary hash mismatch");
  } catch (const ModelIoError& e) {
    CHECK(e.kind == ModelIoError::Kind::DictHashMismatch);
  }
}

TEST_SUITE_END();
