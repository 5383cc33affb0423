#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "naru/baselines.hpp"
#include "naru/bench.hpp"
#include "naru/inference.hpp"
#include "naru/training.hpp"

using namespace naru;

TEST_SUITE_BEGIN("baselines");

TEST_CASE("indep is exact on independent data and forced wrong on correlated data") {
  Table indep = testing::int_table({"x1", "x2"}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  Query q;
  q.predicates.push_back({"x1", Op::Eq, {"0"}});
  q.predicates.push_back({"x2", Op::Eq, {"0"}});
  CHECK(indep_estimate(indep, bind(q, indep.meta)) == doctest::Approx(0.25));

  Table corr = testing::int_table({"x1", "x2"}, {{0, 0}, {1, 1}});
  Query impossible;
  impossible.predicates.push_back({"x1", Op::Eq, {"0"}});
  impossible.predicates.push_back({"x2", Op::Eq, {"1"}});
  Region r = bind(impossible, corr.meta);
  CHECK(exact_selectivity(corr, r) == 0.0);
  CHECK(indep_estimate(corr, r) == doctest::Approx(0.25));  // marginals force 0.5*0.5

  Region all;
  all.columns = {{2, true, {}}, {2, true, {}}};
  CHECK(indep_estimate(corr, all) == 1.0);
}

TEST_CASE("indep is exact on a larger product-form table") {
  // columns generated independently: indep should match exact selectivity up
  // to nothing at all, since the *empirical* joint is only near product form;
  // use exact product construction instead
  std::vector<std::vector<int>> rows;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 3; ++c) rows.push_back({a, b, c});
  Table t = testing::int_table({"a", "b", "c"}, rows);
  WorkloadSpec spec;
  spec.query_count = 30;
  spec.min_filters = 1;
  spec.max_filters = 3;
  spec.seed = 9;
  IndepEstimator est(t);
  for (const auto& q : generate_workload(t, spec)) {
    Region r = bind(q, t.meta);
    CHECK(est.estimate(r) == doctest::Approx(exact_selectivity(t, r)).epsilon(1e-12));
  }
}

TEST_CASE("sample estimator") {
  Table t = synth_small_correlated(2000, 5);
  Query q;
  q.predicates.push_back({"a", Op::Le, {"2"}});
  q.predicates.push_back({"c", Op::Ge, {"3"}});
  Region r = bind(q, t.meta);
  double exact = exact_selectivity(t, r);

  SUBCASE("keeping everything reproduces the exact answer") {
    SampleEstimator s = SampleEstimator::build(t, 100.0, 1);
    CHECK(s.kept() == t.row_count());
    CHECK(s.estimate(r) == doctest::Approx(exact).epsilon(1e-12));
  }

  SUBCASE("retained count is round(p*|T|/100) and at least one") {
    CHECK(SampleEstimator::build(t, 1.0, 2).kept() == 20);
    CHECK(SampleEstimator::build(t, 0.01, 2).kept() == 1);
  }

  SUBCASE("no hits in the sample gives zero") {
    // a query matching exactly one row rarely lands in a tiny sample
    Table small = testing::int_table({"a", "b"}, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    int zero_seen = 0;
    for (uint64_t seed = 0; seed < 8; ++seed) {
      SampleEstimator si = SampleEstimator::build(small, 25.0, seed);
      Query one;
      one.predicates.push_back({"a", Op::Eq, {"3"}});
      if (si.estimate(bind(one, small.meta)) == 0.0) zero_seen++;
    }
    CHECK(zero_seen > 0);
  }

  SUBCASE("resampled estimates are unbiased within a 4-sigma binomial band") {
    const int trials = 60;
    const double pct = 5.0;  // 100 kept rows
    double sum = 0;
    for (int i = 0; i < trials; ++i)
      sum += SampleEstimator::build(t, pct, 1000 + static_cast<uint64_t>(i)).estimate(r);
    double mean = sum / trials;
    int64_t kept = SampleEstimator::build(t, pct, 0).kept();
    double sigma = std::sqrt(exact * (1 - exact) / static_cast<double>(kept)) /
                   std::sqrt(static_cast<double>(trials));
    CHECK(std::abs(mean - exact) <= 4 * sigma);
  }
}

TEST_CASE("uniform region sampling") {
  Table t = testing::int_table({"a", "b"}, {{0, 0}, {0, 1}, {1, 2}, {1, 3}, {0, 4}, {1, 0}});
  ModelConfig cfg;
  cfg.hidden_sizes = {8};
  Model m = Model::build(cfg, t.meta);
  m.zero_params();

  SUBCASE("singleton region returns the point density for any sample count") {
    Region r;
    r.columns = {{2, false, {{1, 2}}}, {5, false, {{3, 4}}}};
    for (int64_t S : {1, 7, 100})
      CHECK(uniform_region_estimate(m, r, S, 9) == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("uniform model gives the exact ratio with no seed dependence") {
    Region r;
    r.columns = {{2, false, {{0, 1}}}, {5, false, {{1, 4}}}};
    double expect = (1.0 / 2.0) * (3.0 / 5.0);
    double first = uniform_region_estimate(m, r, 200, 1);
    CHECK(first == doctest::Approx(expect).epsilon(1e-12));
    for (uint64_t seed : {2ull, 3ull, 4ull})
      CHECK(uniform_region_estimate(m, r, 200, seed) == first);
  }

  SUBCASE("empty region is zero") {
    Region r;
    r.columns = {{2, false, {}}, {5, true, {}}};
    CHECK(uniform_region_estimate(m, r, 10, 1) == 0.0);
  }
}

TEST_CASE("uniform region sampling collapses on skewed data while progressive holds") {
  // small version of the skew stress: 5 columns, top value holds 99%, so a
  // uniform point hits the hot cell of the top-50% region w.p. 6^-5
  Table t = synth_skewed(5, 12, 1500, 0.99, 3);
  ModelConfig cfg;
  cfg.hidden_sizes = {24, 24};
  cfg.seed = 5;
  Model m = Model::build(cfg, t.meta);
  TrainConfig tc;
  tc.epochs = 120;
  tc.seed = 5;
  train(m, t, tc);

  // top-50% range query on every column
  Query q;
  for (int c = 0; c < t.n(); ++c) {
    const Column& col = t.meta.columns[c];
    int32_t half = static_cast<int32_t>(col.domain_size() / 2);
    q.predicates.push_back({col.name, Op::Ge, {col.decode(half)}});
  }
  Region r = bind(q, t.meta);
  double exact_model_mass = estimate_enumerate(m, r, 100000).selectivity;
  REQUIRE(exact_model_mass > 0.5);

  int uniform_bad = 0, progressive_good = 0;
  const int trials = 30;
  for (int i = 0; i < trials; ++i) {
    double u = uniform_region_estimate(m, r, 300, 100 + static_cast<uint64_t>(i));
    if (u == 0.0 || u < exact_model_mass / 10) uniform_bad++;
    SamplerConfig sc;
    sc.sample_count = 300;
    sc.seed = 100 + static_cast<uint64_t>(i);
    double p = progressive_sample(m, r, sc).selectivity;
    if (p >= exact_model_mass / 2 && p <= exact_model_mass * 2) progressive_good++;
  }
  CHECK(uniform_bad > trials / 2);
  CHECK(progressive_good >= trials * 9 / 10);
}

TEST_SUITE_END();
