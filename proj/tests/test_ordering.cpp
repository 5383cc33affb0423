#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "naru/bench.hpp"
#include "naru/ordering.hpp"

using namespace naru;

TEST_SUITE_BEGIN("ordering");

TEST_CASE("natural order is the identity") {
  CHECK(order_natural(3) == std::vector<int>{0, 1, 2});
  CHECK(order_natural(1) == std::vector<int>{0});
}

TEST_CASE("self information equals marginal entropy") {
  Table t = synth_small_correlated(600, 23);
  OrderingStats s = order_mutinfo(t, MutInfoVariant::Full);
  for (int c = 0; c < t.n(); ++c) {
    CHECK(std::abs(s.mi_bits[c][c] - s.entropy_bits[c]) <= 1e-9);
    for (int d = 0; d < t.n(); ++d) {
      CHECK(s.mi_bits[c][d] == s.mi_bits[d][c]);
      CHECK(s.mi_bits[c][d] >= -1e-12);
    }
  }
}

TEST_CASE("identical columns pair up first when their entropy is maximal") {
  // x and y are copies with a large domain; z is an independent coin
  Rng rng(15);
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 400; ++i) {
    int v = static_cast<int>(rng.below(16));
    int z = static_cast<int>(rng.below(2));
    rows.push_back({v, z, v});
  }
  Table t = testing::int_table({"x", "z", "y"}, rows);
  for (auto variant : {MutInfoVariant::Full, MutInfoVariant::Pairwise}) {
    auto perm = order_mutinfo(t, variant).permutation;
    // max-entropy first pick is x (index 0, ties to lower index with y),
    // then y joins it because I(x;y)=H(x) dominates I(x;z)
    CHECK(perm[0] == 0);
    CHECK(perm[1] == 2);
    CHECK(perm[2] == 1);
  }
}

TEST_CASE("independent columns order by descending entropy with index ties") {
  // construct exact uniform columns so entropies are known: domain sizes 2,8,4
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 64; ++i) rows.push_back({i % 2, i % 8, i % 4});
  Table t = testing::int_table({"two", "eight", "four"}, rows);
  for (auto variant : {MutInfoVariant::Full, MutInfoVariant::Pairwise}) {
    auto perm = order_mutinfo(t, variant).permutation;
    CHECK(perm[0] == 1);  // 3 bits
    // i%8 determines i%2 and i%4 here, so scores after the first pick are
    // the candidates' own entropies; descending entropy follows
    CHECK(perm[1] == 2);  // 2 bits
    CHECK(perm[2] == 0);  // 1 bit
  }
}

TEST_CASE("greedy selection matches a brute-force oracle") {
  // independent reimplementation with map-based counting
  auto oracle = [](const Table& t, MutInfoVariant variant) {
    auto entropy = [&](const std::vector<int>& cols) {
      std::map<std::vector<int32_t>, int64_t> counts;
      for (int64_t r = 0; r < t.row_count(); ++r) {
        std::vector<int32_t> key;
        for (int c : cols) key.push_back(t.at(r, c));
        counts[key]++;
      }
      double h = 0;
      for (auto& [k, v] : counts) {
        double p = static_cast<double>(v) / static_cast<double>(t.row_count());
        h -= p * std::log2(p);
      }
      return h;
    };
    std::vector<int> perm;
    std::vector<bool> used(static_cast<size_t>(t.n()), false);
    int first = 0;
    for (int c = 1; c < t.n(); ++c)
      if (entropy({c}) > entropy({first})) first = c;
    perm.push_back(first);
    used[static_cast<size_t>(first)] = true;
    while (static_cast<int>(perm.size()) < t.n()) {
      int best = -1;
      double best_score = 0;
      for (int c = 0; c < t.n(); ++c) {
        if (used[static_cast<size_t>(c)]) continue;
        double score;
        if (variant == MutInfoVariant::Pairwise) {
          score = entropy({perm.back()}) + entropy({c}) - entropy({perm.back(), c});
        } else {
          std::vector<int> with = perm;
          with.push_back(c);
          score = entropy(perm) + entropy({c}) - entropy(with);
        }
        if (best < 0 || score > best_score) {
          best = c;
          best_score = score;
        }
      }
      perm.push_back(best);
      used[static_cast<size_t>(best)] = true;
    }
    return perm;
  };

  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Rng rng(seed);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 500; ++i) {
      int a = static_cast<int>(rng.below(6));
      int b = static_cast<int>((a + rng.below(2)) % 6);
      int c = static_cast<int>(rng.below(9));
      int d = static_cast<int>(rng.below(3));
      int e = static_cast<int>((c + rng.below(4)) % 9);
      rows.push_back({a, b, c, d, e});
    }
    Table t = testing::int_table({"a", "b", "c", "d", "e"}, rows);
    CHECK(order_mutinfo(t, MutInfoVariant::Full).permutation ==
          oracle(t, MutInfoVariant::Full));
    CHECK(order_mutinfo(t, MutInfoVariant::Pairwise).permutation ==
          oracle(t, MutInfoVariant::Pairwise));
  }
}

TEST_CASE("permutations are valid and deterministic") {
  Table t = synth_small_correlated(300, 77);
  for (auto variant : {MutInfoVariant::Full, MutInfoVariant::Pairwise}) {
    auto p1 = order_mutinfo(t, variant).permutation;
    auto p2 = order_mutinfo(t, variant).permutation;
    CHECK(p1 == p2);
    std::vector<bool> seen(static_cast<size_t>(t.n()), false);
    for (int c : p1) {
      REQUIRE(c >= 0);
      REQUIRE(c < t.n());
      CHECK_FALSE(seen[static_cast<size_t>(c)]);
      seen[static_cast<size_t>(c)] = true;
    }
  }
}

TEST_SUITE_END();
