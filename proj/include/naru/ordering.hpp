#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "naru/common.hpp"
#include "naru/table.hpp"

namespace naru {

enum class MutInfoVariant { Full, Pairwise };

struct OrderingStats {
  std::vector<double> entropy_bits;              // H(X_i)
  std::vector<std::vector<double>> mi_bits;      // I(X_i; X_j), diagonal = H(X_i)
  std::vector<int> permutation;
};

inline std::vector<int> order_natural(int n) {
  std::vector<int> p(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  return p;
}

namespace detail {

// Entropy in bits of the joint of a column subset, from exact empirical
// counts. Rows are sorted on the projection so identical tuples are runs;
// the summation order is therefore deterministic.
inline double subset_entropy_bits(const Table& t, const std::vector<int>& cols) {
  const int64_t rows = t.row_count();
  std::vector<int64_t> idx(static_cast<size_t>(rows));
  for (int64_t i = 0; i < rows; ++i) idx[static_cast<size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int64_t a, int64_t b) {
    for (int c : cols) {
      int32_t va = t.at(a, c), vb = t.at(b, c);
      if (va != vb) return va < vb;
    }
    return false;
  });
  auto equal = [&](int64_t a, int64_t b) {
    for (int c : cols)
      if (t.at(a, c) != t.at(b, c)) return false;
    return true;
  };
  double h = 0;
  const double inv = 1.0 / static_cast<double>(rows);
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j < idx.size() && equal(idx[i], idx[j])) ++j;
    double p = static_cast<double>(j - i) * inv;
    h -= p * std::log2(p);
    i = j;
  }
  return h;
}

}  // namespace detail

inline double column_entropy_bits(const Table& t, int col) {
  return detail::subset_entropy_bits(t, {col});
}

// I(X_i; X_j) = H(X_i) + H(X_j) - H(X_i, X_j), exact empirical counts.
inline double pairwise_mi_bits(const Table& t, int i, int j) {
  if (i == j) return column_entropy_bits(t, i);
  return column_entropy_bits(t, i) + column_entropy_bits(t, j) -
         detail::subset_entropy_bits(t, {i, j});
}

// Greedy information-theoretic orderings. The first pick maximizes marginal
// entropy. Full variant then picks argmax_i I(X_chosen; X_i) where X_chosen
// is the joint of everything chosen so far; the pairwise variant scores
// against the last chosen column only. Ties break to the lower column index.
inline OrderingStats order_mutinfo(const Table& t, MutInfoVariant variant) {
  const int n = t.n();
  OrderingStats stats;
  stats.entropy_bits.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    stats.entropy_bits[static_cast<size_t>(i)] = column_entropy_bits(t, i);
  stats.mi_bits.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = pairwise_mi_bits(t, i, j);
      stats.mi_bits[static_cast<size_t>(i)][static_cast<size_t>(j)] = v;
      stats.mi_bits[static_cast<size_t>(j)][static_cast<size_t>(i)] = v;
    }

  std::vector<bool> used(static_cast<size_t>(n), false);
  std::vector<int> perm;
  {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (stats.entropy_bits[static_cast<size_t>(i)] > stats.entropy_bits[static_cast<size_t>(best)])
        best = i;
    perm.push_back(best);
    used[static_cast<size_t>(best)] = true;
  }
  while (static_cast<int>(perm.size()) < n) {
    double h_chosen = 0;
    if (variant == MutInfoVariant::Full) h_chosen = detail::subset_entropy_bits(t, perm);
    int best = -1;
    double best_score = 0;
    for (int c = 0; c < n; ++c) {
      if (used[static_cast<size_t>(c)]) continue;
      double score;
      if (variant == MutInfoVariant::Pairwise) {
        score = stats.mi_bits[static_cast<size_t>(perm.back())][static_cast<size_t>(c)];
      } else {
        std::vector<int> with = perm;
        with.push_back(c);
        score = h_chosen + stats.entropy_bits[static_cast<size_t>(c)] -
                detail::subset_entropy_bits(t, with);
      }
      if (best < 0 || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    perm.push_back(best);
    used[static_cast<size_t>(best)] = true;
  }
  stats.permutation = std::move(perm);
  return stats;
}

}  // namespace naru
