#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "naru/common.hpp"
#include "naru/model.hpp"
#include "naru/query.hpp"
#include "naru/table.hpp"

namespace naru {

// Perfect per-column selectivities combined by multiplication; the error it
// makes is exactly the cost of the independence assumption.
class IndepEstimator {
 public:
  explicit IndepEstimator(const Table& t) {
    for (int c = 0; c < t.n(); ++c) marginals_.push_back(t.marginal(c));
  }

  double estimate(const Region& region) const {
    double sel = 1.0;
    for (int c = 0; c < region.n(); ++c) {
      const auto& cr = region.columns[static_cast<size_t>(c)];
      if (cr.wildcard) continue;
      const auto& m = marginals_[static_cast<size_t>(c)];
      double mass = 0;
      for (const auto& iv : cr.intervals)
        for (int32_t v = iv.lo; v < iv.hi; ++v) mass += m[static_cast<size_t>(v)];
      sel *= mass;
    }
    return sel;
  }

 private:
  std::vector<std::vector<double>> marginals_;
};

inline double indep_estimate(const Table& t, const Region& region) {
  return IndepEstimator(t).estimate(region);
}

// Keeps p% of the tuples (uniform, without replacement) and answers queries
// by the matching fraction within the kept rows.
class SampleEstimator {
 public:
  static SampleEstimator build(const Table& t, double percent, uint64_t seed) {
    if (percent <= 0 || percent > 100) throw ConfigError("sample percent must be in (0, 100]");
    SampleEstimator s;
    s.n_ = t.n();
    s.percent_ = percent;
    int64_t keep = std::llround(percent * static_cast<double>(t.row_count()) / 100.0);
    keep = std::max<int64_t>(1, std::min<int64_t>(keep, t.row_count()));
    std::vector<int64_t> idx(static_cast<size_t>(t.row_count()));
    for (int64_t i = 0; i < t.row_count(); ++i) idx[static_cast<size_t>(i)] = i;
    Rng rng(mix_seed(seed, 0x53414d50));
    // Partial Fisher-Yates: the first `keep` slots become the sample.
    for (int64_t i = 0; i < keep; ++i) {
      int64_t j = i + static_cast<int64_t>(rng.below(static_cast<uint64_t>(idx.size() - i)));
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(keep));
    std::sort(idx.begin(), idx.end());
    s.rows_.reserve(static_cast<size_t>(keep) * s.n_);
    for (int64_t r : idx)
      s.rows_.insert(s.rows_.end(), t.row(r), t.row(r) + s.n_);
    return s;
  }

  int64_t kept() const { return static_cast<int64_t>(rows_.size()) / n_; }
  double percent() const { return percent_; }

  double estimate(const Region& region) const {
    if (region.any_empty()) return 0.0;
    int64_t hits = 0;
    const int64_t k = kept();
    for (int64_t r = 0; r < k; ++r)
      hits += region.contains_row(rows_.data() + static_cast<size_t>(r) * n_);
    return static_cast<double>(hits) / static_cast<double>(k);
  }

 private:
  int n_ = 0;
  double percent_ = 0;
  std::vector<int32_t> rows_;
};

// Naive Monte Carlo over the region: S uniform points, each scored by the
// model's density; estimate = |R| * mean density. Unbiased but blind to where
// the mass sits, which is exactly its failure mode on skewed data.
inline double uniform_region_estimate(const Model& m, const Region& region, int64_t samples,
                                      uint64_t seed) {
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (region.n() != m.n()) throw QueryError("region arity mismatch");
  if (region.any_empty()) return 0.0;
  const int n = m.n();
  Rng rng(mix_seed(seed, 0x554e4946));
  const int chunk = static_cast<int>(std::min<int64_t>(samples, 4096));
  Runner runner(m, chunk);
  std::vector<int32_t> ids(static_cast<size_t>(chunk) * n);
  std::vector<double> dens(static_cast<size_t>(chunk));
  double sum = 0;
  int64_t done = 0;
  while (done < samples) {
    const int b = static_cast<int>(std::min<int64_t>(chunk, samples - done));
    for (int i = 0; i < b; ++i)
      for (int c = 0; c < n; ++c) {
        const auto& cr = region.columns[static_cast<size_t>(c)];
        int64_t k = static_cast<int64_t>(rng.below(static_cast<uint64_t>(cr.count())));
        ids[static_cast<size_t>(i) * n + c] = cr.nth(k);
      }
    runner.point_density(ids.data(), b, dens.data());
    for (int i = 0; i < b; ++i) sum += dens[static_cast<size_t>(i)];
    done += b;
  }
  double mean = sum / static_cast<double>(samples);
  if (mean == 0.0) return 0.0;
  BigUint points = region_size(region);
  if (points.fits_u64())
    return static_cast<double>(points.to_u64()) * mean;
  return std::exp2(points.log2() + std::log2(mean));
}

}  // namespace naru
