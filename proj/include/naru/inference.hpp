#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "naru/common.hpp"
#include "naru/model.hpp"
#include "naru/query.hpp"

namespace naru {

enum class EstimateMethod { Equality, Enumeration, Progressive };

inline const char* method_name(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::Equality: return "equality";
    case EstimateMethod::Enumeration: return "enumeration";
    case EstimateMethod::Progressive: return "progressive";
  }
  return "?";
}

struct SamplerConfig {
  int64_t sample_count = 1000;
  int64_t enumeration_threshold = 10000;  // max region points for the exact path
  bool wildcard_skip = true;
  uint64_t seed = 42;

  void validate() const {
    if (sample_count < 1) throw ConfigError("sample_count must be >= 1");
    if (enumeration_threshold < 1) throw ConfigError("enumeration_threshold must be >= 1");
  }
};

struct Estimate {
  double selectivity = 0;
  double cardinality = 0;  // round(selectivity * row_count)
  double standard_error = 0;
  EstimateMethod method = EstimateMethod::Enumeration;
  int64_t forward_tuples = 0;  // total single-tuple forward passes spent

  static Estimate make(double sel, int64_t rows, EstimateMethod method, double se = 0,
                       int64_t forwards = 0) {
    Estimate e;
    e.selectivity = std::min(1.0, std::max(0.0, sel));
    e.cardinality = std::llround(e.selectivity * static_cast<double>(rows));
    e.standard_error = se;
    e.method = method;
    e.forward_tuples = forwards;
    return e;
  }
};

// Per order position: skip wildcard columns entirely (they keep their MASK
// token and contribute factor 1). Requires a model trained with wildcard
// masking, otherwise the MASK token was never learned.
struct SkipPlan {
  std::vector<bool> skip_by_position;
  int constrained = 0;
};

inline SkipPlan wildcard_skip_plan(const Model& m, const Region& region) {
  if (!m.wildcard_trained)
    throw ConfigError(
        "wildcard-skipping requires a model trained with wildcard augmentation; "
        "re-train with it or disable skipping");
  SkipPlan plan;
  plan.skip_by_position.resize(static_cast<size_t>(m.n()));
  for (int p = 0; p < m.n(); ++p) {
    int c = m.order[static_cast<size_t>(p)];
    bool skip = region.columns[static_cast<size_t>(c)].wildcard;
    plan.skip_by_position[static_cast<size_t>(p)] = skip;
    if (!skip) plan.constrained++;
  }
  return plan;
}

// Point query: one forward pass, conditionals read at the tuple's ids and
// multiplied. Empty column regions (out-of-domain equality) return zero
// without touching the model.
inline Estimate estimate_equality(const Model& m, const Region& region) {
  if (region.n() != m.n()) throw QueryError("region arity mismatch");
  if (region.any_empty())
    return Estimate::make(0.0, m.meta.row_count, EstimateMethod::Equality, 0, 0);
  std::vector<int32_t> tuple(static_cast<size_t>(m.n()));
  for (int c = 0; c < m.n(); ++c) {
    const auto& cr = region.columns[static_cast<size_t>(c)];
    if (cr.count() != 1) throw QueryError("equality path requires a single point per column");
    tuple[static_cast<size_t>(c)] = cr.first();
  }
  Runner r(m, 1);
  double density = 0;
  r.point_density(tuple.data(), 1, &density);
  return Estimate::make(density, m.meta.row_count, EstimateMethod::Equality, 0, 1);
}

// Exact sum of the model's density over every point of the region.
inline Estimate estimate_enumerate(const Model& m, const Region& region, int64_t threshold) {
  if (region.n() != m.n()) throw QueryError("region arity mismatch");
  if (region.any_empty())
    return Estimate::make(0.0, m.meta.row_count, EstimateMethod::Enumeration, 0, 0);
  BigUint points = region_size(region);
  if (!points.less_equal_u64(static_cast<uint64_t>(threshold)))
    throw ConfigError("region has " + points.to_string() +
                      " points, above the enumeration threshold; use progressive sampling");
  const int64_t total = static_cast<int64_t>(points.to_u64());
  const int n = m.n();
  const int chunk = static_cast<int>(std::min<int64_t>(total, 4096));
  Runner runner(m, chunk);
  std::vector<int32_t> ids(static_cast<size_t>(chunk) * n);
  std::vector<double> dens(static_cast<size_t>(chunk));
  std::vector<int64_t> odo(static_cast<size_t>(n), 0);  // member ranks per column
  double sum = 0;
  int64_t done = 0;
  while (done < total) {
    const int b = static_cast<int>(std::min<int64_t>(chunk, total - done));
    for (int i = 0; i < b; ++i) {
      for (int c = 0; c < n; ++c)
        ids[static_cast<size_t>(i) * n + c] =
            region.columns[static_cast<size_t>(c)].nth(odo[static_cast<size_t>(c)]);
      // advance odometer, last column fastest
      for (int c = n - 1; c >= 0; --c) {
        if (++odo[static_cast<size_t>(c)] < region.columns[static_cast<size_t>(c)].count()) break;
        odo[static_cast<size_t>(c)] = 0;
      }
    }
    runner.point_density(ids.data(), b, dens.data());
    for (int i = 0; i < b; ++i) sum += dens[static_cast<size_t>(i)];
    done += b;
  }
  return Estimate::make(sum, m.meta.row_count, EstimateMethod::Enumeration, 0, total);
}

// Monte Carlo range density: per sample path, walk the ordering; at each
// constrained column read the conditional, zero out ids outside the region,
// record the in-region mass, renormalize and draw the next coordinate. The
// path weight is the product of recorded masses; the estimate is the mean
// path weight. A zero-mass step makes the whole path contribute zero.
inline Estimate progressive_sample(const Model& m, const Region& region,
                                   const SamplerConfig& cfg) {
  cfg.validate();
  if (region.n() != m.n()) throw QueryError("region arity mismatch");
  if (region.any_empty())
    return Estimate::make(0.0, m.meta.row_count, EstimateMethod::Progressive, 0, 0);

  SkipPlan plan;
  if (cfg.wildcard_skip) {
    plan = wildcard_skip_plan(m, region);
  } else {
    plan.skip_by_position.assign(static_cast<size_t>(m.n()), false);
    plan.constrained = m.n();
  }

  const int n = m.n();
  const int64_t S = cfg.sample_count;
  Rng rng(mix_seed(cfg.seed, 0x50524f47));
  const int chunk = static_cast<int>(std::min<int64_t>(S, 4096));
  Runner runner(m, chunk);
  std::vector<int32_t> ids(static_cast<size_t>(chunk) * n);
  std::vector<double> weights(static_cast<size_t>(S));
  std::vector<double> probs;
  int64_t forwards = 0;

  int64_t done = 0;
  while (done < S) {
    const int b = static_cast<int>(std::min<int64_t>(chunk, S - done));
    std::fill(ids.begin(), ids.begin() + static_cast<size_t>(b) * n, kMaskId);
    double* w = weights.data() + done;
    std::fill(w, w + b, 1.0);
    for (int p = 0; p < n; ++p) {
      if (plan.skip_by_position[static_cast<size_t>(p)]) continue;
      const int c = m.order[static_cast<size_t>(p)];
      const auto& cr = region.columns[static_cast<size_t>(c)];
      const int D = static_cast<int>(m.domain(c));
      runner.forward_hidden(ids.data(), b);
      probs.resize(static_cast<size_t>(b) * D);
      runner.column_probs(c, b, probs.data());
      forwards += b;
      for (int i = 0; i < b; ++i) {
        const double* pr = probs.data() + static_cast<size_t>(i) * D;
        int32_t* tuple = ids.data() + static_cast<size_t>(i) * n;
        if (w[i] == 0.0) {
          tuple[c] = cr.first();
          continue;
        }
        double mass = 0;
        if (cr.wildcard) {
          for (int v = 0; v < D; ++v) mass += pr[v];
        } else {
          for (const auto& iv : cr.intervals)
            for (int32_t v = iv.lo; v < iv.hi; ++v) mass += pr[v];
        }
        w[i] *= mass;
        if (!(mass > 0.0)) {
          w[i] = 0.0;
          tuple[c] = cr.first();
          continue;
        }
        // inverse-CDF draw over the renormalized in-region slots
        double target = rng.next_unit() * mass;
        double acc = 0;
        int32_t drawn = -1;
        if (cr.wildcard) {
          for (int32_t v = 0; v < D; ++v) {
            acc += pr[v];
            if (acc >= target) {
              drawn = v;
              break;
            }
          }
          if (drawn < 0) drawn = D - 1;
        } else {
          for (const auto& iv : cr.intervals) {
            for (int32_t v = iv.lo; v < iv.hi && drawn < 0; ++v) {
              acc += pr[v];
              if (acc >= target) drawn = v;
            }
            if (drawn >= 0) break;
          }
          if (drawn < 0) drawn = cr.intervals.back().hi - 1;
        }
        if (!cr.contains(drawn)) throw Error("sampled coordinate left the region");
        tuple[c] = drawn;
      }
    }
    done += b;
  }

  double mean = 0;
  for (double x : weights) mean += x;
  mean /= static_cast<double>(S);
  double se = 0;
  if (S > 1) {
    double ss = 0;
    for (double x : weights) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(S - 1)) / std::sqrt(static_cast<double>(S));
  }
  return Estimate::make(mean, m.meta.row_count, EstimateMethod::Progressive, se, forwards);
}

// Dispatcher: empty region -> 0; full-tuple point query -> equality path;
// small region -> exact enumeration; otherwise progressive sampling.
inline Estimate estimate_region(const Model& m, const Region& region, const SamplerConfig& cfg) {
  cfg.validate();
  if (region.any_empty())
    return Estimate::make(0.0, m.meta.row_count, EstimateMethod::Enumeration, 0, 0);
  bool point = true;
  for (const auto& cr : region.columns)
    if (cr.count() != 1) {
      point = false;
      break;
    }
  if (point) return estimate_equality(m, region);
  if (region_size(region).less_equal_u64(static_cast<uint64_t>(cfg.enumeration_threshold)))
    return estimate_enumerate(m, region, cfg.enumeration_threshold);
  return progressive_sample(m, region, cfg);
}

// Binds a query against the model's recorded dictionaries and dispatches.
// `meta` must carry the same dictionaries the model was built on.
inline Estimate estimate(const Model& m, const Query& q, const TableMeta& meta,
                         const SamplerConfig& cfg) {
  if (meta.dict_hash() != m.meta.dict_hash())
    throw ModelIoError(ModelIoError::Kind::DictHashMismatch,
                       "query dictionaries do not match the model's dictionaries");
  return estimate_region(m, bind(q, m.meta), cfg);
}

}  // namespace naru
