#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "naru/common.hpp"
#include "naru/query.hpp"
#include "naru/table.hpp"

namespace naru {

enum class LiteralSource { Data, Domain };

struct WorkloadSpec {
  int64_t query_count = 2000;
  int min_filters = 5;
  int max_filters = 11;
  LiteralSource source = LiteralSource::Data;
  uint64_t seed = 42;
};

// Random conjunctive queries: draw the filter count, draw that many distinct
// columns, give wide columns (domain >= 10) a uniform operator from
// {=, <=, >=} and small-domain columns equality. In-distribution literals
// come from one uniformly sampled tuple; domain mode draws each literal
// uniformly from its column's domain instead.
inline std::vector<Query> generate_workload(const Table& t, const WorkloadSpec& spec) {
  const int n = t.n();
  int fmin = std::min(spec.min_filters, n);
  int fmax = std::min(spec.max_filters, n);
  if (fmin < 1 || fmin > fmax) throw ConfigError("bad filter count range");
  if (spec.query_count < 1) throw ConfigError("query_count must be >= 1");

  Rng rng(mix_seed(spec.seed, 0x574b4c44));
  std::vector<Query> out;
  out.reserve(static_cast<size_t>(spec.query_count));
  std::vector<int> cols(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) cols[static_cast<size_t>(i)] = i;

  for (int64_t qi = 0; qi < spec.query_count; ++qi) {
    int f = fmin + static_cast<int>(rng.below(static_cast<uint64_t>(fmax - fmin + 1)));
    rng.shuffle(cols);
    std::vector<int> chosen(cols.begin(), cols.begin() + f);
    std::sort(chosen.begin(), chosen.end());
    int64_t row = -1;
    if (spec.source == LiteralSource::Data)
      row = static_cast<int64_t>(rng.below(static_cast<uint64_t>(t.row_count())));
    Query q;
    for (int c : chosen) {
      const Column& col = t.meta.columns[static_cast<size_t>(c)];
      Predicate p;
      p.column = col.name;
      if (col.domain_size() >= 10) {
        switch (rng.below(3)) {
          case 0: p.op = Op::Eq; break;
          case 1: p.op = Op::Le; break;
          default: p.op = Op::Ge; break;
        }
      } else {
        p.op = Op::Eq;
      }
      int32_t id = spec.source == LiteralSource::Data
                       ? t.at(row, c)
                       : static_cast<int32_t>(rng.below(static_cast<uint64_t>(col.domain_size())));
      p.literals.push_back(col.decode(id));
      q.predicates.push_back(std::move(p));
    }
    out.push_back(std::move(q));
  }
  return out;
}

// Multiplicative error with both cardinalities floored at 1.
inline double q_error(double estimate_card, double true_card) {
  double e = std::max(1.0, estimate_card);
  double a = std::max(1.0, true_card);
  return std::max(e, a) / std::min(e, a);
}

// ---------------------------------------------------------------------------
// Workload files: JSON lines, one object per query
//   {"predicates":[{"col":...,"op":"=","lit":...}], "true_card": 123}
// IN literals are arrays; true_card is optional until the oracle labels it.

struct WorkloadEntry {
  Query query;
  double true_card = -1;  // < 0 means unlabeled
};

inline nlohmann::json workload_entry_to_json(const WorkloadEntry& e) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : e.query.predicates) {
    nlohmann::json jp;
    jp["col"] = p.column;
    jp["op"] = op_name(p.op);
    if (p.op == Op::In)
      jp["lit"] = p.literals;
    else
      jp["lit"] = p.literals.at(0);
    preds.push_back(std::move(jp));
  }
  nlohmann::json j;
  j["predicates"] = std::move(preds);
  if (e.true_card >= 0) j["true_card"] = e.true_card;
  return j;
}

inline WorkloadEntry workload_entry_from_json(const nlohmann::json& j) {
  WorkloadEntry e;
  for (const auto& jp : j.at("predicates")) {
    Predicate p;
    p.column = jp.at("col").get<std::string>();
    auto op = op_from_name(jp.at("op").get<std::string>());
    if (!op) throw QueryError("unknown op in workload file: " + jp.at("op").dump());
    p.op = *op;
    const auto& lit = jp.at("lit");
    if (lit.is_array())
      p.literals = lit.get<std::vector<std::string>>();
    else if (lit.is_string())
      p.literals.push_back(lit.get<std::string>());
    else
      p.literals.push_back(lit.dump());
    e.query.predicates.push_back(std::move(p));
  }
  if (j.contains("true_card")) e.true_card = j.at("true_card").get<double>();
  return e;
}

inline void write_workload(const std::vector<WorkloadEntry>& entries, std::ostream& out) {
  for (const auto& e : entries) out << workload_entry_to_json(e).dump() << "\n";
}

inline std::vector<WorkloadEntry> read_workload(std::istream& in) {
  std::vector<WorkloadEntry> out;
  std::string line;
  int64_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    try {
      out.push_back(workload_entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw QueryError("workload line " + std::to_string(ln) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation harness

// Returns a selectivity estimate for a bound-able query; the index feeds
// per-query RNG streams.
using EstimatorFn = std::function<double(const Query&, int64_t index)>;

struct NamedEstimator {
  std::string name;
  EstimatorFn fn;
};

struct QueryOutcome {
  double true_card = 0;
  double est_card = 0;
  double q = 1;
  double seconds = 0;
};

struct BucketStats {
  int64_t count = 0;
  double median = 0, p95 = 0, p99 = 0, max = 0;
};

// Nearest-rank percentile over q-errors.
inline BucketStats bucket_stats(std::vector<double> qs) {
  BucketStats s;
  s.count = static_cast<int64_t>(qs.size());
  if (qs.empty()) return s;
  std::sort(qs.begin(), qs.end());
  auto rank = [&](double pct) {
    int64_t r = static_cast<int64_t>(std::ceil(pct / 100.0 * static_cast<double>(qs.size())));
    r = std::max<int64_t>(1, std::min<int64_t>(r, static_cast<int64_t>(qs.size())));
    return qs[static_cast<size_t>(r - 1)];
  };
  s.median = rank(50);
  s.p95 = rank(95);
  s.p99 = rank(99);
  s.max = qs.back();
  return s;
}

struct EstimatorResult {
  std::string name;
  std::vector<QueryOutcome> outcomes;
  BucketStats overall, high, medium, low;
};

struct WorkloadReport {
  int64_t row_count = 0;
  std::vector<double> true_cards;
  std::vector<int> bucket_of;  // 0 high, 1 medium, 2 low
  std::vector<EstimatorResult> estimators;

  nlohmann::json to_json(bool include_queries = true) const;
  std::string to_text() const;
};

struct EvalOptions {
  int threads = 1;
};

// Buckets by true selectivity: High (2%, 100%], Medium (0.5%, 2%], Low
// everything at or below 0.5% including empty answers.
inline int selectivity_bucket(double sel) {
  if (sel > 0.02) return 0;
  if (sel > 0.005) return 1;
  return 2;
}

inline WorkloadReport run_eval(const std::vector<NamedEstimator>& estimators,
                               const std::vector<Query>& queries, const Table& table,
                               const std::vector<double>* true_cards,
                               const EvalOptions& opts = {}) {
  WorkloadReport report;
  report.row_count = table.row_count();
  const int64_t Q = static_cast<int64_t>(queries.size());

  report.true_cards.resize(static_cast<size_t>(Q));
  if (true_cards) {
    if (static_cast<int64_t>(true_cards->size()) != Q)
      throw ConfigError("true cardinality label count does not match workload");
    report.true_cards = *true_cards;
  } else {
    for (int64_t i = 0; i < Q; ++i)
      report.true_cards[static_cast<size_t>(i)] =
          exact_selectivity(table, bind(queries[static_cast<size_t>(i)], table.meta)) *
          static_cast<double>(table.row_count());
  }
  report.bucket_of.resize(static_cast<size_t>(Q));
  for (int64_t i = 0; i < Q; ++i)
    report.bucket_of[static_cast<size_t>(i)] = selectivity_bucket(
        report.true_cards[static_cast<size_t>(i)] / static_cast<double>(table.row_count()));

  for (const auto& est : estimators) {
    EstimatorResult res;
    res.name = est.name;
    res.outcomes.resize(static_cast<size_t>(Q));
    auto work = [&](int64_t begin, int64_t end) {
      for (int64_t i = begin; i < end; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        double sel = est.fn(queries[static_cast<size_t>(i)], i);
        auto t1 = std::chrono::steady_clock::now();
        QueryOutcome& o = res.outcomes[static_cast<size_t>(i)];
        o.true_card = report.true_cards[static_cast<size_t>(i)];
        o.est_card = sel * static_cast<double>(table.row_count());
        o.q = q_error(o.est_card, o.true_card);
        o.seconds = std::chrono::duration<double>(t1 - t0).count();
      }
    };
    const int threads = std::max(1, opts.threads);
    if (threads == 1 || Q < 2) {
      work(0, Q);
    } else {
      std::vector<std::thread> pool;
      int64_t per = (Q + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        int64_t b = t * per, e = std::min(Q, b + per);
        if (b < e) pool.emplace_back(work, b, e);
      }
      for (auto& th : pool) th.join();
    }
    std::vector<double> all, hi, med, lo;
    for (int64_t i = 0; i < Q; ++i) {
      double q = res.outcomes[static_cast<size_t>(i)].q;
      all.push_back(q);
      switch (report.bucket_of[static_cast<size_t>(i)]) {
        case 0: hi.push_back(q); break;
        case 1: med.push_back(q); break;
        default: lo.push_back(q); break;
      }
    }
    res.overall = bucket_stats(std::move(all));
    res.high = bucket_stats(std::move(hi));
    res.medium = bucket_stats(std::move(med));
    res.low = bucket_stats(std::move(lo));
    report.estimators.push_back(std::move(res));
  }
  return report;
}

inline nlohmann::json WorkloadReport::to_json(bool include_queries) const {
  nlohmann::json j;
  j["row_count"] = row_count;
  j["query_count"] = true_cards.size();
  auto bucket_json = [](const BucketStats& b) {
    nlohmann::json o;
    o["count"] = b.count;
    if (b.count > 0) {
      o["median"] = b.median;
      o["p95"] = b.p95;
      o["p99"] = b.p99;
      o["max"] = b.max;
    }
    return o;
  };
  j["estimators"] = nlohmann::json::array();
  for (const auto& est : estimators) {
    nlohmann::json je;
    je["name"] = est.name;
    je["buckets"] = {{"overall", bucket_json(est.overall)},
                     {"high", bucket_json(est.high)},
                     {"medium", bucket_json(est.medium)},
                     {"low", bucket_json(est.low)}};
    if (include_queries) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& o : est.outcomes)
        rows.push_back({{"true_card", o.true_card},
                        {"est_card", o.est_card},
                        {"q_error", o.q},
                        {"seconds", o.seconds}});
      je["queries"] = std::move(rows);
    }
    j["estimators"].push_back(std::move(je));
  }
  return j;
}

inline std::string WorkloadReport::to_text() const {
  char buf[256];
  std::string out;
  auto line = [&](const char* name, const char* bucket, const BucketStats& b) {
    if (b.count == 0) {
      std::snprintf(buf, sizeof(buf), "%-16s %-8s %6lld %10s %10s %10s %10s\n", name, bucket,
                    static_cast<long long>(b.count), "-", "-", "-", "-");
    } else {
      std::snprintf(buf, sizeof(buf), "%-16s %-8s %6lld %10.3g %10.3g %10.3g %10.3g\n", name,
                    bucket, static_cast<long long>(b.count), b.median, b.p95, b.p99, b.max);
    }
    out += buf;
  };
  std::snprintf(buf, sizeof(buf), "%-16s %-8s %6s %10s %10s %10s %10s\n", "estimator", "bucket",
                "count", "median", "p95", "p99", "max");
  out += buf;
  for (const auto& est : estimators) {
    line(est.name.c_str(), "overall", est.overall);
    line(est.name.c_str(), "high", est.high);
    line(est.name.c_str(), "medium", est.medium);
    line(est.name.c_str(), "low", est.low);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic tables. All columns are integers rendered as decimal text and
// rebuilt through the ordinary ingest path, so generator output and
// re-ingested CSV agree exactly.

namespace detail {

class ZipfSampler {
 public:
  ZipfSampler(int domain, double skew = 1.0) {
    double acc = 0;
    for (int v = 0; v < domain; ++v) {
      acc += 1.0 / std::pow(static_cast<double>(v + 1), skew);
      cdf_.push_back(acc);
    }
    for (auto& x : cdf_) x /= acc;
  }
  int32_t draw(Rng& rng) const {
    double u = rng.next_unit();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int32_t>(std::min(cdf_.size() - 1,
                                         static_cast<size_t>(it - cdf_.begin())));
  }

 private:
  std::vector<double> cdf_;
};

inline Table table_from_int_rows(const std::vector<std::string>& names,
                                 const std::vector<std::vector<int32_t>>& rows) {
  std::vector<std::vector<std::string>> raw(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    raw[r].reserve(rows[r].size());
    for (int32_t v : rows[r]) raw[r].push_back(std::to_string(v));
  }
  return Table::from_raw_rows(names, raw);
}

}  // namespace detail

// Independent columns with alternating uniform and Zipf marginals.
inline Table synth_independent(int64_t rows, const std::vector<int>& domains, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x494e4450));
  std::vector<std::string> names;
  std::vector<detail::ZipfSampler> zipfs;
  for (size_t c = 0; c < domains.size(); ++c) {
    names.push_back("col" + std::to_string(c));
    zipfs.emplace_back(domains[c]);
  }
  std::vector<std::vector<int32_t>> data(static_cast<size_t>(rows),
                                         std::vector<int32_t>(domains.size()));
  for (auto& row : data)
    for (size_t c = 0; c < domains.size(); ++c)
      row[c] = (c % 2 == 0) ? static_cast<int32_t>(rng.below(static_cast<uint64_t>(domains[c])))
                            : zipfs[c].draw(rng);
  return detail::table_from_int_rows(names, data);
}

// Four small correlated columns; suited to exhaustive enumeration.
inline Table synth_small_correlated(int64_t rows, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x534d344c));
  detail::ZipfSampler zipf7(7);
  std::vector<std::vector<int32_t>> data;
  data.reserve(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    int32_t a = zipf7.draw(rng);
    int32_t b = static_cast<int32_t>((a + rng.below(3)) % 8);
    int32_t c = static_cast<int32_t>(rng.below(6));
    int32_t d = static_cast<int32_t>((c + (rng.next_unit() < 0.7 ? 0 : rng.below(5))) % 5);
    data.push_back({a, b, c, d});
  }
  return detail::table_from_int_rows({"a", "b", "c", "d"}, data);
}

// Eight columns, 200k-row scale, built from two base draws plus noise so the
// joint has a compact typical set: `trim` is a function of `make`, `county`
// follows `city` 92% of the time, `stars` and `age` are derived
// deterministically, `channel` mostly follows `trim`, `segment` is
// independent. Column independence assumptions go badly wrong here while the
// empirical joint stays learnable at this row count.
inline Table synth_benchmark(int64_t rows, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x42454e43));
  detail::ZipfSampler make_dist(30, 1.0);
  detail::ZipfSampler city_dist(24, 1.1);
  detail::ZipfSampler channel_noise(20, 1.2);
  std::vector<std::vector<int32_t>> data;
  data.reserve(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    int32_t make = make_dist.draw(rng);
    int32_t trim = (make * 17 + 5) % 30;
    int32_t city = city_dist.draw(rng);
    int32_t county = rng.next_unit() < 0.92 ? city : static_cast<int32_t>(rng.below(24));
    int32_t stars = (make + city) % 12;
    int32_t channel =
        rng.next_unit() < 0.85 ? (trim * 7 + 3) % 20 : channel_noise.draw(rng);
    int32_t age = (city * 5 + channel) % 16;
    int32_t segment = static_cast<int32_t>(rng.below(8));
    data.push_back({make, trim, city, county, stars, channel, age, segment});
  }
  return detail::table_from_int_rows(
      {"make", "trim", "city", "county", "stars", "channel", "age", "segment"}, data);
}

// Heavily skewed correlated columns: a shared latent makes rows "hot" with
// probability hot_mass, and hot rows sit at the top value of every domain.
// Cold rows are uniform over the rest.
inline Table synth_skewed(int cols, int domain, int64_t rows, double hot_mass, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x534b4557));
  std::vector<std::string> names;
  for (int c = 0; c < cols; ++c) names.push_back("s" + std::to_string(c));
  std::vector<std::vector<int32_t>> data;
  data.reserve(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    bool hot = rng.next_unit() < hot_mass;
    std::vector<int32_t> row(static_cast<size_t>(cols));
    for (int c = 0; c < cols; ++c)
      row[static_cast<size_t>(c)] =
          hot ? domain - 1 : static_cast<int32_t>(rng.below(static_cast<uint64_t>(domain - 1)));
    data.push_back(std::move(row));
  }
  return detail::table_from_int_rows(names, data);
}

}  // namespace naru
