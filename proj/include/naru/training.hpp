#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <utility>
#include <vector>

#include "naru/common.hpp"
#include "naru/model.hpp"
#include "naru/table.hpp"

namespace naru {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 256;
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool wildcard_augment = true;
  uint64_t seed = 42;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
      throw ConfigError("adam betas must be in [0,1)");
    if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
  }
};

struct EpochStats {
  int epoch = 0;          // 1-based
  double xent_bits = 0;   // cross entropy on the unmasked training table
  double gap_bits = 0;    // xent - data entropy
  double seconds = 0;
};

struct TrainReport {
  double data_entropy_bits = 0;
  std::vector<EpochStats> epochs;

  const EpochStats& last() const { return epochs.back(); }
};

// Mean NLL of a batch in nats plus per-parameter gradients. `inputs` may
// contain MASK ids; targets always carry the original values.
inline std::pair<double, std::vector<Tensor>> nll_loss(const Model& m, const int32_t* inputs,
                                                       const int32_t* targets, int batch) {
  if (batch < 1) throw ConfigError("batch must be non-empty");
  Runner runner(m, batch);
  auto grads = m.grad_like();
  double loss = runner.mean_nll(inputs, targets, batch, &grads);
  return {loss, std::move(grads)};
}

inline std::pair<double, std::vector<Tensor>> nll_loss(const Model& m,
                                                       const std::vector<int32_t>& batch_ids) {
  int batch = static_cast<int>(batch_ids.size() / static_cast<size_t>(m.n()));
  return nll_loss(m, batch_ids.data(), batch_ids.data(), batch);
}

// Per tuple, draw w uniformly from {0,...,n-1}; each column is independently
// replaced by MASK with probability w/n. Applied to inputs only; loss targets
// keep the original ids.
inline void wildcard_augment(int32_t* batch_ids, int batch, int n, Rng& rng) {
  for (int b = 0; b < batch; ++b) {
    uint64_t w = rng.below(static_cast<uint64_t>(n));
    double rate = static_cast<double>(w) / n;
    int32_t* tuple = batch_ids + static_cast<size_t>(b) * n;
    for (int c = 0; c < n; ++c)
      if (rng.next_unit() < rate) tuple[c] = kMaskId;
  }
}

struct AdamState {
  std::vector<Tensor> m, v;
  int64_t step = 0;

  static AdamState init(const Model& model) {
    AdamState s;
    s.m = model.grad_like();
    s.v = model.grad_like();
    return s;
  }
};

// Standard Adam with bias correction. Masked gradient entries are zero, so
// masked weights never move.
inline void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                      AdamState& state, const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t t = 0; t < params.size(); ++t) {
    double* p = params[t].data();
    const double* g = grads[t].data();
    double* mm = state.m[t].data();
    double* vv = state.v[t].data();
    const int64_t count = params[t].size();
    for (int64_t i = 0; i < count; ++i) {
      mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * g[i];
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      double mhat = mm[i] / bc1;
      double vhat = vv[i] / bc2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

// Maximum-likelihood training: shuffled epochs over the table, optional
// wildcard masking of inputs, Adam updates. After each epoch the cross
// entropy of the unmasked table is measured and reported against the exact
// data entropy. Deterministic for a fixed seed.
inline TrainReport train(Model& model, const Table& table, const TrainConfig& cfg,
                         std::ostream* log_jsonl = nullptr) {
  cfg.validate();
  if (table.row_count() < 1) throw ConfigError("cannot train on an empty table");

  TrainReport report;
  report.data_entropy_bits = data_entropy_bits(table);

  const int n = model.n();
  const int64_t rows = table.row_count();
  const int bs = static_cast<int>(std::min<int64_t>(cfg.batch_size, rows));
  Runner runner(model, bs);
  Runner eval_runner(model, static_cast<int>(std::min<int64_t>(1024, rows)));
  AdamState adam = AdamState::init(model);
  auto grads = model.grad_like();

  Rng shuffle_rng(mix_seed(cfg.seed, 1));
  Rng augment_rng(mix_seed(cfg.seed, 2));

  std::vector<int64_t> index(static_cast<size_t>(rows));
  for (int64_t i = 0; i < rows; ++i) index[static_cast<size_t>(i)] = i;
  std::vector<int32_t> inputs(static_cast<size_t>(bs) * n);
  std::vector<int32_t> targets(static_cast<size_t>(bs) * n);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(index);
    for (int64_t start = 0; start < rows; start += bs) {
      const int b = static_cast<int>(std::min<int64_t>(bs, rows - start));
      for (int i = 0; i < b; ++i) {
        const int32_t* src = table.row(index[static_cast<size_t>(start + i)]);
        std::memcpy(targets.data() + static_cast<size_t>(i) * n, src,
                    sizeof(int32_t) * static_cast<size_t>(n));
      }
      std::memcpy(inputs.data(), targets.data(), sizeof(int32_t) * static_cast<size_t>(b) * n);
      if (cfg.wildcard_augment) wildcard_augment(inputs.data(), b, n, augment_rng);
      for (auto& g : grads) g.fill(0.0);
      runner.mean_nll(inputs.data(), targets.data(), b, &grads);
      adam_step(model.params, grads, adam, cfg);
    }

    // Goodness-of-fit pass on the unmasked table.
    double nll_sum = 0;
    const int eb = eval_runner.capacity();
    for (int64_t start = 0; start < rows; start += eb) {
      const int b = static_cast<int>(std::min<int64_t>(eb, rows - start));
      nll_sum += eval_runner.mean_nll(table.rows.data() + static_cast<size_t>(start) * n,
                                      table.rows.data() + static_cast<size_t>(start) * n, b,
                                      nullptr) *
                 b;
    }
    double xent_bits = nll_sum / static_cast<double>(rows) / std::log(2.0);

    EpochStats st;
    st.epoch = epoch;
    st.xent_bits = xent_bits;
    st.gap_bits = xent_bits - report.data_entropy_bits;
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(st);
    if (log_jsonl) {
      (*log_jsonl) << "{\"epoch\":" << st.epoch << ",\"xent_bits\":" << st.xent_bits
                   << ",\"gap_bits\":" << st.gap_bits << ",\"seconds\":" << st.seconds << "}\n";
      log_jsonl->flush();
    }
  }
  model.wildcard_trained = model.wildcard_trained || cfg.wildcard_augment;
  return report;
}

}  // namespace naru
