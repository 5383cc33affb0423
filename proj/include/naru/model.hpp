#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "naru/common.hpp"
#include "naru/table.hpp"
#include "naru/tensor.hpp"

namespace naru {

// Input slot value meaning "column absent"; encodes to the per-column MASK
// token (learned vector for embedded columns, indicator slot for one-hot).
inline constexpr int32_t kMaskId = -1;

struct ModelConfig {
  std::vector<int> hidden_sizes = {64, 64};
  bool residual = false;        // identity skips between equal-width hidden layers
  int onehot_threshold = 64;    // domains larger than this use embeddings
  int embedding_dim = 64;       // h
  bool embedding_reuse = true;  // tie the output head to the embedding matrix
  std::vector<int> ordering;    // column permutation; empty means natural
  uint64_t seed = 42;

  void validate(int n_cols) const {
    if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must be non-empty");
    for (int f : hidden_sizes)
      if (f <= 0) throw ConfigError("hidden layer size must be >= 1");
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
    if (onehot_threshold < 1) throw ConfigError("onehot_threshold must be >= 1");
    if (!ordering.empty()) {
      if (static_cast<int>(ordering.size()) != n_cols)
        throw ConfigError("ordering length must equal column count");
      std::vector<bool> seen(static_cast<size_t>(n_cols), false);
      for (int p : ordering) {
        if (p < 0 || p >= n_cols || seen[static_cast<size_t>(p)])
          throw ConfigError("ordering must be a permutation of columns");
        seen[static_cast<size_t>(p)] = true;
      }
    }
  }
};

// Masked multi-layer perceptron over dictionary-encoded tuples. One forward
// pass yields, for every column, the conditional distribution of that column
// given the columns placed before it in the model's ordering. Connectivity
// masks make this structural: the output block at order position p is a
// function of input blocks at positions < p only.
class Model {
 public:
  ModelConfig cfg;
  TableMeta meta;               // dictionaries + row count of the training table
  std::vector<int> order;       // order[p] = column index at position p
  std::vector<int> pos_of;      // inverse permutation
  bool wildcard_trained = false;

  struct Coding {
    bool embedded = false;  // embedding encoder (vs one-hot + mask slot)
    bool reuse = false;     // h-wide head decoded through the embedding matrix
    int in_off = 0, in_w = 0;
    int out_off = 0, out_w = 0;
    int emb = -1;      // param index of the |A_i| x h embedding matrix
    int maskvec = -1;  // param index of the learned MASK vector
  };
  std::vector<Coding> coding;  // by column index
  int in_dim = 0, out_dim = 0;

  struct Layer {
    int w = -1, b = -1;  // param indices
    int in = 0, out = 0;
    bool skip = false;
    std::vector<uint8_t> mask;  // in x out, 1 = connection allowed
  };
  std::vector<Layer> hidden;
  Layer out_layer;

  std::vector<Tensor> params;
  std::vector<std::string> param_names;

  int n() const { return meta.n(); }
  int64_t domain(int col) const { return meta.columns[static_cast<size_t>(col)].domain_size(); }

  static Model build(const ModelConfig& config, const TableMeta& table_meta);

  std::vector<Tensor> grad_like() const {
    std::vector<Tensor> g;
    g.reserve(params.size());
    for (const auto& p : params) g.emplace_back(p.shape);
    return g;
  }

  void zero_params() {
    for (auto& p : params) p.fill(0.0);
  }

  // Zeroes gradient entries of masked-out connections; those entries are not
  // free parameters.
  void mask_grads(std::vector<Tensor>& grads) const {
    auto apply = [&](const Layer& l) {
      double* g = grads[static_cast<size_t>(l.w)].data();
      for (size_t i = 0; i < l.mask.size(); ++i)
        if (!l.mask[i]) g[i] = 0.0;
    };
    for (const auto& l : hidden) apply(l);
    apply(out_layer);
  }

  // True if a parameter entry is a free parameter (unmasked).
  bool is_free_param(int tensor_idx, int64_t flat_idx) const {
    for (const auto& l : hidden)
      if (l.w == tensor_idx) return l.mask[static_cast<size_t>(flat_idx)] != 0;
    if (out_layer.w == tensor_idx)
      return out_layer.mask[static_cast<size_t>(flat_idx)] != 0;
    return true;
  }

  // Distributions indexed by order position; entry p is over the domain of
  // column order[p]. Mask ids are allowed.
  std::vector<std::vector<double>> forward(const std::vector<int32_t>& tuple_by_column) const;

  // Product of the n conditionals read at the tuple's ids. No mask entries.
  double point_density(const std::vector<int32_t>& tuple_by_column) const;

  void check_ids(const int32_t* ids, bool allow_mask) const {
    for (int c = 0; c < n(); ++c) {
      int32_t v = ids[c];
      if (v == kMaskId) {
        if (allow_mask) continue;
        throw ValueError("MASK id not allowed here (column " + std::to_string(c) + ")");
      }
      if (v < 0 || v >= domain(c))
        throw ValueError("id " + std::to_string(v) + " out of range for column " +
                         std::to_string(c));
    }
  }
};

inline Model Model::build(const ModelConfig& config, const TableMeta& table_meta) {
  config.validate(table_meta.n());
  Model m;
  m.cfg = config;
  m.meta = table_meta;
  const int n = m.n();

  m.order = config.ordering;
  if (m.order.empty()) {
    m.order.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) m.order[static_cast<size_t>(i)] = i;
  }
  m.cfg.ordering = m.order;
  m.pos_of.assign(static_cast<size_t>(n), 0);
  for (int p = 0; p < n; ++p) m.pos_of[static_cast<size_t>(m.order[static_cast<size_t>(p)])] = p;

  const int h = config.embedding_dim;
  m.coding.resize(static_cast<size_t>(n));
  int in_off = 0, out_off = 0;
  for (int p = 0; p < n; ++p) {
    int c = m.order[static_cast<size_t>(p)];
    Coding& cd = m.coding[static_cast<size_t>(c)];
    int64_t D = m.domain(c);
    cd.embedded = D > config.onehot_threshold;
    cd.reuse = cd.embedded && config.embedding_reuse;
    cd.in_w = cd.embedded ? h : static_cast<int>(D) + 1;  // +1 = mask indicator slot
    cd.out_w = cd.reuse ? h : static_cast<int>(D);
    cd.in_off = in_off;
    cd.out_off = out_off;
    in_off += cd.in_w;
    out_off += cd.out_w;
  }
  m.in_dim = in_off;
  m.out_dim = out_off;

  // Order-position labels, 1-based. An input block at position p carries
  // label p+1; hidden units take labels 1..n-1 round-robin; a connection is
  // allowed downstream when its label is >= the upstream label, and an output
  // block at position p accepts hidden labels <= p. Position 0 therefore
  // depends on nothing but its bias.
  std::vector<int> in_labels(static_cast<size_t>(m.in_dim));
  for (int c = 0; c < n; ++c) {
    const Coding& cd = m.coding[static_cast<size_t>(c)];
    int label = m.pos_of[static_cast<size_t>(c)] + 1;
    for (int k = 0; k < cd.in_w; ++k) in_labels[static_cast<size_t>(cd.in_off + k)] = label;
  }
  auto hidden_label = [&](int j) { return n == 1 ? 0 : 1 + (j % (n - 1)); };

  // Parameters: embeddings and mask vectors first (column order), then hidden
  // layers, then the output layer. This is also the serialization order.
  auto add_param = [&](const std::string& name, std::vector<int64_t> shape) {
    m.param_names.push_back(name);
    m.params.emplace_back(std::move(shape));
    return static_cast<int>(m.params.size()) - 1;
  };
  for (int c = 0; c < n; ++c) {
    Coding& cd = m.coding[static_cast<size_t>(c)];
    if (!cd.embedded) continue;
    cd.emb = add_param("emb_" + std::to_string(c), {m.domain(c), h});
    cd.maskvec = add_param("maskvec_" + std::to_string(c), {h});
  }

  std::vector<int> prev_labels = in_labels;
  int prev_dim = m.in_dim;
  for (size_t l = 0; l < config.hidden_sizes.size(); ++l) {
    int F = config.hidden_sizes[l];
    Layer layer;
    layer.in = prev_dim;
    layer.out = F;
    layer.skip = config.residual && l > 0 && prev_dim == F;
    layer.w = add_param("w" + std::to_string(l), {prev_dim, F});
    layer.b = add_param("b" + std::to_string(l), {F});
    layer.mask.resize(static_cast<size_t>(prev_dim) * F);
    std::vector<int> labels(static_cast<size_t>(F));
    for (int j = 0; j < F; ++j) labels[static_cast<size_t>(j)] = hidden_label(j);
    for (int i = 0; i < prev_dim; ++i)
      for (int j = 0; j < F; ++j)
        layer.mask[static_cast<size_t>(i) * F + j] =
            labels[static_cast<size_t>(j)] >= prev_labels[static_cast<size_t>(i)] ? 1 : 0;
    m.hidden.push_back(std::move(layer));
    prev_labels = std::move(labels);
    prev_dim = F;
  }

  m.out_layer.in = prev_dim;
  m.out_layer.out = m.out_dim;
  m.out_layer.w = add_param("w_out", {prev_dim, m.out_dim});
  m.out_layer.b = add_param("b_out", {m.out_dim});
  m.out_layer.mask.resize(static_cast<size_t>(prev_dim) * m.out_dim);
  for (int c = 0; c < n; ++c) {
    const Coding& cd = m.coding[static_cast<size_t>(c)];
    int pos = m.pos_of[static_cast<size_t>(c)];
    for (int i = 0; i < prev_dim; ++i) {
      uint8_t ok = prev_labels[static_cast<size_t>(i)] <= pos ? 1 : 0;
      for (int k = 0; k < cd.out_w; ++k)
        m.out_layer.mask[static_cast<size_t>(i) * m.out_dim + cd.out_off + k] = ok;
    }
  }

  // He-style scaled uniform init from the seeded stream; masked entries are
  // zeroed afterwards and stay zero (their gradients are masked too).
  Rng rng(config.seed);
  for (int c = 0; c < n; ++c) {
    const Coding& cd = m.coding[static_cast<size_t>(c)];
    if (!cd.embedded) continue;
    double bound = std::sqrt(3.0 / h);
    for (auto& x : m.params[static_cast<size_t>(cd.emb)].v) x = rng.uniform(-bound, bound);
    for (auto& x : m.params[static_cast<size_t>(cd.maskvec)].v) x = rng.uniform(-bound, bound);
  }
  auto init_layer = [&](const Layer& l) {
    double bound = std::sqrt(6.0 / l.in);
    auto& w = m.params[static_cast<size_t>(l.w)].v;
    for (auto& x : w) x = rng.uniform(-bound, bound);
    for (size_t i = 0; i < l.mask.size(); ++i)
      if (!l.mask[i]) w[i] = 0.0;
  };
  for (const auto& l : m.hidden) init_layer(l);
  init_layer(m.out_layer);
  return m;
}

// ---------------------------------------------------------------------------
// Batched execution engine. Holds scratch for a fixed batch capacity;
// per-row results are independent of the other rows in the batch, so batch
// partitioning never changes outputs.
class Runner {
 public:
  Runner(const Model& m, int capacity)
      : m_(m), cap_(capacity), x_(sz(capacity, m.in_dim)), dx_(sz(capacity, m.in_dim)),
        o_(sz(capacity, m.out_dim)), do_(sz(capacity, m.out_dim)) {
    for (const auto& l : m.hidden) {
      a_.emplace_back(sz(capacity, l.out));
      h_.emplace_back(sz(capacity, l.out));
      dh_.emplace_back(sz(capacity, l.out));
      max_f_ = std::max(max_f_, l.out);
    }
    dpre_.assign(sz(capacity, max_f_), 0.0);
    for (int c = 0; c < m.n(); ++c) {
      const auto& cd = m.coding[static_cast<size_t>(c)];
      if (cd.reuse)
        reuse_logits_.emplace_back(sz(capacity, static_cast<int>(m.domain(c))));
      else
        reuse_logits_.emplace_back();
      has_embedded_ = has_embedded_ || cd.embedded;
    }
  }

  const Model& model() const { return m_; }
  int capacity() const { return cap_; }

  // ids: B x n, column-index order, kMaskId allowed. Runs encoder + hidden
  // stack; output heads are computed on demand.
  void forward_hidden(const int32_t* ids, int B) {
    encode(ids, B);
    const double* prev = x_.data();
    int prev_dim = m_.in_dim;
    for (size_t l = 0; l < m_.hidden.size(); ++l) {
      const auto& layer = m_.hidden[l];
      const double* W = m_.params[static_cast<size_t>(layer.w)].data();
      const double* bias = m_.params[static_cast<size_t>(layer.b)].data();
      double* A = a_[l].data();
      matmul(prev, prev_dim, W, layer.out, A, layer.out, B, prev_dim, layer.out, false);
      add_bias(A, layer.out, bias, B, layer.out);
      relu(A, A, static_cast<int64_t>(B) * layer.out);
      double* H = h_[l].data();
      if (layer.skip) {
        for (int64_t i = 0; i < static_cast<int64_t>(B) * layer.out; ++i)
          H[i] = A[i] + prev[i];
      } else {
        std::memcpy(H, A, sizeof(double) * static_cast<size_t>(B) * layer.out);
      }
      prev = H;
      prev_dim = layer.out;
    }
  }

  // Normalized conditional of one column for every row; out is B x D.
  // Requires forward_hidden first.
  void column_probs(int col, int B, double* out) {
    const auto& cd = m_.coding[static_cast<size_t>(col)];
    const int D = static_cast<int>(m_.domain(col));
    const double* H = last_hidden(B);
    const double* W = m_.params[static_cast<size_t>(m_.out_layer.w)].data();
    const double* bias = m_.params[static_cast<size_t>(m_.out_layer.b)].data();
    if (!cd.reuse) {
      matmul(H, m_.out_layer.in, W + cd.out_off, m_.out_dim, out, D, B, m_.out_layer.in, D,
             false);
      add_bias(out, D, bias + cd.out_off, B, D);
    } else {
      scratch_.assign(static_cast<size_t>(B) * cd.out_w, 0.0);
      matmul(H, m_.out_layer.in, W + cd.out_off, m_.out_dim, scratch_.data(), cd.out_w, B,
             m_.out_layer.in, cd.out_w, false);
      add_bias(scratch_.data(), cd.out_w, bias + cd.out_off, B, cd.out_w);
      const double* E = m_.params[static_cast<size_t>(cd.emb)].data();
      matmul_bt(scratch_.data(), cd.out_w, E, cd.out_w, out, D, B, cd.out_w, D);
    }
    for (int b = 0; b < B; ++b) softmax_row(out + static_cast<size_t>(b) * D, D);
  }

  // Joint density of full tuples (no masks): product of the conditionals
  // read at each tuple's ids. out has B entries.
  void point_density(const int32_t* ids, int B, double* out) {
    forward_hidden(ids, B);
    forward_output(B);
    for (int b = 0; b < B; ++b) out[b] = 1.0;
    for (int p = 0; p < m_.n(); ++p) {
      int c = m_.order[static_cast<size_t>(p)];
      const auto& cd = m_.coding[static_cast<size_t>(c)];
      const int D = static_cast<int>(m_.domain(c));
      for (int b = 0; b < B; ++b) {
        const double* logits = head_logits(cd, b, D);
        out[b] *= prob_at(logits, D, ids[static_cast<size_t>(b) * m_.n() + c]);
      }
    }
  }

  // Mean negative log likelihood in nats. When grads is non-null, reverse-mode
  // gradients are accumulated into it (masked entries zeroed).
  double mean_nll(const int32_t* input_ids, const int32_t* target_ids, int B,
                  std::vector<Tensor>* grads) {
    forward_hidden(input_ids, B);
    forward_output(B);
    if (grads && has_embedded_) std::fill(dx_.begin(), dx_.end(), 0.0);
    double nll = 0.0;
    const double inv_b = 1.0 / B;
    for (int c = 0; c < m_.n(); ++c) {
      const auto& cd = m_.coding[static_cast<size_t>(c)];
      const int D = static_cast<int>(m_.domain(c));
      const double* logits_base;
      int lld;
      if (cd.reuse) {
        double* L = reuse_logits_[static_cast<size_t>(c)].data();
        const double* E = m_.params[static_cast<size_t>(cd.emb)].data();
        matmul_bt(o_.data() + cd.out_off, m_.out_dim, E, cd.out_w, L, D, B, cd.out_w, D);
        logits_base = L;
        lld = D;
      } else {
        logits_base = o_.data() + cd.out_off;
        lld = m_.out_dim;
      }
      // dlogits overwrite the reuse scratch in place; for plain heads they go
      // into the matching block of dO.
      double* dl_base = nullptr;
      int dld = 0;
      if (grads) {
        dl_base = cd.reuse ? reuse_logits_[static_cast<size_t>(c)].data()
                           : do_.data() + cd.out_off;
        dld = cd.reuse ? D : m_.out_dim;
      }
      for (int b = 0; b < B; ++b) {
        const double* row = logits_base + static_cast<size_t>(b) * lld;
        int32_t t = target_ids[static_cast<size_t>(b) * m_.n() + c];
        double mx = row[0];
        for (int j = 1; j < D; ++j) mx = std::max(mx, row[j]);
        double sum = 0;
        for (int j = 0; j < D; ++j) sum += std::exp(row[j] - mx);
        nll -= row[t] - mx - std::log(sum);
        if (grads) {
          double* d = dl_base + static_cast<size_t>(b) * dld;
          double scale = inv_b / sum;
          for (int j = 0; j < D; ++j) d[j] = std::exp(row[j] - mx) * scale;
          d[t] -= inv_b;
        }
      }
      if (grads && cd.reuse) {
        // dO block = dlogits @ E ; dE += dlogits^T @ O block
        double* L = reuse_logits_[static_cast<size_t>(c)].data();
        const double* E = m_.params[static_cast<size_t>(cd.emb)].data();
        matmul(L, D, E, cd.out_w, do_.data() + cd.out_off, m_.out_dim, B, D, cd.out_w, false);
        matmul_at_accum(L, D, o_.data() + cd.out_off, m_.out_dim,
                        (*grads)[static_cast<size_t>(cd.emb)].data(), cd.out_w, B, D, cd.out_w);
      }
    }
    nll *= inv_b;
    if (grads) backward(input_ids, B, *grads);
    return nll;
  }

 private:
  static size_t sz(int b, int d) { return static_cast<size_t>(b) * static_cast<size_t>(d); }

  void encode(const int32_t* ids, int B) {
    std::fill(x_.begin(), x_.begin() + sz(B, m_.in_dim), 0.0);
    const int n = m_.n();
    for (int b = 0; b < B; ++b) {
      double* row = x_.data() + sz(b, m_.in_dim);
      const int32_t* tuple = ids + static_cast<size_t>(b) * n;
      for (int c = 0; c < n; ++c) {
        const auto& cd = m_.coding[static_cast<size_t>(c)];
        int32_t v = tuple[c];
        if (!cd.embedded) {
          row[cd.in_off + (v == kMaskId ? cd.in_w - 1 : v)] = 1.0;
        } else {
          const double* src =
              v == kMaskId
                  ? m_.params[static_cast<size_t>(cd.maskvec)].data()
                  : m_.params[static_cast<size_t>(cd.emb)].data() + sz(v, cd.in_w);
          std::memcpy(row + cd.in_off, src, sizeof(double) * static_cast<size_t>(cd.in_w));
        }
      }
    }
  }

  void forward_output(int B) {
    const double* H = last_hidden(B);
    const double* W = m_.params[static_cast<size_t>(m_.out_layer.w)].data();
    const double* bias = m_.params[static_cast<size_t>(m_.out_layer.b)].data();
    matmul(H, m_.out_layer.in, W, m_.out_dim, o_.data(), m_.out_dim, B, m_.out_layer.in,
           m_.out_dim, false);
    add_bias(o_.data(), m_.out_dim, bias, B, m_.out_dim);
  }

  const double* last_hidden(int) const {
    return m_.hidden.empty() ? x_.data() : h_.back().data();
  }

  const double* head_logits(const Model::Coding& cd, int b, int D) {
    if (!cd.reuse) return o_.data() + sz(b, m_.out_dim) + cd.out_off;
    // Row-wise decode through the embedding matrix.
    scratch_.resize(static_cast<size_t>(D));
    const double* E = m_.params[static_cast<size_t>(cd.emb)].data();
    const double* blk = o_.data() + sz(b, m_.out_dim) + cd.out_off;
    matmul_bt(blk, cd.out_w, E, cd.out_w, scratch_.data(), D, 1, cd.out_w, D);
    return scratch_.data();
  }

  static double prob_at(const double* logits, int D, int32_t t) {
    double mx = logits[0];
    for (int j = 1; j < D; ++j) mx = std::max(mx, logits[j]);
    double sum = 0;
    for (int j = 0; j < D; ++j) sum += std::exp(logits[j] - mx);
    return std::exp(logits[t] - mx) / sum;
  }

  static void softmax_row(double* row, int D) {
    double mx = row[0];
    for (int j = 1; j < D; ++j) mx = std::max(mx, row[j]);
    double sum = 0;
    for (int j = 0; j < D; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    double inv = 1.0 / sum;
    for (int j = 0; j < D; ++j) row[j] *= inv;
  }

  void backward(const int32_t* input_ids, int B, std::vector<Tensor>& grads) {
    // Output layer.
    {
      const auto& l = m_.out_layer;
      const double* H = last_hidden(B);
      double* gW = grads[static_cast<size_t>(l.w)].data();
      double* gB = grads[static_cast<size_t>(l.b)].data();
      matmul_at_accum(H, l.in, do_.data(), l.out, gW, l.out, B, l.in, l.out);
      for (int b = 0; b < B; ++b) {
        const double* d = do_.data() + sz(b, l.out);
        for (int j = 0; j < l.out; ++j) gB[j] += d[j];
      }
      const double* W = m_.params[static_cast<size_t>(l.w)].data();
      double* dH = m_.hidden.empty() ? dx_.data() : dh_.back().data();
      matmul_bt(do_.data(), l.out, W, l.out, dH, l.in, B, l.out, l.in);
    }
    // Hidden stack, top down.
    for (size_t li = m_.hidden.size(); li-- > 0;) {
      const auto& l = m_.hidden[li];
      const double* A = a_[li].data();
      double* dH = dh_[li].data();
      double* dpre = dpre_.data();
      for (int64_t i = 0; i < static_cast<int64_t>(B) * l.out; ++i)
        dpre[i] = A[i] > 0.0 ? dH[i] : 0.0;
      double* gB = grads[static_cast<size_t>(l.b)].data();
      for (int b = 0; b < B; ++b) {
        const double* d = dpre + sz(b, l.out);
        for (int j = 0; j < l.out; ++j) gB[j] += d[j];
      }
      const double* prev = li == 0 ? x_.data() : h_[li - 1].data();
      double* gW = grads[static_cast<size_t>(l.w)].data();
      matmul_at_accum(prev, l.in, dpre, l.out, gW, l.out, B, l.in, l.out);
      bool need_dprev = li > 0 || has_embedded_;
      if (need_dprev) {
        double* dprev = li == 0 ? dx_.data() : dh_[li - 1].data();
        const double* W = m_.params[static_cast<size_t>(l.w)].data();
        matmul_bt(dpre, l.out, W, l.out, dprev, l.in, B, l.out, l.in);
        if (l.skip) {
          for (int64_t i = 0; i < static_cast<int64_t>(B) * l.out; ++i) dprev[i] += dH[i];
        }
      }
    }
    // Encoder parameters.
    if (has_embedded_) {
      const int n = m_.n();
      for (int b = 0; b < B; ++b) {
        const double* drow = dx_.data() + sz(b, m_.in_dim);
        const int32_t* tuple = input_ids + static_cast<size_t>(b) * n;
        for (int c = 0; c < n; ++c) {
          const auto& cd = m_.coding[static_cast<size_t>(c)];
          if (!cd.embedded) continue;
          double* dst = tuple[c] == kMaskId
                            ? grads[static_cast<size_t>(cd.maskvec)].data()
                            : grads[static_cast<size_t>(cd.emb)].data() + sz(tuple[c], cd.in_w);
          for (int k = 0; k < cd.in_w; ++k) dst[k] += drow[cd.in_off + k];
        }
      }
    }
    m_.mask_grads(grads);
  }

  const Model& m_;
  int cap_;
  int max_f_ = 0;
  bool has_embedded_ = false;
  std::vector<double> x_, dx_, o_, do_, dpre_, scratch_;
  std::vector<std::vector<double>> a_, h_, dh_;
  std::vector<std::vector<double>> reuse_logits_;  // per column, only reuse heads
};

inline std::vector<std::vector<double>> Model::forward(
    const std::vector<int32_t>& tuple_by_column) const {
  if (static_cast<int>(tuple_by_column.size()) != n()) throw ValueError("tuple arity mismatch");
  check_ids(tuple_by_column.data(), /*allow_mask=*/true);
  Runner r(*this, 1);
  r.forward_hidden(tuple_by_column.data(), 1);
  std::vector<std::vector<double>> out(static_cast<size_t>(n()));
  for (int p = 0; p < n(); ++p) {
    int c = order[static_cast<size_t>(p)];
    out[static_cast<size_t>(p)].resize(static_cast<size_t>(domain(c)));
    r.column_probs(c, 1, out[static_cast<size_t>(p)].data());
  }
  return out;
}

inline double Model::point_density(const std::vector<int32_t>& tuple_by_column) const {
  if (static_cast<int>(tuple_by_column.size()) != n()) throw ValueError("tuple arity mismatch");
  check_ids(tuple_by_column.data(), /*allow_mask=*/false);
  Runner r(*this, 1);
  double out = 0;
  r.point_density(tuple_by_column.data(), 1, &out);
  return out;
}

}  // namespace naru
