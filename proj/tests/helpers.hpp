#pragma once

#include <string>
#include <vector>

#include "naru/model.hpp"
#include "naru/query.hpp"
#include "naru/table.hpp"
#include "naru/training.hpp"

namespace testing {

inline naru::Table make_table(const std::vector<std::string>& names,
                              const std::vector<std::vector<std::string>>& rows) {
  return naru::Table::from_raw_rows(names, rows);
}

inline naru::Table int_table(const std::vector<std::string>& names,
                             const std::vector<std::vector<int>>& rows) {
  std::vector<std::vector<std::string>> raw;
  for (const auto& r : rows) {
    std::vector<std::string> s;
    for (int v : r) s.push_back(std::to_string(v));
    raw.push_back(std::move(s));
  }
  return naru::Table::from_raw_rows(names, raw);
}

inline naru::Query one_pred(const std::string& col, naru::Op op, const std::string& lit) {
  naru::Query q;
  q.predicates.push_back({col, op, {lit}});
  return q;
}

// Central finite differences over every free parameter entry. Returns the
// largest relative error between analytic and numeric gradients.
inline double max_grad_rel_error(naru::Model& m, const std::vector<int32_t>& inputs,
                                 const std::vector<int32_t>& targets, int batch,
                                 double step = 1e-5) {
  auto [loss, grads] = naru::nll_loss(m, inputs.data(), targets.data(), batch);
  (void)loss;
  double worst = 0;
  for (size_t t = 0; t < m.params.size(); ++t) {
    for (int64_t i = 0; i < m.params[t].size(); ++i) {
      if (!m.is_free_param(static_cast<int>(t), i)) continue;
      double saved = m.params[t].v[static_cast<size_t>(i)];
      m.params[t].v[static_cast<size_t>(i)] = saved + step;
      double up = naru::Runner(m, batch).mean_nll(inputs.data(), targets.data(), batch, nullptr);
      m.params[t].v[static_cast<size_t>(i)] = saved - step;
      double down = naru::Runner(m, batch).mean_nll(inputs.data(), targets.data(), batch, nullptr);
      m.params[t].v[static_cast<size_t>(i)] = saved;
      double fd = (up - down) / (2 * step);
      double an = grads[t].v[static_cast<size_t>(i)];
      double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

}  // namespace testing
