#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "naru/common.hpp"
#include "naru/table.hpp"

namespace naru {

enum class Op { Eq, Ne, Lt, Le, Gt, Ge, In };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::In: return "IN";
  }
  return "?";
}

inline std::optional<Op> op_from_name(std::string_view s) {
  if (s == "=" || s == "==") return Op::Eq;
  if (s == "!=" || s == "<>") return Op::Ne;
  if (s == "<") return Op::Lt;
  if (s == "<=") return Op::Le;
  if (s == ">") return Op::Gt;
  if (s == ">=") return Op::Ge;
  if (s == "IN" || s == "in") return Op::In;
  return std::nullopt;
}

// One single-column filter. IN carries one or more literals, every other
// operator exactly one.
struct Predicate {
  std::string column;
  Op op = Op::Eq;
  std::vector<std::string> literals;
};

// A conjunction of predicates.
struct Query {
  std::vector<Predicate> predicates;
};

struct IdInterval {
  int32_t lo = 0;  // inclusive
  int32_t hi = 0;  // exclusive
  bool operator==(const IdInterval& o) const { return lo == o.lo && hi == o.hi; }
};

// Valid id set of one column: either the whole domain (wildcard) or a sorted
// list of disjoint non-adjacent intervals. Empty list with wildcard=false is
// the empty region.
struct ColumnRegion {
  int32_t domain = 0;
  bool wildcard = true;
  std::vector<IdInterval> intervals;

  bool empty() const { return !wildcard && intervals.empty(); }

  int64_t count() const {
    if (wildcard) return domain;
    int64_t c = 0;
    for (const auto& iv : intervals) c += iv.hi - iv.lo;
    return c;
  }

  bool contains(int32_t id) const {
    if (wildcard) return id >= 0 && id < domain;
    auto it = std::upper_bound(intervals.begin(), intervals.end(), id,
                               [](int32_t v, const IdInterval& iv) { return v < iv.lo; });
    if (it == intervals.begin()) return false;
    --it;
    return id >= it->lo && id < it->hi;
  }

  // id of the k-th member, 0 <= k < count().
  int32_t nth(int64_t k) const {
    if (wildcard) return static_cast<int32_t>(k);
    for (const auto& iv : intervals) {
      int64_t w = iv.hi - iv.lo;
      if (k < w) return static_cast<int32_t>(iv.lo + k);
      k -= w;
    }
    throw Error("nth out of range");
  }

  int32_t first() const {
    if (wildcard) return 0;
    return intervals.front().lo;
  }

  bool operator==(const ColumnRegion& o) const {
    return domain == o.domain && wildcard == o.wildcard && intervals == o.intervals;
  }
};

struct Region {
  std::vector<ColumnRegion> columns;

  int n() const { return static_cast<int>(columns.size()); }

  bool any_empty() const {
    for (const auto& c : columns)
      if (c.empty()) return true;
    return false;
  }

  bool all_wildcard() const {
    for (const auto& c : columns)
      if (!c.wildcard) return false;
    return true;
  }

  bool contains_row(const int32_t* row) const {
    for (int c = 0; c < n(); ++c)
      if (!columns[static_cast<size_t>(c)].wildcard &&
          !columns[static_cast<size_t>(c)].contains(row[c]))
        return false;
    return true;
  }

  bool operator==(const Region& o) const { return columns == o.columns; }
};

namespace detail {

// Canonicalize: drop empties, sort, merge overlapping and adjacent
// intervals, collapse full coverage to wildcard.
inline void normalize(ColumnRegion& r) {
  if (r.wildcard) {
    r.intervals.clear();
    return;
  }
  auto& iv = r.intervals;
  iv.erase(std::remove_if(iv.begin(), iv.end(), [](const IdInterval& x) { return x.hi <= x.lo; }),
           iv.end());
  std::sort(iv.begin(), iv.end(), [](const IdInterval& a, const IdInterval& b) { return a.lo < b.lo; });
  std::vector<IdInterval> merged;
  for (const auto& x : iv) {
    if (!merged.empty() && x.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, x.hi);
    else
      merged.push_back(x);
  }
  iv = std::move(merged);
  if (iv.size() == 1 && iv[0].lo == 0 && iv[0].hi == r.domain) {
    r.wildcard = true;
    iv.clear();
  }
}

inline ColumnRegion intersect(const ColumnRegion& a, const ColumnRegion& b) {
  ColumnRegion out;
  out.domain = a.domain;
  if (a.wildcard) {
    out = b;
    return out;
  }
  if (b.wildcard) {
    out = a;
    return out;
  }
  out.wildcard = false;
  size_t i = 0, j = 0;
  while (i < a.intervals.size() && j < b.intervals.size()) {
    int32_t lo = std::max(a.intervals[i].lo, b.intervals[j].lo);
    int32_t hi = std::min(a.intervals[i].hi, b.intervals[j].hi);
    if (lo < hi) out.intervals.push_back({lo, hi});
    if (a.intervals[i].hi < b.intervals[j].hi)
      ++i;
    else
      ++j;
  }
  normalize(out);
  return out;
}

// Maps one predicate to an id set over the ordered dictionary. Out-of-domain
// literals are rewritten through their insertion position; an out-of-domain
// equality selects nothing.
inline ColumnRegion predicate_region(const Column& col, Op op,
                                     const std::vector<std::string>& literals) {
  const int32_t D = static_cast<int32_t>(col.domain_size());
  ColumnRegion r;
  r.domain = D;
  r.wildcard = false;
  if (op == Op::In) {
    if (literals.empty()) throw QueryError("IN requires at least one literal");
    std::vector<int32_t> ids;
    for (const auto& lit : literals) {
      auto e = col.encode(lit);
      if (e.in_domain) ids.push_back(e.pos);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int32_t id : ids) r.intervals.push_back({id, id + 1});
    normalize(r);
    return r;
  }
  if (literals.size() != 1) throw QueryError("operator takes exactly one literal");
  auto e = col.encode(literals[0]);
  switch (op) {
    case Op::Eq:
      if (e.in_domain) r.intervals.push_back({e.pos, e.pos + 1});
      break;
    case Op::Ne:
      if (e.in_domain) {
        r.intervals.push_back({0, e.pos});
        r.intervals.push_back({e.pos + 1, D});
      } else {
        r.intervals.push_back({0, D});
      }
      break;
    case Op::Lt:
      r.intervals.push_back({0, e.pos});
      break;
    case Op::Le:
      r.intervals.push_back({0, e.in_domain ? e.pos + 1 : e.pos});
      break;
    case Op::Gt:
      r.intervals.push_back({e.in_domain ? e.pos + 1 : e.pos, D});
      break;
    case Op::Ge:
      r.intervals.push_back({e.pos, D});
      break;
    default:
      break;
  }
  normalize(r);
  return r;
}

}  // namespace detail

// Binds a conjunction against dictionaries: every predicate becomes an id
// set, multiple predicates on one column intersect, unfiltered columns stay
// wildcard.
inline Region bind(const Query& q, const TableMeta& meta) {
  Region region;
  region.columns.resize(static_cast<size_t>(meta.n()));
  for (int c = 0; c < meta.n(); ++c) {
    region.columns[static_cast<size_t>(c)].domain =
        static_cast<int32_t>(meta.columns[static_cast<size_t>(c)].domain_size());
    region.columns[static_cast<size_t>(c)].wildcard = true;
  }
  for (const auto& p : q.predicates) {
    int c = meta.column_index(p.column);
    if (c < 0) throw QueryError("unknown column '" + p.column + "'");
    ColumnRegion pr;
    try {
      pr = detail::predicate_region(meta.columns[static_cast<size_t>(c)], p.op, p.literals);
    } catch (const ValueError& e) {
      throw QueryError(std::string("predicate on '") + p.column + "': " + e.what());
    }
    region.columns[static_cast<size_t>(c)] =
        detail::intersect(region.columns[static_cast<size_t>(c)], pr);
  }
  return region;
}

// Ground truth by full scan: fraction of rows inside the region.
inline double exact_selectivity(const Table& t, const Region& region) {
  if (region.n() != t.n()) throw QueryError("region arity mismatch");
  if (region.any_empty()) return 0.0;
  // Per-column membership bitmaps make the scan a flat lookup.
  std::vector<std::vector<uint8_t>> bitmaps(static_cast<size_t>(t.n()));
  std::vector<int> constrained;
  for (int c = 0; c < t.n(); ++c) {
    const auto& cr = region.columns[static_cast<size_t>(c)];
    if (cr.wildcard) continue;
    auto& bm = bitmaps[static_cast<size_t>(c)];
    bm.assign(static_cast<size_t>(cr.domain), 0);
    for (const auto& iv : cr.intervals)
      for (int32_t v = iv.lo; v < iv.hi; ++v) bm[static_cast<size_t>(v)] = 1;
    constrained.push_back(c);
  }
  int64_t hits = 0;
  for (int64_t r = 0; r < t.row_count(); ++r) {
    const int32_t* row = t.row(r);
    bool ok = true;
    for (int c : constrained) {
      if (!bitmaps[static_cast<size_t>(c)][static_cast<size_t>(row[c])]) {
        ok = false;
        break;
      }
    }
    hits += ok;
  }
  return static_cast<double>(hits) / static_cast<double>(t.row_count());
}

// Number of points in the cross product, exact.
inline BigUint region_size(const Region& region) {
  BigUint total(1);
  for (const auto& c : region.columns) {
    total.mul_u64(static_cast<uint64_t>(c.count()));
    if (total.is_zero()) break;
  }
  return total;
}

// Exact region mass under the joint oracle; equals exact_selectivity.
inline double oracle_region_mass(const JointOracle& o, const Region& region) {
  int64_t hits = 0;
  for (int64_t k = 0; k < o.distinct(); ++k)
    if (region.contains_row(o.tuple(k))) hits += o.counts[static_cast<size_t>(k)];
  return static_cast<double>(hits) / static_cast<double>(o.total);
}

// ---------------------------------------------------------------------------
// Text grammar: col OP literal (AND col OP literal)*, IN (v1,v2,...).
// Literals with spaces or punctuation are double-quoted, quotes doubled.

namespace detail {

struct QueryToken {
  enum Kind { Word, Quoted, LParen, RParen, Comma } kind;
  std::string text;
};

inline std::vector<QueryToken> tokenize_query(std::string_view s) {
  std::vector<QueryToken> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({QueryToken::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({QueryToken::RParen, ")"});
      ++i;
    } else if (c == ',') {
      out.push_back({QueryToken::Comma, ","});
      ++i;
    } else if (c == '"') {
      ++i;
      std::string text;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '"') {
          if (i + 1 < s.size() && s[i + 1] == '"') {
            text.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text.push_back(s[i++]);
      }
      if (!closed) throw QueryError("unterminated quote in query text");
      out.push_back({QueryToken::Quoted, std::move(text)});
    } else {
      std::string text;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
             s[i] != ')' && s[i] != ',' && s[i] != '"')
        text.push_back(s[i++]);
      out.push_back({QueryToken::Word, std::move(text)});
    }
  }
  return out;
}

inline bool word_is(const QueryToken& t, std::string_view kw) {
  if (t.kind != QueryToken::Word) return false;
  if (t.text.size() != kw.size()) return false;
  for (size_t i = 0; i < kw.size(); ++i)
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  return true;
}

}  // namespace detail

inline Query parse_query_text(const std::string& text) {
  auto toks = detail::tokenize_query(text);
  Query q;
  size_t i = 0;
  auto need = [&](const char* what) -> const detail::QueryToken& {
    if (i >= toks.size()) throw QueryError(std::string("expected ") + what + " in query text");
    return toks[i];
  };
  while (i < toks.size()) {
    Predicate p;
    const auto& colTok = need("column name");
    if (colTok.kind != detail::QueryToken::Word && colTok.kind != detail::QueryToken::Quoted)
      throw QueryError("expected column name in query text");
    p.column = colTok.text;
    ++i;
    const auto& opTok = need("operator");
    if (detail::word_is(opTok, "IN")) {
      p.op = Op::In;
      ++i;
      if (need("'('").kind != detail::QueryToken::LParen) throw QueryError("expected ( after IN");
      ++i;
      while (true) {
        const auto& lit = need("literal");
        if (lit.kind != detail::QueryToken::Word && lit.kind != detail::QueryToken::Quoted)
          throw QueryError("expected literal in IN list");
        p.literals.push_back(lit.text);
        ++i;
        const auto& sep = need("',' or ')'");
        if (sep.kind == detail::QueryToken::Comma) {
          ++i;
          continue;
        }
        if (sep.kind == detail::QueryToken::RParen) {
          ++i;
          break;
        }
        throw QueryError("expected ',' or ')' in IN list");
      }
    } else {
      auto op = opTok.kind == detail::QueryToken::Word ? op_from_name(opTok.text) : std::nullopt;
      if (!op) throw QueryError("unknown operator '" + opTok.text + "'");
      p.op = *op;
      ++i;
      const auto& lit = need("literal");
      if (lit.kind != detail::QueryToken::Word && lit.kind != detail::QueryToken::Quoted)
        throw QueryError("expected literal after operator");
      p.literals.push_back(lit.text);
      ++i;
    }
    q.predicates.push_back(std::move(p));
    if (i < toks.size()) {
      if (!detail::word_is(toks[i], "AND"))
        throw QueryError("expected AND between predicates, got '" + toks[i].text + "'");
      ++i;
      if (i >= toks.size()) throw QueryError("dangling AND in query text");
    }
  }
  if (q.predicates.empty()) throw QueryError("empty query text");
  return q;
}

namespace detail {
inline std::string quote_literal(const std::string& s) {
  bool need = s.empty();
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',' || c == '"')
      need = true;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}
}  // namespace detail

inline std::string format_query_text(const Query& q) {
  std::string out;
  for (size_t i = 0; i < q.predicates.size(); ++i) {
    const auto& p = q.predicates[i];
    if (i) out += " AND ";
    out += detail::quote_literal(p.column);
    out += ' ';
    out += op_name(p.op);
    if (p.op == Op::In) {
      out += " (";
      for (size_t j = 0; j < p.literals.size(); ++j) {
        if (j) out += ',';
        out += detail::quote_literal(p.literals[j]);
      }
      out += ')';
    } else {
      out += ' ';
      out += detail::quote_literal(p.literals.at(0));
    }
  }
  return out;
}

}  // namespace naru
