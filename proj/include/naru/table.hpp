#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "naru/common.hpp"

namespace naru {

enum class Dtype { Integer, Float, String, Date };

inline const char* dtype_name(Dtype t) {
  switch (t) {
    case Dtype::Integer: return "integer";
    case Dtype::Float: return "float";
    case Dtype::String: return "string";
    case Dtype::Date: return "date";
  }
  return "?";
}

inline std::optional<Dtype> dtype_from_name(std::string_view s) {
  if (s == "integer" || s == "int") return Dtype::Integer;
  if (s == "float" || s == "double") return Dtype::Float;
  if (s == "string" || s == "str") return Dtype::String;
  if (s == "date") return Dtype::Date;
  return std::nullopt;
}

inline std::optional<int64_t> parse_int_value(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return out;
}

// Finite doubles only; negative zero canonicalized to +0 so that value
// equality and bit equality coincide after parsing.
inline std::optional<double> parse_float_value(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(out)) return std::nullopt;
  if (out == 0.0) out = 0.0;
  return out;
}

namespace detail {
inline int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}
}  // namespace detail

// ISO-8601 calendar date (YYYY-MM-DD) to days since 1970-01-01.
inline std::optional<int64_t> parse_date_value(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  unsigned m = static_cast<unsigned>((s[5] - '0') * 10 + (s[6] - '0'));
  unsigned d = static_cast<unsigned>((s[8] - '0') * 10 + (s[9] - '0'));
  if (m < 1 || m > 12 || d < 1) return std::nullopt;
  static const unsigned mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  unsigned lim = mdays[m - 1];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) lim = 29;
  if (d > lim) return std::nullopt;
  return detail::days_from_civil(y, m, d);
}

inline std::string format_date_value(int64_t days) {
  int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

// One attribute: dtype, the ordered empirical domain, and the id dictionary.
// Ids follow the dtype's natural order (numeric, chronological, or
// lexicographic), so range predicates map to id intervals.
struct Column {
  std::string name;
  Dtype dtype = Dtype::String;
  std::vector<std::string> raws;     // canonical raw text per id
  std::vector<int64_t> int_keys;     // Integer and Date columns
  std::vector<double> float_keys;    // Float columns

  int64_t domain_size() const { return static_cast<int64_t>(raws.size()); }

  const std::string& decode(int32_t id) const { return raws.at(static_cast<size_t>(id)); }

  struct EncodeResult {
    bool in_domain;
    int32_t pos;  // exact id, or the index of the first domain value > raw
  };

  EncodeResult encode(std::string_view raw) const {
    switch (dtype) {
      case Dtype::Integer:
      case Dtype::Date: {
        auto v = dtype == Dtype::Integer ? parse_int_value(raw) : parse_date_value(raw);
        if (!v)
          throw ValueError("value '" + std::string(raw) + "' does not parse as " +
                           dtype_name(dtype) + " for column '" + name + "'");
        return locate(int_keys, *v);
      }
      case Dtype::Float: {
        auto v = parse_float_value(raw);
        if (!v)
          throw ValueError("value '" + std::string(raw) + "' does not parse as float for column '" +
                           name + "'");
        return locate(float_keys, *v);
      }
      case Dtype::String: {
        auto it = std::lower_bound(raws.begin(), raws.end(), raw);
        int32_t idx = static_cast<int32_t>(it - raws.begin());
        if (it != raws.end() && std::string_view(*it) == raw) return {true, idx};
        return {false, idx};
      }
    }
    throw ValueError("bad dtype");
  }

 private:
  template <class T>
  static EncodeResult locate(const std::vector<T>& keys, T v) {
    auto it = std::lower_bound(keys.begin(), keys.end(), v);
    int32_t idx = static_cast<int32_t>(it - keys.begin());
    if (it != keys.end() && *it == v) return {true, idx};
    return {false, idx};
  }
};

// Dictionaries plus cardinality; everything an estimator needs to bind
// queries without touching the stored rows.
struct TableMeta {
  std::vector<Column> columns;
  int64_t row_count = 0;

  int n() const { return static_cast<int>(columns.size()); }

  int column_index(std::string_view name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return static_cast<int>(i);
    return -1;
  }

  uint64_t dict_hash() const {
    Fnv1a h;
    for (const auto& c : columns) {
      h.update(c.name);
      h.update_byte(0);
      h.update(dtype_name(c.dtype));
      h.update_byte(0);
      for (const auto& r : c.raws) {
        h.update(r);
        h.update_byte(0x1f);
      }
      h.update_byte(0x1e);
    }
    return h.digest();
  }
};

struct IngestOptions {
  std::map<std::string, Dtype> dtype_hints;
};

// Immutable dictionary-encoded relation. Rows are stored row-major as ids.
class Table {
 public:
  TableMeta meta;
  std::vector<int32_t> rows;  // row_count x n

  int n() const { return meta.n(); }
  int64_t row_count() const { return meta.row_count; }
  int32_t at(int64_t r, int c) const { return rows[static_cast<size_t>(r) * n() + c]; }
  const int32_t* row(int64_t r) const { return rows.data() + static_cast<size_t>(r) * n(); }

  static Table from_raw_rows(const std::vector<std::string>& names,
                             const std::vector<std::vector<std::string>>& raw_rows,
                             const IngestOptions& opts = {});
  static Table ingest_csv(const std::string& path, const IngestOptions& opts = {});

  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;

  // Exact empirical marginal of one column; entries sum to 1.
  std::vector<double> marginal(int col) const {
    std::vector<int64_t> counts(static_cast<size_t>(meta.columns[col].domain_size()), 0);
    for (int64_t r = 0; r < row_count(); ++r) counts[static_cast<size_t>(at(r, col))]++;
    std::vector<double> out(counts.size());
    for (size_t i = 0; i < counts.size(); ++i)
      out[i] = static_cast<double>(counts[i]) / static_cast<double>(row_count());
    return out;
  }

  bool operator==(const Table& o) const {
    if (meta.row_count != o.meta.row_count || rows != o.rows) return false;
    if (meta.columns.size() != o.meta.columns.size()) return false;
    for (size_t i = 0; i < meta.columns.size(); ++i) {
      const auto& a = meta.columns[i];
      const auto& b = o.meta.columns[i];
      if (a.name != b.name || a.dtype != b.dtype || a.raws != b.raws) return false;
    }
    return true;
  }
};

// The exact joint distribution: distinct tuples with occurrence counts,
// stored sorted for deterministic iteration.
class JointOracle {
 public:
  int n = 0;
  int64_t total = 0;
  std::vector<int32_t> tuples;   // k x n, lexicographically sorted
  std::vector<int64_t> counts;   // k

  static JointOracle build(const Table& t) {
    JointOracle o;
    o.n = t.n();
    o.total = t.row_count();
    std::vector<int64_t> idx(static_cast<size_t>(t.row_count()));
    for (int64_t i = 0; i < t.row_count(); ++i) idx[static_cast<size_t>(i)] = i;
    const int cols = t.n();
    auto cmp = [&](int64_t a, int64_t b) {
      const int32_t* ra = t.row(a);
      const int32_t* rb = t.row(b);
      for (int c = 0; c < cols; ++c) {
        if (ra[c] != rb[c]) return ra[c] < rb[c];
      }
      return false;
    };
    std::sort(idx.begin(), idx.end(), cmp);
    auto equal = [&](int64_t a, int64_t b) {
      return std::memcmp(t.row(a), t.row(b), sizeof(int32_t) * static_cast<size_t>(cols)) == 0;
    };
    for (size_t i = 0; i < idx.size();) {
      size_t j = i;
      while (j < idx.size() && equal(idx[i], idx[j])) ++j;
      o.tuples.insert(o.tuples.end(), t.row(idx[i]), t.row(idx[i]) + cols);
      o.counts.push_back(static_cast<int64_t>(j - i));
      i = j;
    }
    return o;
  }

  int64_t distinct() const { return static_cast<int64_t>(counts.size()); }
  const int32_t* tuple(int64_t k) const { return tuples.data() + static_cast<size_t>(k) * n; }

  double prob(int64_t k) const {
    return static_cast<double>(counts[static_cast<size_t>(k)]) / static_cast<double>(total);
  }

  // H(P) in bits per tuple.
  double entropy_bits() const {
    double h = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
      double p = static_cast<double>(counts[i]) / static_cast<double>(total);
      h -= p * std::log2(p);
    }
    return h;
  }
};

inline double data_entropy_bits(const Table& t) { return JointOracle::build(t).entropy_bits(); }

// ---------------------------------------------------------------------------
// CSV machinery

namespace detail {

struct CsvRecord {
  int64_t line;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC-4180 style: comma separated, double quotes, "" escapes a quote.
inline std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> records;
  size_t i = 0;
  int64_t line = 1;
  while (i < text.size()) {
    CsvRecord rec;
    rec.line = line;
    bool record_done = false;
    while (!record_done) {
      std::string field;
      if (i < text.size() && text[i] == '"') {
        ++i;
        bool closed = false;
        while (i < text.size()) {
          char c = text[i];
          if (c == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed) throw CsvError("line " + std::to_string(rec.line) + ": unterminated quote");
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw CsvError("line " + std::to_string(line) + ": garbage after closing quote");
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"')
            throw CsvError("line " + std::to_string(line) + ": quote inside unquoted field");
          field.push_back(text[i]);
          ++i;
        }
      }
      rec.fields.push_back(std::move(field));
      if (i >= text.size()) {
        record_done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < text.size() && text[i] == '\n') ++i;
        ++line;
        record_done = true;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string csv_escape(const std::string& s) {
  bool need = s.find_first_of(",\"\n\r") != std::string::npos;
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

inline Table Table::from_raw_rows(const std::vector<std::string>& names,
                                  const std::vector<std::vector<std::string>>& raw_rows,
                                  const IngestOptions& opts) {
  const int n = static_cast<int>(names.size());
  if (n == 0) throw CsvError("no columns");
  {
    std::unordered_set<std::string> seen;
    for (const auto& nm : names) {
      if (nm.empty()) throw CsvError("empty column name in header");
      if (!seen.insert(nm).second) throw CsvError("duplicate column name '" + nm + "'");
    }
  }
  if (raw_rows.empty()) throw CsvError("no data rows");
  for (size_t r = 0; r < raw_rows.size(); ++r) {
    if (static_cast<int>(raw_rows[r].size()) != n)
      throw CsvError("row " + std::to_string(r + 1) + ": expected " + std::to_string(n) +
                     " fields, got " + std::to_string(raw_rows[r].size()));
    for (const auto& f : raw_rows[r])
      if (f.empty()) throw CsvError("row " + std::to_string(r + 1) + ": empty cell");
  }

  Table t;
  t.meta.columns.resize(static_cast<size_t>(n));
  t.meta.row_count = static_cast<int64_t>(raw_rows.size());

  for (int c = 0; c < n; ++c) {
    Column& col = t.meta.columns[static_cast<size_t>(c)];
    col.name = names[static_cast<size_t>(c)];

    auto hint = opts.dtype_hints.find(col.name);
    if (hint != opts.dtype_hints.end()) {
      col.dtype = hint->second;
    } else {
      bool all_int = true, all_float = true, all_date = true;
      for (const auto& row : raw_rows) {
        const std::string& s = row[static_cast<size_t>(c)];
        if (all_int && !parse_int_value(s)) all_int = false;
        if (all_float && !parse_float_value(s)) all_float = false;
        if (all_date && !parse_date_value(s)) all_date = false;
        if (!all_int && !all_float && !all_date) break;
      }
      col.dtype = all_int ? Dtype::Integer
                 : all_float ? Dtype::Float
                 : all_date  ? Dtype::Date
                             : Dtype::String;
    }

    // First pass: distinct parsed values in natural order, keeping the first
    // raw spelling seen as the canonical one.
    switch (col.dtype) {
      case Dtype::Integer:
      case Dtype::Date: {
        std::map<int64_t, std::string> dom;
        for (size_t r = 0; r < raw_rows.size(); ++r) {
          const std::string& s = raw_rows[r][static_cast<size_t>(c)];
          auto v = col.dtype == Dtype::Integer ? parse_int_value(s) : parse_date_value(s);
          if (!v)
            throw CsvError("row " + std::to_string(r + 1) + ": value '" + s +
                           "' does not parse as " + dtype_name(col.dtype) + " (column '" +
                           col.name + "')");
          dom.emplace(*v, s);
        }
        for (auto& [k, raw] : dom) {
          col.int_keys.push_back(k);
          col.raws.push_back(raw);
        }
        break;
      }
      case Dtype::Float: {
        std::map<double, std::string> dom;
        for (size_t r = 0; r < raw_rows.size(); ++r) {
          const std::string& s = raw_rows[r][static_cast<size_t>(c)];
          auto v = parse_float_value(s);
          if (!v)
            throw CsvError("row " + std::to_string(r + 1) + ": value '" + s +
                           "' does not parse as float (column '" + col.name + "')");
          dom.emplace(*v, s);
        }
        for (auto& [k, raw] : dom) {
          col.float_keys.push_back(k);
          col.raws.push_back(raw);
        }
        break;
      }
      case Dtype::String: {
        std::map<std::string, bool> dom;
        for (const auto& row : raw_rows) dom.emplace(row[static_cast<size_t>(c)], true);
        for (auto& [k, _] : dom) col.raws.push_back(k);
        break;
      }
    }
  }

  // Second pass: encode every cell against the final dictionaries.
  t.rows.resize(raw_rows.size() * static_cast<size_t>(n));
  for (size_t r = 0; r < raw_rows.size(); ++r) {
    for (int c = 0; c < n; ++c) {
      auto enc = t.meta.columns[static_cast<size_t>(c)].encode(raw_rows[r][static_cast<size_t>(c)]);
      assert(enc.in_domain);
      t.rows[r * static_cast<size_t>(n) + static_cast<size_t>(c)] = enc.pos;
    }
  }
  return t;
}

inline Table Table::ingest_csv(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.empty()) throw CsvError("empty file '" + path + "'");
  auto records = detail::parse_csv(text);
  if (records.empty()) throw CsvError("empty file '" + path + "'");

  const auto& header = records[0].fields;
  const int n = static_cast<int>(header.size());
  std::vector<std::vector<std::string>> raw_rows;
  raw_rows.reserve(records.size() - 1);
  for (size_t i = 1; i < records.size(); ++i) {
    auto& rec = records[i];
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // trailing blank line
    if (static_cast<int>(rec.fields.size()) != n)
      throw CsvError("line " + std::to_string(rec.line) + ": expected " + std::to_string(n) +
                     " fields, got " + std::to_string(rec.fields.size()));
    for (const auto& f : rec.fields)
      if (f.empty()) throw CsvError("line " + std::to_string(rec.line) + ": empty cell");
    raw_rows.push_back(std::move(rec.fields));
  }
  if (raw_rows.empty()) throw CsvError("no data rows in '" + path + "'");
  return from_raw_rows(header, raw_rows, opts);
}

inline void Table::write_csv(std::ostream& out) const {
  for (int c = 0; c < n(); ++c) {
    if (c) out << ',';
    out << detail::csv_escape(meta.columns[static_cast<size_t>(c)].name);
  }
  out << '\n';
  for (int64_t r = 0; r < row_count(); ++r) {
    for (int c = 0; c < n(); ++c) {
      if (c) out << ',';
      out << detail::csv_escape(meta.columns[static_cast<size_t>(c)].decode(at(r, c)));
    }
    out << '\n';
  }
}

inline void Table::write_csv_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write '" + path + "'");
  write_csv(out);
}

// Sidecar schema: one `name:dtype` line per column.
inline IngestOptions read_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open schema file '" + path + "'");
  IngestOptions opts;
  std::string line;
  int64_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto pos = line.rfind(':');
    if (pos == std::string::npos)
      throw CsvError("schema line " + std::to_string(ln) + ": expected name:dtype");
    std::string name = line.substr(0, pos);
    auto dt = dtype_from_name(line.substr(pos + 1));
    if (!dt) throw CsvError("schema line " + std::to_string(ln) + ": unknown dtype '" +
                            line.substr(pos + 1) + "'");
    opts.dtype_hints[name] = *dt;
  }
  return opts;
}

}  // namespace naru
