#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "naru/common.hpp"
#include "naru/model.hpp"

namespace naru {

// Model container: magic "NARUv1", a uint64 little-endian length, a JSON
// metadata block (config, dictionaries, dictionary hash, ordering, tensor
// manifest), then the raw tensors as little-endian 64-bit floats in manifest
// order.
inline constexpr char kModelMagic[6] = {'N', 'A', 'R', 'U', 'v', '1'};

namespace detail {

inline void put_u64_le(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint64_t get_u64_le(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void put_f64_le(std::vector<uint8_t>& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64_le(out, bits);
}

inline double get_f64_le(const uint8_t* p) {
  uint64_t bits = get_u64_le(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

inline std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

inline std::vector<uint8_t> serialize_model(const Model& m) {
  nlohmann::json meta;
  meta["version"] = 1;
  meta["config"] = {
      {"hidden_sizes", m.cfg.hidden_sizes},
      {"residual", m.cfg.residual},
      {"onehot_threshold", m.cfg.onehot_threshold},
      {"embedding_dim", m.cfg.embedding_dim},
      {"embedding_reuse", m.cfg.embedding_reuse},
      {"seed", m.cfg.seed},
  };
  meta["ordering"] = m.order;
  meta["row_count"] = m.meta.row_count;
  meta["wildcard_trained"] = m.wildcard_trained;
  meta["dict_hash"] = detail::hash_hex(m.meta.dict_hash());
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : m.meta.columns) {
    cols.push_back({{"name", c.name}, {"dtype", dtype_name(c.dtype)}, {"domain", c.raws}});
  }
  meta["columns"] = std::move(cols);
  nlohmann::json tensors = nlohmann::json::array();
  for (size_t i = 0; i < m.params.size(); ++i)
    tensors.push_back({{"name", m.param_names[i]}, {"shape", m.params[i].shape}});
  meta["tensors"] = std::move(tensors);

  std::string json_text = meta.dump();
  std::vector<uint8_t> out;
  out.insert(out.end(), kModelMagic, kModelMagic + 6);
  detail::put_u64_le(out, json_text.size());
  out.insert(out.end(), json_text.begin(), json_text.end());
  for (const auto& t : m.params)
    for (double d : t.v) detail::put_f64_le(out, d);
  return out;
}

inline Model deserialize_model(const uint8_t* data, size_t len) {
  if (len < 14 || std::memcmp(data, kModelMagic, 6) != 0)
    throw ModelIoError(ModelIoError::Kind::BadMagic, "not a NARUv1 model file");
  uint64_t json_len = detail::get_u64_le(data + 6);
  if (14 + json_len > len)
    throw ModelIoError(ModelIoError::Kind::SizeMismatch, "metadata block truncated");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(data + 14, data + 14 + json_len);
  } catch (const nlohmann::json::exception& e) {
    throw ModelIoError(ModelIoError::Kind::BadMetadata,
                       std::string("metadata parse failure: ") + e.what());
  }

  ModelConfig cfg;
  TableMeta table_meta;
  try {
    const auto& jc = meta.at("config");
    cfg.hidden_sizes = jc.at("hidden_sizes").get<std::vector<int>>();
    cfg.residual = jc.at("residual").get<bool>();
    cfg.onehot_threshold = jc.at("onehot_threshold").get<int>();
    cfg.embedding_dim = jc.at("embedding_dim").get<int>();
    cfg.embedding_reuse = jc.at("embedding_reuse").get<bool>();
    cfg.seed = jc.at("seed").get<uint64_t>();
    cfg.ordering = meta.at("ordering").get<std::vector<int>>();
    table_meta.row_count = meta.at("row_count").get<int64_t>();
    for (const auto& jcol : meta.at("columns")) {
      Column col;
      col.name = jcol.at("name").get<std::string>();
      auto dt = dtype_from_name(jcol.at("dtype").get<std::string>());
      if (!dt)
        throw ModelIoError(ModelIoError::Kind::BadMetadata,
                           "unknown dtype in metadata: " + jcol.at("dtype").get<std::string>());
      col.dtype = *dt;
      col.raws = jcol.at("domain").get<std::vector<std::string>>();
      for (const auto& raw : col.raws) {
        bool ok = true;
        switch (col.dtype) {
          case Dtype::Integer: {
            auto v = parse_int_value(raw);
            ok = v.has_value();
            if (ok) col.int_keys.push_back(*v);
            break;
          }
          case Dtype::Date: {
            auto v = parse_date_value(raw);
            ok = v.has_value();
            if (ok) col.int_keys.push_back(*v);
            break;
          }
          case Dtype::Float: {
            auto v = parse_float_value(raw);
            ok = v.has_value();
            if (ok) col.float_keys.push_back(*v);
            break;
          }
          case Dtype::String: break;
        }
        if (!ok)
          throw ModelIoError(ModelIoError::Kind::BadMetadata,
                             "domain value '" + raw + "' does not parse as column dtype");
      }
      table_meta.columns.push_back(std::move(col));
    }
  } catch (const ModelIoError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelIoError(ModelIoError::Kind::BadMetadata,
                       std::string("bad metadata: ") + e.what());
  }

  uint64_t stored_hash = 0;
  {
    std::string hex = meta.at("dict_hash").get<std::string>();
    stored_hash = std::stoull(hex, nullptr, 16);
  }
  if (stored_hash != table_meta.dict_hash())
    throw ModelIoError(ModelIoError::Kind::DictHashMismatch,
                       "dictionary hash does not match embedded dictionaries");

  Model m = Model::build(cfg, table_meta);
  m.wildcard_trained = meta.value("wildcard_trained", false);

  const auto& jt = meta.at("tensors");
  if (jt.size() != m.params.size())
    throw ModelIoError(ModelIoError::Kind::BadMetadata, "tensor manifest does not match model");
  for (size_t i = 0; i < m.params.size(); ++i) {
    if (jt[i].at("name").get<std::string>() != m.param_names[i] ||
        jt[i].at("shape").get<std::vector<int64_t>>() != m.params[i].shape)
      throw ModelIoError(ModelIoError::Kind::BadMetadata, "tensor manifest does not match model");
  }

  int64_t want = 0;
  for (const auto& p : m.params) want += p.size();
  size_t expect = 14 + json_len + static_cast<size_t>(want) * 8;
  if (len != expect)
    throw ModelIoError(ModelIoError::Kind::SizeMismatch,
                       "tensor payload is " + std::to_string(len - 14 - json_len) +
                           " bytes, expected " + std::to_string(want * 8));
  const uint8_t* p = data + 14 + json_len;
  for (auto& t : m.params)
    for (auto& d : t.v) {
      d = detail::get_f64_le(p);
      p += 8;
    }
  return m;
}

inline void save_model(const Model& m, const std::string& path) {
  auto bytes = serialize_model(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes.data(), bytes.size());
}

}  // namespace naru
