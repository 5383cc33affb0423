#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace naru {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ingest problems; message names the offending line where known.
struct CsvError : Error {
  using Error::Error;
};

// A raw value that does not parse as the required dtype.
struct ValueError : Error {
  using Error::Error;
};

// Unknown column, malformed query text, bad operator arity.
struct QueryError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Model container failures, one kind per failure mode.
struct ModelIoError : Error {
  enum class Kind { BadMagic, BadMetadata, SizeMismatch, DictHashMismatch };
  Kind kind;
  ModelIoError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

// Deterministic RNG. mt19937_64 output is fully specified by the standard;
// the conversions below are ours, so streams are identical across platforms
// and standard libraries (std distributions are not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via rejection. Requires n > 0.
  uint64_t below(uint64_t n) {
    uint64_t x, r;
    do {
      x = eng_();
      r = x % n;
    } while (x - r > uint64_t(0) - n);
    return r;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// splitmix64 finalizer; used to derive independent RNG streams.
inline uint64_t mix_seed(uint64_t seed, uint64_t nonce) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (nonce + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// FNV-1a 64-bit, for dictionary fingerprints.
class Fnv1a {
 public:
  void update(std::string_view s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 0x100000001b3ull;
    }
  }
  void update_byte(uint8_t b) {
    h_ ^= b;
    h_ *= 0x100000001b3ull;
  }
  uint64_t digest() const { return h_; }

 private:
  uint64_t h_ = 0xcbf29ce484222325ull;
};

// Unsigned big integer, base 2^32 limbs. Only what region cardinalities
// need: multiply by a machine word, compare, convert.
class BigUint {
 public:
  BigUint() : limbs_{0} {}
  explicit BigUint(uint64_t v) {
    limbs_.push_back(static_cast<uint32_t>(v));
    limbs_.push_back(static_cast<uint32_t>(v >> 32));
    trim();
  }

  bool is_zero() const { return limbs_.size() == 1 && limbs_[0] == 0; }

  void mul_u64(uint64_t m) {
    if (m == 0 || is_zero()) {
      limbs_.assign(1, 0);
      return;
    }
    unsigned __int128 carry = 0;
    for (auto& limb : limbs_) {
      unsigned __int128 cur = (unsigned __int128)limb * m + carry;
      limb = static_cast<uint32_t>(cur);
      carry = cur >> 32;
    }
    while (carry != 0) {
      limbs_.push_back(static_cast<uint32_t>(carry));
      carry >>= 32;
    }
    trim();
  }

  bool fits_u64() const { return limbs_.size() <= 2; }

  // Meaningful only when fits_u64().
  uint64_t to_u64() const {
    uint64_t v = limbs_[0];
    if (limbs_.size() > 1) v |= uint64_t(limbs_[1]) << 32;
    return v;
  }

  bool less_equal_u64(uint64_t x) const {
    if (!fits_u64()) return false;
    return to_u64() <= x;
  }

  double to_double() const {
    double v = 0;
    for (size_t i = limbs_.size(); i > 0; --i) v = v * 4294967296.0 + limbs_[i - 1];
    return v;
  }

  // log2 of the value; -inf for zero. Accurate to a double ulp of the top bits.
  double log2() const;

  std::string to_string() const {
    if (is_zero()) return "0";
    std::vector<uint32_t> tmp = limbs_;
    std::string out;
    while (!(tmp.size() == 1 && tmp[0] == 0)) {
      uint64_t rem = 0;
      for (size_t i = tmp.size(); i > 0; --i) {
        uint64_t cur = (rem << 32) | tmp[i - 1];
        tmp[i - 1] = static_cast<uint32_t>(cur / 1000000000ull);
        rem = cur % 1000000000ull;
      }
      while (tmp.size() > 1 && tmp.back() == 0) tmp.pop_back();
      std::string chunk = std::to_string(rem);
      bool last = tmp.size() == 1 && tmp[0] == 0;
      if (!last) chunk = std::string(9 - chunk.size(), '0') + chunk;
      out = chunk + out;
    }
    return out;
  }

 private:
  void trim() {
    while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
  }
  std::vector<uint32_t> limbs_;
};

inline double BigUint::log2() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  if (fits_u64()) return std::log2(static_cast<double>(to_u64()));
  size_t k = limbs_.size();
  double top = limbs_[k - 1];
  top = top * 4294967296.0 + limbs_[k - 2];
  top = top * 4294967296.0 + limbs_[k - 3];
  return std::log2(top) + 32.0 * static_cast<double>(k - 3);
}

}  // namespace naru

