#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

namespace naru {

// Dense row-major tensor of doubles. Shapes are informational; all math
// operates on flat data.
struct Tensor {
  std::vector<double> v;
  std::vector<int64_t> shape;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(count(shape)), 0.0);
  }

  static int64_t count(const std::vector<int64_t>& s) {
    int64_t c = 1;
    for (int64_t d : s) c *= d;
    return c;
  }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

// C[M x N] = (or +=) A[M x K] * B[K x N]. Row strides passed explicitly so
// callers can address sub-blocks of larger matrices. The k-loop skips zero
// activations, which makes one-hot and post-relu inputs cheap.
inline void matmul(const double* A, int lda, const double* B, int ldb, double* C, int ldc,
                   int M, int K, int N, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    double* c = C + static_cast<size_t>(m) * ldc;
    if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(N));
    const double* a = A + static_cast<size_t>(m) * lda;
    for (int k = 0; k < K; ++k) {
      double av = a[k];
      if (av == 0.0) continue;
      const double* b = B + static_cast<size_t>(k) * ldb;
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  }
}

// C[M x N] = A[M x K] * B[N x K]^T (rows of B are dotted with rows of A).
inline void matmul_bt(const double* A, int lda, const double* B, int ldb, double* C, int ldc,
                      int M, int K, int N) {
  for (int m = 0; m < M; ++m) {
    const double* a = A + static_cast<size_t>(m) * lda;
    double* c = C + static_cast<size_t>(m) * ldc;
    for (int n = 0; n < N; ++n) {
      const double* b = B + static_cast<size_t>(n) * ldb;
      double acc = 0;
      for (int k = 0; k < K; ++k) acc += a[k] * b[k];
      c[n] = acc;
    }
  }
}

// C[M x N] += A[K x M]^T * B[K x N]. Used for weight gradients.
inline void matmul_at_accum(const double* A, int lda, const double* B, int ldb, double* C,
                            int ldc, int K, int M, int N) {
  for (int k = 0; k < K; ++k) {
    const double* a = A + static_cast<size_t>(k) * lda;
    const double* b = B + static_cast<size_t>(k) * ldb;
    for (int m = 0; m < M; ++m) {
      double av = a[m];
      if (av == 0.0) continue;
      double* c = C + static_cast<size_t>(m) * ldc;
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  }
}

inline void add_bias(double* C, int ldc, const double* bias, int M, int N) {
  for (int m = 0; m < M; ++m) {
    double* c = C + static_cast<size_t>(m) * ldc;
    for (int n = 0; n < N; ++n) c[n] += bias[n];
  }
}

inline void relu(const double* in, double* out, int64_t count) {
  for (int64_t i = 0; i < count; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

}  // namespace naru
