// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>

#include "kernels.hpp"

namespace outage::simd::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Four rows at a time so each load of x feeds four FMAs.
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* r0 = a + r * cols;
    const double* r1 = r0 + cols;
    const double* r2 = r1 + cols;
    const double* r3 = r2 + cols;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + c), xv, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + c), xv, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + c), xv, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + c), xv, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; c < cols; ++c) {
      t0 += r0[c] * x[c];
      t1 += r1[c] * x[c];
      t2 += r2[c] * x[c];
      t3 += r3[c] * x[c];
    }
    y[r] += t0;
    y[r + 1] += t1;
    y[r + 2] += t2;
    y[r + 3] += t3;
  }
  for (; r < rows; ++r) y[r] += dot(a + r * cols, x, cols);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) gemv(b, n, k, a + i * k, c + i * n);
}

// c_row[0..n) += sum_q coef[q] * rows[q][0..n), four rows per pass.
inline void accumulate_rows(double* c_row, std::size_t n, const double* coef, const double* const* rows,
                            std::size_t count) {
  std::size_t q = 0;
  for (; q + 4 <= count; q += 4) {
    const __m256d a0 = _mm256_set1_pd(coef[q]), a1 = _mm256_set1_pd(coef[q + 1]);
    const __m256d a2 = _mm256_set1_pd(coef[q + 2]), a3 = _mm256_set1_pd(coef[q + 3]);
    const double *b0 = rows[q], *b1 = rows[q + 1], *b2 = rows[q + 2], *b3 = rows[q + 3];
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_loadu_pd(c_row + j);
      acc = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + j), acc);
      acc = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b1 + j), acc);
      acc = _mm256_fmadd_pd(a2, _mm256_loadu_pd(b2 + j), acc);
      acc = _mm256_fmadd_pd(a3, _mm256_loadu_pd(b3 + j), acc);
      _mm256_storeu_pd(c_row + j, acc);
    }
    for (; j < n; ++j) c_row[j] += coef[q] * b0[j] + coef[q + 1] * b1[j] + coef[q + 2] * b2[j] + coef[q + 3] * b3[j];
  }
  for (; q < count; ++q) axpy(coef[q], rows[q], c_row, n);
}

constexpr std::size_t kPanel = 64;

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  const double* rows[kPanel];
  for (std::size_t r0 = 0; r0 < k; r0 += kPanel) {
    const std::size_t cnt = std::min(kPanel, k - r0);
    for (std::size_t q = 0; q < cnt; ++q) rows[q] = b + (r0 + q) * n;
    for (std::size_t i = 0; i < m; ++i) accumulate_rows(c + i * n, n, a + i * k + r0, rows, cnt);
  }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  const double* rows[kPanel];
  double coef[kPanel];
  for (std::size_t i0 = 0; i0 < k; i0 += kPanel) {
    const std::size_t cnt = std::min(kPanel, k - i0);
    for (std::size_t q = 0; q < cnt; ++q) rows[q] = b + (i0 + q) * n;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t q = 0; q < cnt; ++q) coef[q] = a[(i0 + q) * m + j];
      accumulate_rows(c + j * n, n, coef, rows, cnt);
    }
  }
}

}  // namespace

const KernelTable avx2_table{&dot, &axpy, &squared_distance, &gemv, &gemm_nt, &gemm_nn, &gemm_tn};

}  // namespace outage::simd::detail
