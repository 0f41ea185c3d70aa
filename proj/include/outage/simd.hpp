#pragma once

// Dense double-precision kernels used by the recurrent model, analog search and
// the SMOGN neighbour search. Each kernel has a scalar reference and vector
// variants; the variant is picked once at startup from the CPU features and can
// be overridden with OUTAGE_SIMD=scalar|avx2|neon or set_backend().

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace outage::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // C (m x n) += A (m x k) * B^T, B is n x k
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);
  // C (m x n) += A (m x k) * B, B is k x n
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);
  // C (m x n) += A^T * B, A is k x m, B is k x n
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);
};

bool available(Backend b) noexcept;
std::string_view name(Backend b) noexcept;

Backend active_backend() noexcept;
/// Throws std::invalid_argument when the backend is not available on this CPU.
void set_backend(Backend b);

const KernelTable& table(Backend b);
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void gemv_accumulate(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
                            std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  active().gemv(a.data(), rows, cols, x.data(), y.data());
}

inline void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                    std::size_t n, std::size_t k) {
  assert(a.size() >= m * k && b.size() >= n * k && c.size() >= m * n);
  active().gemm_nt(a.data(), b.data(), c.data(), m, n, k);
}

inline void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                    std::size_t n, std::size_t k) {
  assert(a.size() >= m * k && b.size() >= k * n && c.size() >= m * n);
  active().gemm_nn(a.data(), b.data(), c.data(), m, n, k);
}

inline void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                    std::size_t n, std::size_t k) {
  assert(a.size() >= k * m && b.size() >= k * n && c.size() >= m * n);
  active().gemm_tn(a.data(), b.data(), c.data(), m, n, k);
}

/// RAII override of the active backend, for tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace outage::simd
