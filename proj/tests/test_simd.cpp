#include <doctest.h>

#include <cmath>
#include <numeric>

#include "outage/lstm.hpp"
#include "outage/rng.hpp"
#include "outage/simd.hpp"

using namespace outage;
using simd::Backend;

namespace {

std::vector<Backend> vector_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (simd::available(b)) out.push_back(b);
  return out;
}

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// FMA and lane-wise partial sums reorder the arithmetic; bound by the magnitude sum.
void check_close(double got, double want, double magnitude) {
  CHECK(std::abs(got - want) <= 1e-13 * std::max(1.0, magnitude));
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double magnitude) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) check_close(got[i], want[i], magnitude);
}

}  // namespace

TEST_CASE("scalar backend is always available and selectable") {
  CHECK(simd::available(Backend::Scalar));
  simd::ScopedBackend guard(Backend::Scalar);
  CHECK(simd::active_backend() == Backend::Scalar);
  CHECK(simd::name(Backend::Scalar) == "scalar");
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (!simd::available(b)) CHECK_THROWS_AS(simd::set_backend(b), std::invalid_argument);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const auto& ref = simd::table(Backend::Scalar);
  Rng rng(77);
  for (Backend b : vector_backends()) {
    CAPTURE(simd::name(b));
    const auto& k = simd::table(b);
    for (std::size_t n = 0; n <= 37; ++n) {
      const auto x = random_vec(rng, n), y = random_vec(rng, n);
      check_close(k.dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n), 4.0 * static_cast<double>(n));
      check_close(k.squared_distance(x.data(), y.data(), n), ref.squared_distance(x.data(), y.data(), n),
                  16.0 * static_cast<double>(n));
      CHECK(k.squared_distance(x.data(), x.data(), n) == 0.0);
      auto ya = y, yb = y;
      k.axpy(0.37, x.data(), ya.data(), n);
      ref.axpy(0.37, x.data(), yb.data(), n);
      check_close(ya, yb, 4.0);
    }
    for (std::size_t m : {1u, 3u, 4u, 7u, 16u}) {
      for (std::size_t n : {1u, 2u, 5u, 8u, 13u}) {
        for (std::size_t kk : {1u, 4u, 9u, 32u}) {
          const double mag = 4.0 * static_cast<double>(kk) + 4.0;
          const auto a = random_vec(rng, m * kk), bt = random_vec(rng, n * kk), bn = random_vec(rng, kk * n);
          const auto at = random_vec(rng, kk * m), c0 = random_vec(rng, m * n);
          auto c1 = c0, c2 = c0;
          k.gemm_nt(a.data(), bt.data(), c1.data(), m, n, kk);
          ref.gemm_nt(a.data(), bt.data(), c2.data(), m, n, kk);
          check_close(c1, c2, mag);
          c1 = c0;
          c2 = c0;
          k.gemm_nn(a.data(), bn.data(), c1.data(), m, n, kk);
          ref.gemm_nn(a.data(), bn.data(), c2.data(), m, n, kk);
          check_close(c1, c2, mag);
          c1 = c0;
          c2 = c0;
          k.gemm_tn(at.data(), bn.data(), c1.data(), m, n, kk);
          ref.gemm_tn(at.data(), bn.data(), c2.data(), m, n, kk);
          check_close(c1, c2, mag);
        }
        const auto a = random_vec(rng, m * n), x = random_vec(rng, n), y0 = random_vec(rng, m);
        auto y1 = y0, y2 = y0;
        k.gemv(a.data(), m, n, x.data(), y1.data());
        ref.gemv(a.data(), m, n, x.data(), y2.data());
        check_close(y1, y2, 4.0 * static_cast<double>(n) + 4.0);
      }
    }
  }
}

TEST_CASE("LSTM loss and gradient agree across backends") {
  Rng rng(5);
  const std::size_t count = 9, steps = 6, width = 5, hidden = 12;
  const auto data = random_vec(rng, count * steps * width);
  const auto targets = random_vec(rng, count);
  LstmNetwork net(width, hidden);
  Rng init(2);
  net.initialize(init);
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  const SequenceBatch batch{data, count, steps, width};

  std::vector<double> g_ref(net.parameters().size());
  double l_ref = 0.0;
  {
    simd::ScopedBackend guard(Backend::Scalar);
    l_ref = net.loss_and_gradient(batch, targets, idx, g_ref);
  }
  for (Backend b : vector_backends()) {
    simd::ScopedBackend guard(b);
    std::vector<double> g(g_ref.size());
    const double l = net.loss_and_gradient(batch, targets, idx, g);
    CHECK(l == doctest::Approx(l_ref).epsilon(1e-12));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - g_ref[i]) <= 1e-11 * std::max(1.0, std::abs(g_ref[i])));
  }
}
