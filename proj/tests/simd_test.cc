// Copyright 2026 The StepAlign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "stepalign/simd/kernels.h"
#include "stepalign/simd/matrix.h"
#include "testing.h"

namespace stepalign {
namespace {

using simd::Backend;

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

class SimdEquivalenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (simd::avx2_kernels() == nullptr) GTEST_SKIP() << "AVX2 kernels not available";
  }
};

// Lengths cover the empty case, sub-vector tails and several full blocks.
TEST_F(SimdEquivalenceTest, ReductionsMatchScalarWithinRounding) {
  const simd::KernelTable& ref = simd::scalar_kernels();
  const simd::KernelTable& fast = *simd::avx2_kernels();
  std::mt19937_64 rng(1);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vector(n, rng);
    const auto b = random_vector(n, rng);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
    EXPECT_NEAR(fast.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n),
                1e-14 * (1.0 + abs_sum))
        << "n=" << n;
    const double sq = ref.sum_squares(a.data(), n);
    EXPECT_NEAR(fast.sum_squares(a.data(), n), sq, 1e-14 * (1.0 + sq)) << "n=" << n;
  }
}

TEST_F(SimdEquivalenceTest, ElementwiseKernelsMatchScalar) {
  const simd::KernelTable& ref = simd::scalar_kernels();
  const simd::KernelTable& fast = *simd::avx2_kernels();
  std::mt19937_64 rng(2);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto x = random_vector(n, rng);
    const auto y0 = random_vector(n, rng);

    auto y_ref = y0, y_fast = y0;
    ref.axpy(0.37, x.data(), y_ref.data(), n);
    fast.axpy(0.37, x.data(), y_fast.data(), n);
    // FMA rounds once where the scalar path rounds twice.
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y_fast[i], y_ref[i], 1e-15 * 4.0);

    y_ref = y0;
    y_fast = y0;
    ref.scale(-1.5, y_ref.data(), n);
    fast.scale(-1.5, y_fast.data(), n);
    EXPECT_EQ(y_fast, y_ref);

    y_ref = y0;
    y_fast = y0;
    ref.add(x.data(), y_ref.data(), n);
    fast.add(x.data(), y_fast.data(), n);
    EXPECT_EQ(y_fast, y_ref);
  }
}

TEST_F(SimdEquivalenceTest, GemmAgreesAcrossBackends) {
  std::mt19937_64 rng(3);
  const Matrix a = testing::random_matrix(7, 13, rng);
  const Matrix b = testing::random_matrix(13, 5, rng);
  const Backend before = simd::active_backend();
  simd::set_backend(Backend::kScalar);
  const Matrix ref = matmul(a, b);
  simd::set_backend(Backend::kAvx2);
  const Matrix fast = matmul(a, b);
  simd::set_backend(before);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(fast.flat()[i], ref.flat()[i], 1e-13);
  }
}

TEST(SimdTest, ScalarBackendIsAlwaysAvailable) {
  EXPECT_TRUE(simd::backend_available(Backend::kScalar));
  EXPECT_EQ(simd::backend_name(Backend::kScalar), "scalar");
}

TEST(SimdTest, SelectingAnUnavailableBackendThrows) {
  if (simd::avx2_kernels() != nullptr) GTEST_SKIP() << "AVX2 present";
  EXPECT_THROW(simd::set_backend(Backend::kAvx2), std::invalid_argument);
}

TEST(MatrixTest, ProductsMatchNaiveLoops) {
  std::mt19937_64 rng(4);
  const Matrix a = testing::random_matrix(4, 6, rng);
  const Matrix b = testing::random_matrix(6, 3, rng);
  const Matrix c = testing::random_matrix(5, 6, rng);
  const Matrix ab = matmul(a, b);
  const Matrix act = matmul_nt(a, c);
  const Matrix atb = matmul_tn(a, testing::random_matrix(4, 2, rng));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(ab(i, j), s, 1e-14);
    }
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += a(i, k) * c(j, k);
      EXPECT_NEAR(act(i, j), s, 1e-14);
    }
  }
  EXPECT_EQ(atb.rows(), 6u);
  EXPECT_EQ(atb.cols(), 2u);
  EXPECT_EQ(transpose(transpose(a)), a);
}

TEST(MatrixTest, AllFiniteDetectsNan) {
  Matrix m(2, 2, 1.0);
  EXPECT_TRUE(m.all_finite());
  m(1, 0) = std::nan("");
  EXPECT_FALSE(m.all_finite());
}

}  // namespace
}  // namespace stepalign
