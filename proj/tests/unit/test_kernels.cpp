// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

// Scalar and AVX2 kernels must agree: bit-exactly for max/rank, to rounding for sums.

#include "ctxspec/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ctxspec::kernels;

namespace
{

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n, bool coarse)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p)
    {
        x = coarse ? std::floor(u(rng) * 3.0) : std::exp(6.0 * (u(rng) - 0.5));
        total += x;
    }
    if (total == 0.0)
    {
        p[0] = total = 1.0;
    }
    for (auto& x : p)
    {
        x /= total;
    }
    return p;
}

class KernelEquivalence : public ::testing::Test
{
protected:
    void SetUp() override
    {
        simd_ = avx2_table();
        if (simd_ == nullptr)
        {
            GTEST_SKIP() << "AVX2 not available on this host";
        }
    }

    KernelTable const* simd_ = nullptr;
};

} // namespace

TEST(Kernels, ScalarReferenceValues)
{
    auto const& s = scalar_table();
    std::vector<double> p{0.9, 0.1};
    EXPECT_NEAR(s.entropy(p.data(), p.size()), 0.325082973391448, 1e-12);
    std::vector<double> q{0.25, 0.25, 0.25, 0.25};
    EXPECT_NEAR(s.entropy(q.data(), q.size()), std::log(4.0), 1e-12);
    std::vector<double> one_hot{0.0, 1.0, 0.0};
    EXPECT_EQ(s.entropy(one_hot.data(), one_hot.size()), 0.0);
    EXPECT_EQ(s.max_first(q.data(), q.size()).index, 0u);
    EXPECT_EQ(s.count_ranked_before(q.data(), q.size(), 0.25, 2), 2u);
}

TEST(Kernels, DispatchHonoursSelection)
{
    ASSERT_TRUE(select(Isa::Scalar));
    EXPECT_EQ(active().isa, Isa::Scalar);
    if (avx2_table() != nullptr)
    {
        ASSERT_TRUE(select(Isa::Avx2));
        EXPECT_EQ(active().isa, Isa::Avx2);
    }
    else
    {
        EXPECT_FALSE(select(Isa::Avx2));
    }
    select(detected_isa());
}

TEST_F(KernelEquivalence, MaxFirstIsExact)
{
    std::mt19937_64 rng(11);
    auto const& s = scalar_table();
    for (int trial = 0; trial < 2000; ++trial)
    {
        std::size_t const n = 1 + rng() % 300;
        auto const p = random_probs(rng, n, trial % 2 == 0);
        auto const a = s.max_first(p.data(), n);
        auto const b = simd_->max_first(p.data(), n);
        ASSERT_EQ(a.index, b.index) << "n=" << n;
        ASSERT_EQ(a.value, b.value);
    }
}

TEST_F(KernelEquivalence, RankCountIsExact)
{
    std::mt19937_64 rng(12);
    auto const& s = scalar_table();
    for (int trial = 0; trial < 2000; ++trial)
    {
        std::size_t const n = 1 + rng() % 300;
        auto const p = random_probs(rng, n, trial % 2 == 0);
        std::size_t const pivot = rng() % n;
        double const v = p[pivot];
        ASSERT_EQ(s.count_ranked_before(p.data(), n, v, pivot), simd_->count_ranked_before(p.data(), n, v, pivot));
    }
}

TEST_F(KernelEquivalence, SumAndEntropyAgreeToRounding)
{
    std::mt19937_64 rng(13);
    auto const& s = scalar_table();
    for (int trial = 0; trial < 2000; ++trial)
    {
        std::size_t const n = 1 + rng() % 1100;
        auto p = random_probs(rng, n, trial % 3 == 0);
        if (trial % 5 == 0)
        {
            // Very small entries exercise the log's exponent handling.
            p[rng() % n] = 1e-300;
        }
        ASSERT_NEAR(s.sum(p.data(), n), simd_->sum(p.data(), n), 1e-13);
        double const hs = s.entropy(p.data(), n);
        double const hv = simd_->entropy(p.data(), n);
        ASSERT_NEAR(hs, hv, 1e-12 * std::max(1.0, hs)) << "n=" << n;
    }
}

TEST_F(KernelEquivalence, EntropyOfWideDynamicRange)
{
    auto const& s = scalar_table();
    std::vector<double> p;
    for (int e = -300; e <= 0; e += 3)
    {
        p.push_back(std::pow(10.0, e));
    }
    EXPECT_NEAR(s.entropy(p.data(), p.size()), simd_->entropy(p.data(), p.size()), 1e-13);
}
