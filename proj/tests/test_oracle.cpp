// SPDX-License-Identifier: Apache-2.0
#include "mmnoma/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mmnoma;

namespace {

EffectivePair reference_pair(int n = 32)
{
    return EffectivePair::from_moduli(0.8, 0.5, -0.25, 0.4, n);
}

} // namespace

TEST(GridAllocate, ZeroFloorsPickFullGainCorner)
{
    SystemConfig cfg{32, 100.0, 1.0, 0.0, 0.0, 20};
    const auto g = grid_allocate(reference_pair(), cfg, GridSpec{200, 200});
    ASSERT_TRUE(g.feasible());
    EXPECT_DOUBLE_EQ(g.c1, 32 * 0.64);
    EXPECT_DOUBLE_EQ(g.c2, 0.0);
    EXPECT_NEAR(g.objective, std::log2(1 + 100 * 32 * 0.64), 1e-12);
}

TEST(GridAllocate, InfeasibleWhenFloorsTooHigh)
{
    SystemConfig cfg{32, 100.0, 1.0, 8.0, 8.0, 20};
    EXPECT_FALSE(grid_allocate(reference_pair(), cfg, GridSpec{100, 100}).feasible());
}

TEST(GridAllocate, TracksClosedFormFromBelow)
{
    for (double r : {1.0, 2.0, 3.0, 4.0})
    {
        SystemConfig cfg{32, 100.0, 1.0, r, r, 20};
        const auto exact = allocate(reference_pair(), cfg);
        const auto grid = grid_allocate(reference_pair(), cfg, GridSpec{800, 800});
        ASSERT_TRUE(grid.feasible());
        EXPECT_LE(grid.objective, exact.objective + 1e-9) << r;
        EXPECT_NEAR(grid.objective, exact.objective, 5e-3) << r;
        EXPECT_EQ(grid.case_tag, CaseTag::Boundary2) << r;
    }
}

TEST(GridAllocate, RejectsDegenerateGrid)
{
    SystemConfig cfg{32, 100.0, 1.0, 1.0, 1.0, 20};
    EXPECT_THROW(grid_allocate(reference_pair(), cfg, GridSpec{1, 10}), std::invalid_argument);
}

TEST(DecodingOrder, StrongerUserDecodedLastWins)
{
    SystemConfig cfg{32, 100.0, 1.0, 3.0, 3.0, 20};
    const auto cmp = decoding_order_check(reference_pair(), cfg, GridSpec{300, 300});
    EXPECT_EQ(cmp.verdict, DecodingVerdict::Case2Optimal);
    EXPECT_GT(cmp.case2_best, cmp.case1_best);
}

TEST(DecodingOrder, EqualChannelGainsAreIndifferent)
{
    SystemConfig cfg{16, 100.0, 1.0, 2.0, 2.0, 20};
    const auto pair = EffectivePair::from_moduli(0.6, 0.6, -0.3, 0.5, 16);
    const auto cmp = decoding_order_check(pair, cfg, GridSpec{400, 400});
    EXPECT_EQ(cmp.verdict, DecodingVerdict::Indifferent);
    EXPECT_NEAR(cmp.case2_best, cmp.case1_best, 1e-9);
}

TEST(DecodingOrder, RandomInstancesNeverFavourReverseOrder)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10; ++i)
    {
        const double l1 = 0.3 + 0.7 * u(rng);
        const double l2 = l1 * (0.1 + 0.8 * u(rng));
        const double r = 3.0 * u(rng);
        SystemConfig cfg{16, 100.0, 1.0, r, r, 20};
        const auto pair = EffectivePair::from_moduli(l1, l2, -0.25, 0.4, 16);
        const auto cmp = decoding_order_check(pair, cfg, GridSpec{200, 200});
        EXPECT_NE(cmp.verdict, DecodingVerdict::Case1Optimal) << i;
    }
}

TEST(DecodingOrder, RequiresEqualFloors)
{
    SystemConfig cfg{32, 100.0, 1.0, 1.0, 2.0, 20};
    EXPECT_THROW(decoding_order_check(reference_pair(), cfg), std::invalid_argument);
}

TEST(QuantizedSearch, SingleUserTwoElementsIsMatchedFilter)
{
    // Omega = 0.5 puts the second element at phase pi/2, which a 4-level alphabet hits exactly.
    const auto q = quantized_beam_search(BeamTarget{1.0, 0.0, 0.5, 0.0}, 2, 4);
    EXPECT_NEAR(q.gain1, 2.0, 1e-12);
    EXPECT_NEAR(q.min_ratio, 2.0, 1e-12);
}

TEST(QuantizedSearch, OverBudgetTargetsCannotBeMet)
{
    const auto q = quantized_beam_search(BeamTarget{3.0, 3.0, -0.25, 0.4}, 4, 8);
    EXPECT_LT(q.min_ratio, 1.0);
    for (const auto& w : q.beam.weights)
        EXPECT_NEAR(std::abs(w), 0.5, 1e-15);
    EXPECT_EQ(q.beam.weights[0], std::complex<double>(0.5, 0.0));
}

TEST(QuantizedSearch, RejectsLargeArrays)
{
    EXPECT_THROW(quantized_beam_search(BeamTarget{1.0, 1.0, 0.0, 0.5}, 9, 4), std::invalid_argument);
}

TEST(PatternIntegral, UnitNormVectorsIntegrateToOne)
{
    ComplexVector e0{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    EXPECT_NEAR(pattern_integral(e0, 256), 1.0, 1e-12);

    ComplexVector flat(8, std::complex<double>(1.0 / std::sqrt(8.0), 0.0));
    EXPECT_NEAR(pattern_integral(flat, 512), 1.0, 1e-12);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    ComplexVector w(16);
    for (auto& x : w)
        x = {g(rng), g(rng)};
    const double nrm = norm2(w);
    for (auto& x : w)
        x /= nrm;
    EXPECT_NEAR(pattern_integral(w, 1024), 1.0, 1e-12);
    for (auto& x : w)
        x *= 2.0;
    EXPECT_NEAR(pattern_integral(w, 1024), 4.0, 1e-11);
}

TEST(PatternIntegral, RejectsCoarseQuadrature)
{
    ComplexVector w(8, std::complex<double>(1.0, 0.0));
    EXPECT_THROW(pattern_integral(w, 511), std::invalid_argument);
}
