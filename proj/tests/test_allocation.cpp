// SPDX-License-Identifier: Apache-2.0
#include "mmnoma/allocation.hpp"
#include "mmnoma/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mmnoma;

namespace {

SystemConfig reference_system(double r1 = 3.0, double r2 = 3.0)
{
    return SystemConfig{32, 100.0, 1.0, r1, r2, 20};
}

EffectivePair reference_pair()
{
    return EffectivePair::from_moduli(0.8, 0.5, -0.25, 0.4, 32);
}

// Textbook form of the Boundary-1 root, evaluated independently of the library.
double printed_c11(double a, double b, double n, double p, double s, double r1)
{
    const double k1 = std::exp2(r1) - 1.0;
    const double g = k1 * a * b * n * n * p * p +
                     (k1 * a + (std::exp2(1.0 + r1) - std::exp2(2.0 * r1) - 1.0) * b) * n * p * s;
    return a * ((std::exp2(1.0 + r1) - 2.0) * b * n * p - 2.0 * std::sqrt(g)) / (2.0 * p * (k1 * b - a));
}

void expect_budget_identities(const GainPowerAllocation& g, const EffectivePair& pair, const SystemConfig& cfg)
{
    ASSERT_TRUE(g.feasible());
    EXPECT_NEAR(g.p1 + g.p2, cfg.total_power_mw, 1e-9 * cfg.total_power_mw);
    EXPECT_NEAR(g.c1 / pair.a() + g.c2 / pair.b(), cfg.n_antennas, 1e-9 * cfg.n_antennas);
    EXPECT_GE(g.c1, g.c2 - 1e-9);
    const auto r = rates_case2(g.c1, g.c2, g.p1, g.p2, cfg.noise_power_mw);
    EXPECT_GE(r.r1, cfg.rate_floor_1 - 1e-9);
    EXPECT_GE(r.r2, cfg.rate_floor_2 - 1e-9);
    EXPECT_NEAR(r.sum, g.objective, 1e-9);
}

} // namespace

TEST(EffectivePair, SwapNormalizes)
{
    const auto p = EffectivePair::from_moduli(0.3, 0.9, 0.1, -0.2, 16);
    EXPECT_TRUE(p.swapped());
    EXPECT_DOUBLE_EQ(std::abs(p.user1().gain), 0.9);
    EXPECT_DOUBLE_EQ(p.user1().direction, -0.2);
    EXPECT_FALSE(reference_pair().swapped());
    EXPECT_THROW(EffectivePair::from_moduli(0.0, 0.5, 0.0, 0.5, 16), std::invalid_argument);
}

TEST(SaddlePoint, EqualChannelsSplitGainInHalf)
{
    const auto sp = saddle_point(EffectivePair::from_moduli(0.7, 0.7, 0.0, 0.5, 16), SystemConfig{16});
    EXPECT_NEAR(sp.c1m, 16 * 0.49 / 2.0, 1e-12);
}

TEST(SaddlePoint, ReferenceValues)
{
    const auto sp = saddle_point(reference_pair(), reference_system());
    EXPECT_NEAR(sp.c1m, 5.752808988764045, 1e-12);
    EXPECT_NEAR(sp.p1m, 0.06773786875658541, 1e-14);
    EXPECT_NEAR(sp.objective, 9.170628391430643, 1e-12);
}

TEST(SaddlePoint, ObjectiveIsConstantOnEqualGainLine)
{
    const auto pair = reference_pair();
    const auto cfg = reference_system();
    const auto sp = saddle_point(pair, cfg);
    for (double p1 : {0.0, 1.0, 10.0, 50.0, 99.0})
        EXPECT_NEAR(sum_rate_objective(sp.c1m, p1, pair, cfg), sp.objective, 1e-9);
}

TEST(SaddlePoint, Sandwich)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i)
    {
        const int n = 4 + static_cast<int>(u(rng) * 60);
        const double l1 = 0.2 + u(rng), l2 = l1 * (0.05 + 0.95 * u(rng));
        SystemConfig cfg{n, std::pow(10.0, 3.0 * u(rng)), 0.1 + u(rng), 0, 0, 20};
        const auto pair = EffectivePair::from_moduli(l1, l2, 0.0, 0.5, n);
        const auto sp = saddle_point(pair, cfg);
        const double na = n * pair.a();
        EXPECT_NEAR(sum_rate_objective(na, 0.0, pair, cfg), 0.0, 1e-10);
        EXPECT_NEAR(sum_rate_objective(0.0, cfg.total_power_mw, pair, cfg), 0.0, 1e-10);
        EXPECT_GE(sp.objective, 0.0);
        EXPECT_LE(sp.objective, std::max(sum_rate_objective(0.0, 0.0, pair, cfg),
                                         sum_rate_objective(na, cfg.total_power_mw, pair, cfg)) + 1e-12);
    }
}

TEST(Boundary1, ZeroFloorNeedsNoPower)
{
    const auto bp = boundary1_solution(reference_pair(), reference_system(0.0, 3.0));
    ASSERT_TRUE(bp);
    EXPECT_EQ(bp->p1, 0.0);
}

TEST(Boundary1, ReferenceValues)
{
    const double c11[] = {7.884921554065517, 10.659673372560702, 12.783344395436654, 14.523802902667173};
    for (int r = 1; r <= 4; ++r)
    {
        const auto bp = boundary1_solution(reference_pair(), reference_system(r, r));
        ASSERT_TRUE(bp);
        EXPECT_NEAR(bp->c1, c11[r - 1], 1e-10);
        EXPECT_NEAR(bp->p1, (std::exp2(r) - 1.0) / bp->c1, 1e-14);
        EXPECT_FALSE(bp->singular);
    }
}

TEST(Boundary1, MatchesTextbookFormAwayFromSingularity)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int compared = 0;
    for (int i = 0; i < 500; ++i)
    {
        const int n = 8 + static_cast<int>(u(rng) * 56);
        const double l1 = 0.3 + u(rng), l2 = l1 * (0.1 + 0.9 * u(rng));
        const double r1 = 5.0 * u(rng);
        SystemConfig cfg{n, std::pow(10.0, 1.0 + 2.0 * u(rng)), 1.0, r1, 1.0, 20};
        const auto pair = EffectivePair::from_moduli(l1, l2, 0.0, 0.5, n);
        const double k1b = (std::exp2(r1) - 1.0) * pair.b();
        if (std::abs(k1b - pair.a()) < 1e-3 * pair.a())
            continue;
        const double ref = printed_c11(pair.a(), pair.b(), n, cfg.total_power_mw, 1.0, r1);
        const auto bp = boundary1_solution(pair, cfg);
        if (!std::isfinite(ref) || ref <= 0.0)
            continue;
        ASSERT_TRUE(bp);
        EXPECT_NEAR(bp->c1, ref, 1e-7 * std::max(1.0, ref));
        ++compared;
    }
    EXPECT_GT(compared, 300);
}

TEST(Boundary1, RemovableSingularityUsesLinearRoot)
{
    // (2^r1 - 1) |l2|^2 = |l1|^2 with |l1| = 0.8, |l2| = 0.4 needs 2^r1 = 5.
    const double r1 = std::log2(5.0);
    const auto pair = EffectivePair::from_moduli(0.8, 0.4, 0.0, 0.5, 32);
    const auto cfg = SystemConfig{32, 100.0, 1.0, r1, 1.0, 20};
    const auto bp = boundary1_solution(pair, cfg);
    ASSERT_TRUE(bp);
    EXPECT_TRUE(bp->singular);
    const double a = 0.64, b = 0.16;
    EXPECT_NEAR(bp->c1, 32 * a / 2.0 + a / (2.0 * b * 100.0), 1e-9);
}

TEST(Boundary1, RootMaximizesObjectiveAlongBoundary)
{
    const auto pair = reference_pair();
    const auto cfg = reference_system();
    const auto bp = boundary1_solution(pair, cfg);
    ASSERT_TRUE(bp);
    const double k1 = 7.0;
    auto along = [&](double c) { return sum_rate_objective(c, k1 / c, pair, cfg); };
    const double best = along(bp->c1);
    for (double c = 1.0; c < 32 * 0.64; c += 0.01)
        EXPECT_LE(along(c), best + 1e-9) << c;
}

TEST(Boundary2, ZeroFloorGivesAllGainToUser1)
{
    const auto bp = boundary2_solution(reference_pair(), reference_system(3.0, 0.0));
    ASSERT_TRUE(bp);
    EXPECT_NEAR(bp->c1, 32 * 0.64, 1e-12);
    EXPECT_DOUBLE_EQ(bp->p1, 100.0);
}

TEST(Boundary2, ImpossibleFloorHasNoRoot)
{
    // 2^r2 - 1 > |l2|^2 N P / sigma^2 = 800.
    EXPECT_FALSE(boundary2_solution(reference_pair(), reference_system(1.0, 10.0)));
}

TEST(Boundary2, ReferenceValues)
{
    const double c12[] = {19.755922656064975, 19.22586125169501, 18.564271417971742, 17.67566050557355};
    const double p12[] = {48.23223304703363, 23.469068910760512, 11.330732066633143, 5.394183503898177};
    for (int r = 1; r <= 4; ++r)
    {
        const auto bp = boundary2_solution(reference_pair(), reference_system(r, r));
        ASSERT_TRUE(bp);
        EXPECT_NEAR(bp->c1, c12[r - 1], 1e-10);
        EXPECT_NEAR(bp->p1, p12[r - 1], 1e-9);
    }
}

TEST(Boundary2, User2RateEqualsFloor)
{
    const auto pair = reference_pair();
    for (double r = 0.5; r <= 4.5; r += 0.5)
    {
        const auto cfg = reference_system(r, r);
        const auto bp = boundary2_solution(pair, cfg);
        ASSERT_TRUE(bp);
        const double c2 = (32 - bp->c1 / pair.a()) * pair.b();
        EXPECT_NEAR(rates_case2(bp->c1, c2, bp->p1, 100.0 - bp->p1, 1.0).r2, r, 1e-12);
    }
}

TEST(Allocate, ZeroFloorsGoToCorner)
{
    const auto pair = reference_pair();
    const auto cfg = reference_system(0.0, 0.0);
    const auto g = allocate(pair, cfg);
    ASSERT_TRUE(g.feasible());
    EXPECT_NEAR(g.c1, 32 * 0.64, 1e-12);
    EXPECT_DOUBLE_EQ(g.p1, 100.0);
    EXPECT_NEAR(g.objective, std::log2(1.0 + 32 * 0.64 * 100.0), 1e-12);
}

TEST(Allocate, ReferenceObjectives)
{
    const double ref[] = {10.897652275592279, 10.820858856021744, 10.723468359150143, 10.590149217335712};
    for (int r = 1; r <= 4; ++r)
    {
        const auto cfg = reference_system(r, r);
        const auto g = allocate(reference_pair(), cfg);
        EXPECT_EQ(g.case_tag, CaseTag::Boundary2);
        EXPECT_FALSE(g.repaired);
        EXPECT_NEAR(g.objective, ref[r - 1], 1e-10);
        expect_budget_identities(g, reference_pair(), cfg);
    }
}

TEST(Allocate, User2PinnedAtFloor)
{
    // R2 tops out near 8.67 here once User 1 holds 0.5 bps/Hz.
    const auto g = allocate(reference_pair(), reference_system(0.5, 8.5));
    ASSERT_TRUE(g.feasible());
    EXPECT_NEAR(rates_case2(g.c1, g.c2, g.p1, g.p2, 1.0).r2, 8.5, 1e-9);
    EXPECT_FALSE(allocate(reference_pair(), reference_system(0.5, 9.0)).feasible());
    EXPECT_FALSE(grid_allocate(reference_pair(), reference_system(0.5, 9.0), GridSpec{400, 400}).feasible());
}

TEST(Allocate, InfeasibleFloors)
{
    const auto g = allocate(reference_pair(), reference_system(12.0, 12.0));
    EXPECT_FALSE(g.feasible());
    EXPECT_EQ(g.case_tag, CaseTag::Infeasible);
}

TEST(Allocate, SaddleCaseWhenFloorForcesEqualGains)
{
    // A User-2 floor this high pushes the Boundary-2 root below c1m.
    const auto pair = EffectivePair::from_moduli(0.8, 0.75, -0.25, 0.4, 32);
    SystemConfig cfg{32, 100.0, 1.0, 0.1, 9.5, 20};
    const auto g = allocate(pair, cfg);
    ASSERT_EQ(g.case_tag, CaseTag::Saddle);
    const auto sp = saddle_point(pair, cfg);
    EXPECT_NEAR(g.c1, sp.c1m, 1e-12);
    EXPECT_NEAR(g.objective, sp.objective, 1e-12);
    const double lo = (std::exp2(cfg.rate_floor_1) - 1.0) / sp.c1m;
    const double hi = (sp.c1m * 100.0 - (std::exp2(9.5) - 1.0)) / (std::exp2(9.5) * sp.c1m);
    EXPECT_NEAR(g.p1, 0.5 * (lo + hi), 1e-12);
    expect_budget_identities(g, pair, cfg);
}

TEST(Allocate, MatchesExhaustiveSearchOnRandomInstances)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int feasible = 0, saddle = 0;
    for (int i = 0; i < 100; ++i)
    {
        const int n = 8 + static_cast<int>(u(rng) * 56);
        const double l1 = 0.3 + 1.2 * u(rng), l2 = l1 * (0.1 + 0.9 * u(rng));
        SystemConfig cfg{n, std::pow(10.0, 1.0 + 2.0 * u(rng)), 1.0, 5.0 * u(rng), 5.0 * u(rng), 20};
        const auto pair = EffectivePair::from_moduli(l1, l2, 0.0, 0.5, n);
        const auto g = allocate(pair, cfg);
        const auto brute = grid_allocate(pair, cfg, GridSpec{600, 600});
        EXPECT_EQ(g.feasible(), brute.feasible()) << i;
        if (!g.feasible() || !brute.feasible())
            continue;
        ++feasible;
        saddle += g.case_tag == CaseTag::Saddle;
        expect_budget_identities(g, pair, cfg);
        // Closed form is exact, so it can only beat a grid point.
        EXPECT_GE(g.objective, brute.objective - 1e-9) << i;
        EXPECT_LE(g.objective - brute.objective, 0.05) << i;
    }
    EXPECT_GT(feasible, 30);
}

TEST(Allocate, BoundaryPointsNeverBeatBoundary2)
{
    // f increases with p1 whenever c1 > c2, so any feasible Boundary-1 point is
    // dominated by Boundary 2 at the same c1.
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i)
    {
        const int n = 8 + static_cast<int>(u(rng) * 56);
        const double l1 = 0.3 + 1.2 * u(rng), l2 = l1 * (0.1 + 0.9 * u(rng));
        SystemConfig cfg{n, std::pow(10.0, 1.0 + 2.0 * u(rng)), 1.0, 5.0 * u(rng), 5.0 * u(rng), 20};
        const auto pair = EffectivePair::from_moduli(l1, l2, 0.0, 0.5, n);
        const auto b1 = boundary1_solution(pair, cfg);
        const auto b2 = boundary2_solution(pair, cfg);
        if (!b1 || !b2 || !allocation_feasible(b1->c1, b1->p1, pair, cfg) ||
            !allocation_feasible(b2->c1, b2->p1, pair, cfg))
            continue;
        EXPECT_LE(sum_rate_objective(b1->c1, b1->p1, pair, cfg),
                  sum_rate_objective(b2->c1, b2->p1, pair, cfg) + 1e-9);
    }
}

TEST(FinalizePower, ZeroUser2FloorGivesAllPower)
{
    const auto s = finalize_power(10.0, 2.0, reference_system(1.0, 0.0));
    ASSERT_TRUE(s);
    EXPECT_DOUBLE_EQ(s->p1, 100.0);
    EXPECT_DOUBLE_EQ(s->p2, 0.0);
}

TEST(FinalizePower, WeakUser2IsInfeasible)
{
    // c2 P < (2^r2 - 1) sigma^2
    EXPECT_FALSE(finalize_power(10.0, 0.05, reference_system(1.0, 3.0)));
}

TEST(FinalizePower, User1FloorChecked)
{
    EXPECT_FALSE(finalize_power(0.2, 0.1, reference_system(6.0, 0.5)));
}

TEST(FinalizePower, RejectsWrongGainOrder)
{
    EXPECT_THROW(finalize_power(1.0, 2.0, reference_system()), std::invalid_argument);
    EXPECT_THROW(finalize_power(1.0, -0.5, reference_system()), std::invalid_argument);
}

TEST(FinalizePower, MatchesOneDimensionalSearch)
{
    // Golden-section on the feasible p1 interval as an independent reference.
    const auto cfg = reference_system();
    for (const auto& [c1, c2] : std::vector<std::pair<double, double>>{{14.417686643439644, 1.5773787698720683},
                                                                      {18.0, 3.0},
                                                                      {9.0, 8.5}})
    {
        auto f = [&](double p1) {
            const auto r = rates_case2(c1, c2, p1, 100.0 - p1, 1.0);
            return (r.r1 >= 3.0 - 1e-12 && r.r2 >= 3.0 - 1e-12) ? r.sum : -1e9 + p1;
        };
        double lo = 0.0, hi = 100.0;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        // Coarse scan for the last feasible sample, then refine the edge.
        double best_p = 0.0;
        for (int i = 0; i <= 100000; ++i)
            if (f(i * 1e-3) > -1e8)
                best_p = i * 1e-3;
        lo = std::max(0.0, best_p - 1e-3);
        hi = std::min(100.0, best_p + 1e-3);
        for (int it = 0; it < 200; ++it)
        {
            const double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            (f(x1) < f(x2) ? lo : hi) = f(x1) < f(x2) ? x1 : x2;
        }
        const auto s = finalize_power(c1, c2, cfg);
        ASSERT_TRUE(s);
        EXPECT_NEAR(s->p1, 0.5 * (lo + hi), 1e-6);
        EXPECT_NEAR(s->r2, 3.0, 1e-9);
    }
}
