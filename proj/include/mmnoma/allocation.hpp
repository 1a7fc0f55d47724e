// SPDX-License-Identifier: Apache-2.0
//
// Closed-form beam-gain and power allocation for the two-user problem with
// ideal beams, plus the single-variable power re-allocation used once real
// beam gains are known.
//
// Notation: a = |lambda1|^2, b = |lambda2|^2, s = sigma^2, K_i = 2^{r_i} - 1.
// The gain budget is c1/a + c2/b = N, so c2 is a function of c1 and the
// objective is f(c1, p1) = R1 + R2 under the decode-User-2-first order.
#pragma once

#include "mmnoma/channel.hpp"
#include "mmnoma/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace mmnoma {

enum class CaseTag
{
    Saddle,
    Boundary1,
    Boundary2,
    Infeasible
};

inline std::string to_string(CaseTag tag)
{
    switch (tag)
    {
    case CaseTag::Saddle: return "saddle";
    case CaseTag::Boundary1: return "boundary1";
    case CaseTag::Boundary2: return "boundary2";
    case CaseTag::Infeasible: return "infeasible";
    }
    return "unknown";
}

struct GainPowerAllocation
{
    double c1 = 0, c2 = 0;
    double p1 = 0, p2 = 0;
    double objective = 0;
    CaseTag case_tag = CaseTag::Infeasible;
    bool repaired = false; // printed case choice was infeasible or dominated and was replaced
    bool singular = false; // Boundary-1 root came from the linear (removable-singularity) branch

    bool feasible() const noexcept { return case_tag != CaseTag::Infeasible; }
};

/// Two effective channels ordered so that |lambda1| >= |lambda2|.
class EffectivePair
{
public:
    EffectivePair(EffectiveChannel user1, EffectiveChannel user2) : user1_(user1), user2_(user2)
    {
        if (!(std::abs(user1_.gain) > 0.0) || !(std::abs(user2_.gain) > 0.0))
            throw std::invalid_argument("EffectivePair: channel gains must be non-zero");
        if (std::abs(user2_.gain) > std::abs(user1_.gain))
        {
            std::swap(user1_, user2_);
            swapped_ = true;
        }
    }

    /// Convenience for tests and configs that only know moduli and directions.
    static EffectivePair from_moduli(double lambda1, double lambda2, double omega1, double omega2, int n)
    {
        return EffectivePair(EffectiveChannel{lambda1, omega1, n, 0}, EffectiveChannel{lambda2, omega2, n, 0});
    }

    const EffectiveChannel& user1() const noexcept { return user1_; }
    const EffectiveChannel& user2() const noexcept { return user2_; }
    bool swapped() const noexcept { return swapped_; }
    double a() const noexcept { return user1_.power(); }
    double b() const noexcept { return user2_.power(); }

private:
    EffectiveChannel user1_;
    EffectiveChannel user2_;
    bool swapped_ = false;
};

struct SaddlePoint
{
    double c1m = 0;
    double p1m = 0;
    double objective = 0;
};

struct BoundaryPoint
{
    double c1 = 0;
    double p1 = 0;
    bool singular = false;
};

struct PowerSplit
{
    double p1 = 0;
    double p2 = 0;
    double r1 = 0;
    double r2 = 0;
};

namespace detail {

inline double gain_budget_c2(double c1, double a, double b, int n)
{
    return std::max(0.0, (static_cast<double>(n) - c1 / a) * b);
}

// Largest p1 keeping R2 >= r2 for gains (c1, c2). May be negative.
inline double power_upper(double c2, const SystemConfig& cfg)
{
    const double k2 = std::exp2(cfg.rate_floor_2) - 1.0;
    if (k2 == 0.0)
        return cfg.total_power_mw;
    if (c2 <= 0.0)
        return -1.0;
    return (c2 * cfg.total_power_mw - k2 * cfg.noise_power_mw) / (std::exp2(cfg.rate_floor_2) * c2);
}

// Smallest p1 giving R1 >= r1.
inline double power_lower(double c1, const SystemConfig& cfg)
{
    const double k1 = std::exp2(cfg.rate_floor_1) - 1.0;
    if (k1 == 0.0)
        return 0.0;
    if (c1 <= 0.0)
        return std::numeric_limits<double>::infinity();
    return k1 * cfg.noise_power_mw / c1;
}

} // namespace detail

/// f(c1, p1) with c2 taken from the gain budget.
inline double sum_rate_objective(double c1, double p1, const EffectivePair& pair, const SystemConfig& cfg)
{
    const double c2 = detail::gain_budget_c2(c1, pair.a(), pair.b(), cfg.n_antennas);
    return rates_case2(c1, c2, p1, cfg.total_power_mw - p1, cfg.noise_power_mw).sum;
}

/// Stationary point on the c1 = c2 line, where f no longer depends on p1.
inline SaddlePoint saddle_point(const EffectivePair& pair, const SystemConfig& cfg)
{
    const double a = pair.a(), b = pair.b();
    const double n = cfg.n_antennas, p = cfg.total_power_mw, s = cfg.noise_power_mw;
    SaddlePoint sp;
    sp.c1m = a * b * n / (a + b);
    sp.p1m = b * (a + b) * p * s / (a * a * b * n * p + (a + b) * (a + b) * s);
    sp.objective = std::log2(1.0 + a * b * n * p / ((a + b) * s));
    return sp;
}

/// Maximizer of f along R1 = r1.
///
/// Evaluated as c11 = C0*A0 / (k*P*A0 + sqrt(D)), an algebraically equivalent
/// rearrangement of the textbook root that stays finite when K1*b = a.
inline std::optional<BoundaryPoint> boundary1_solution(const EffectivePair& pair, const SystemConfig& cfg)
{
    const double a = pair.a(), b = pair.b();
    const double n = cfg.n_antennas, p = cfg.total_power_mw, s = cfg.noise_power_mw;
    const double k1 = std::exp2(cfg.rate_floor_1) - 1.0;
    if (k1 == 0.0)
        return BoundaryPoint{0.0, 0.0, false};

    const double k = b / a;
    const double a0 = b * n * k1;
    const double b0 = 1.0 - k * k1;
    const double c0 = b * n * p + s;
    const double d = k * k * p * p * a0 * a0 + k * p * b0 * c0 * a0;
    if (!(d >= 0.0))
        return std::nullopt;
    const double denom = k * p * a0 + std::sqrt(d);
    if (!(denom > 0.0))
        return std::nullopt;

    BoundaryPoint bp;
    bp.c1 = c0 * a0 / denom;
    bp.p1 = k1 * s / bp.c1;
    bp.singular = std::abs(b0) < 1e-12;
    return bp;
}

/// Maximizer of f along R2 = r2.
inline std::optional<BoundaryPoint> boundary2_solution(const EffectivePair& pair, const SystemConfig& cfg)
{
    const double a = pair.a(), b = pair.b();
    const double n = cfg.n_antennas, p = cfg.total_power_mw, s = cfg.noise_power_mw;
    const double k2 = std::exp2(cfg.rate_floor_2) - 1.0;

    BoundaryPoint bp;
    bp.c1 = a * (n - std::sqrt(k2 * n * p * s) / (std::sqrt(b) * p));
    if (bp.c1 < 0.0)
        return std::nullopt;
    bp.p1 = detail::power_upper(detail::gain_budget_c2(bp.c1, a, b, cfg.n_antennas), cfg);
    if (!(bp.p1 >= 0.0 && bp.p1 <= p))
        return std::nullopt;
    return bp;
}

/// True when (c1, p1) meets every constraint of the reduced problem, with a
/// small relative slack on the rate floors.
inline bool allocation_feasible(double c1, double p1, const EffectivePair& pair, const SystemConfig& cfg)
{
    const double a = pair.a(), b = pair.b();
    const double n = cfg.n_antennas;
    const double c1m = a * b * n / (a + b);
    const double tol = 1e-9 * n * a;
    if (!(c1 >= c1m - tol && c1 <= n * a + tol))
        return false;
    if (!(p1 >= 0.0 && p1 <= cfg.total_power_mw))
        return false;
    const double c2 = detail::gain_budget_c2(c1, a, b, cfg.n_antennas);
    const auto r = rates_case2(c1, c2, p1, cfg.total_power_mw - p1, cfg.noise_power_mw);
    return r.r1 >= cfg.rate_floor_1 - 1e-9 && r.r2 >= cfg.rate_floor_2 - 1e-9;
}

/// Analytic non-emptiness test for the feasible region. c1 * p_hi(c1) peaks at
/// c_{1,2} on Boundary 2, so it suffices to test R1 there (clamped to c1 >= c1m).
inline bool allocation_instance_feasible(const EffectivePair& pair, const SystemConfig& cfg)
{
    const double a = pair.a(), b = pair.b();
    const double n = cfg.n_antennas, p = cfg.total_power_mw, s = cfg.noise_power_mw;
    const double c1m = a * b * n / (a + b);
    const double k2 = std::exp2(cfg.rate_floor_2) - 1.0;
    const double c12 = a * (n - std::sqrt(k2 * n * p * s) / (std::sqrt(b) * p));
    const double c = std::clamp(c12, c1m, n * a);
    const double p_hi = detail::power_upper(detail::gain_budget_c2(c, a, b, cfg.n_antennas), cfg);
    if (p_hi < 0.0)
        return false;
    return std::log2(1.0 + c * p_hi / s) >= cfg.rate_floor_1 * (1.0 - 1e-12) - 1e-12;
}

namespace detail {

inline GainPowerAllocation make_allocation(double c1, double p1, CaseTag tag, const EffectivePair& pair,
                                           const SystemConfig& cfg)
{
    GainPowerAllocation out;
    out.c1 = c1;
    out.c2 = gain_budget_c2(c1, pair.a(), pair.b(), cfg.n_antennas);
    out.p1 = p1;
    out.p2 = cfg.total_power_mw - p1;
    out.objective = rates_case2(out.c1, out.c2, out.p1, out.p2, cfg.noise_power_mw).sum;
    out.case_tag = tag;
    return out;
}

} // namespace detail

/// Four-case selection between the Boundary-3 saddle value and the two
/// boundary maximizers, with a feasibility screen in front.
inline GainPowerAllocation allocate(const EffectivePair& pair, const SystemConfig& cfg)
{
    cfg.validate();
    if (!allocation_instance_feasible(pair, cfg))
        return GainPowerAllocation{};

    const double a = pair.a();
    const double tol = 1e-9 * cfg.n_antennas * a;
    const auto sp = saddle_point(pair, cfg);

    auto saddle = [&] {
        const double lo = detail::power_lower(sp.c1m, cfg);
        const double hi = std::min(detail::power_upper(sp.c1m, cfg), cfg.total_power_mw);
        auto out = detail::make_allocation(sp.c1m, 0.5 * (lo + hi), CaseTag::Saddle, pair, cfg);
        out.c2 = sp.c1m;
        out.objective = sp.objective;
        return out;
    };

    const auto b1 = boundary1_solution(pair, cfg);
    const auto b2 = boundary2_solution(pair, cfg);
    const bool b1_above = b1 && b1->c1 > sp.c1m + tol;
    const bool b2_above = b2 && b2->c1 > sp.c1m + tol;

    const bool b1_ok = b1_above && allocation_feasible(b1->c1, b1->p1, pair, cfg);
    const bool b2_ok = b2_above && allocation_feasible(b2->c1, b2->p1, pair, cfg);

    auto from_b1 = [&] {
        auto out = detail::make_allocation(b1->c1, b1->p1, CaseTag::Boundary1, pair, cfg);
        out.singular = b1->singular;
        return out;
    };
    auto from_b2 = [&] { return detail::make_allocation(b2->c1, b2->p1, CaseTag::Boundary2, pair, cfg); };

    if (!b1_above && !b2_above)
        return saddle();

    if (b1_above && !b2_above)
    {
        if (b1_ok)
        {
            auto out = from_b1();
            if (out.objective >= sp.objective - 1e-9)
                return out;
        }
        auto out = saddle();
        out.repaired = true;
        return out;
    }

    if (!b1_above)
    {
        if (b2_ok)
            return from_b2();
        auto out = saddle();
        out.repaired = true;
        return out;
    }

    if (b1_ok && b2_ok)
    {
        auto o1 = from_b1();
        auto o2 = from_b2();
        return o1.objective >= o2.objective - 1e-6 ? o1 : o2;
    }
    if (b2_ok || b1_ok)
    {
        auto out = b2_ok ? from_b2() : from_b1();
        out.repaired = true;
        return out;
    }
    auto out = saddle();
    out.repaired = true;
    return out;
}

/// Power split for realized gains c1 >= c2: the largest p1 that keeps R2 >= r2.
/// Returns nullopt when the floors cannot both be met.
inline std::optional<PowerSplit> finalize_power(double c1, double c2, const SystemConfig& cfg)
{
    if (!(c2 >= 0.0))
        throw std::invalid_argument("finalize_power: c2 must be non-negative");
    if (!(c1 >= c2))
        throw std::invalid_argument("finalize_power: requires c1 >= c2");

    const double p = cfg.total_power_mw, s = cfg.noise_power_mw;
    const double k2 = std::exp2(cfg.rate_floor_2) - 1.0;
    if (k2 > 0.0 && c2 * p < k2 * s)
        return std::nullopt;

    const double p1 = std::clamp(detail::power_upper(c2, cfg), 0.0, p);

    // The objective must be nondecreasing in p1 on [0, p1] for the largest p1 to be optimal.
    constexpr int probes = 16;
    double prev = rates_case2(c1, c2, 0.0, p, s).sum;
    for (int i = 1; i <= probes; ++i)
    {
        const double x = p1 * i / probes;
        const double cur = rates_case2(c1, c2, x, p - x, s).sum;
        if (cur < prev - 1e-12 * std::max(1.0, std::abs(prev)))
            throw std::logic_error("finalize_power: objective is not monotone in p1");
        prev = cur;
    }

    const auto r = rates_case2(c1, c2, p1, p - p1, s);
    if (r.r1 < cfg.rate_floor_1 - 1e-9 || r.r2 < cfg.rate_floor_2 - 1e-9)
        return std::nullopt;
    return PowerSplit{p1, p - p1, r.r1, r.r2};
}

} // namespace mmnoma
