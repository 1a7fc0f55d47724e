// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference solvers. None of these share code paths with the
// closed-form allocation or the dual beam solver beyond the rate formulas.
#pragma once

#include "mmnoma/allocation.hpp"
#include "mmnoma/beamformer.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/rate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mmnoma {

struct GridSpec
{
    int c1_points = 2000;
    int p1_points = 2000;
};

/// Exhaustive search of f(c1, p1) over [0, N|l1|^2] x [0, P] under either
/// decoding order. Points violating a floor or the order's gain inequality
/// are skipped.
inline GainPowerAllocation grid_allocate(const EffectivePair& pair, const SystemConfig& cfg, const GridSpec& grid,
                                         DecodingOrder order = DecodingOrder::DecodeUser2First)
{
    if (grid.c1_points < 2 || grid.p1_points < 2)
        throw std::invalid_argument("grid_allocate: need at least two points per axis");
    const double a = pair.a(), b = pair.b();
    const int n = cfg.n_antennas;
    const double p = cfg.total_power_mw, s = cfg.noise_power_mw;
    const double c1_max = n * a;
    const double dc = c1_max / (grid.c1_points - 1);
    const double dp = p / (grid.p1_points - 1);
    const double r1 = cfg.rate_floor_1, r2 = cfg.rate_floor_2;
    const bool case2 = order == DecodingOrder::DecodeUser2First;

    double best = -std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < grid.c1_points; ++i)
    {
        const double c1 = i == grid.c1_points - 1 ? c1_max : i * dc;
        const double c2 = std::max(0.0, (n - c1 / a) * b);
        if (case2 ? c1 < c2 : c2 < c1)
            continue;
        for (int j = 0; j < grid.p1_points; ++j)
        {
            const double p1 = j == grid.p1_points - 1 ? p : j * dp;
            const auto r = case2 ? rates_case2(c1, c2, p1, p - p1, s) : rates_case1(c1, c2, p1, p - p1, s);
            if (r.r1 < r1 || r.r2 < r2)
                continue;
            if (r.sum > best)
            {
                best = r.sum;
                bi = i;
                bj = j;
            }
        }
    }

    GainPowerAllocation out;
    if (bi < 0)
        return out;
    out.c1 = bi == grid.c1_points - 1 ? c1_max : bi * dc;
    out.c2 = std::max(0.0, (n - out.c1 / a) * b);
    out.p1 = bj == grid.p1_points - 1 ? p : bj * dp;
    out.p2 = p - out.p1;
    out.objective = best;

    // Rough location label: on the c1 = c2 line, at the top of the feasible
    // column (R2 floor active), or elsewhere (R1 floor active).
    const double c1m = a * b * n / (a + b);
    if (std::abs(out.c1 - c1m) <= dc)
        out.case_tag = CaseTag::Saddle;
    else
    {
        bool top = bj == grid.p1_points - 1;
        if (!top)
        {
            const double p1n = (bj + 1) * dp;
            const auto r = case2 ? rates_case2(out.c1, out.c2, p1n, p - p1n, s)
                                 : rates_case1(out.c1, out.c2, p1n, p - p1n, s);
            top = r.r2 < r2;
        }
        out.case_tag = top ? CaseTag::Boundary2 : CaseTag::Boundary1;
    }
    return out;
}

enum class DecodingVerdict
{
    Case2Optimal,
    Indifferent,
    Case1Optimal
};

inline std::string to_string(DecodingVerdict v)
{
    switch (v)
    {
    case DecodingVerdict::Case2Optimal: return "case2_optimal";
    case DecodingVerdict::Indifferent: return "indifferent";
    case DecodingVerdict::Case1Optimal: return "case1_optimal";
    }
    return "unknown";
}

struct DecodingComparison
{
    DecodingVerdict verdict = DecodingVerdict::Indifferent;
    double case2_best = 0; // -inf when infeasible
    double case1_best = 0;
};

/// Compare the grid optima of both decoding orders. Equal floors only.
inline DecodingComparison decoding_order_check(const EffectivePair& pair, const SystemConfig& cfg,
                                               const GridSpec& grid = GridSpec{1000, 1000})
{
    if (cfg.rate_floor_1 != cfg.rate_floor_2)
        throw std::invalid_argument("decoding_order_check: requires rate_floor_1 == rate_floor_2");
    const auto g2 = grid_allocate(pair, cfg, grid, DecodingOrder::DecodeUser2First);
    const auto g1 = grid_allocate(pair, cfg, grid, DecodingOrder::DecodeUser1First);
    const double ninf = -std::numeric_limits<double>::infinity();
    DecodingComparison out;
    out.case2_best = g2.feasible() ? g2.objective : ninf;
    out.case1_best = g1.feasible() ? g1.objective : ninf;
    if (!g2.feasible() && !g1.feasible())
        out.verdict = DecodingVerdict::Indifferent;
    else if (out.case2_best > out.case1_best + 1e-6)
        out.verdict = DecodingVerdict::Case2Optimal;
    else if (out.case1_best > out.case2_best + 1e-6)
        out.verdict = DecodingVerdict::Case1Optimal;
    else
        out.verdict = DecodingVerdict::Indifferent;
    return out;
}

struct QuantizedBeam
{
    BeamVector beam;
    double min_ratio = 0; // min over non-zero targets of |a_i^H w|^2 / b_i
    double gain1 = 0;     // |a1^H w|^2
    double gain2 = 0;
};

/// Enumerate every CM vector whose phases are multiples of 2 pi / levels
/// (first element fixed at phase 0) and keep the one with the best worst-case
/// achieved-over-target ratio.
inline QuantizedBeam quantized_beam_search(const BeamTarget& target, int n, int phase_levels)
{
    if (n < 1 || n > 8)
        throw std::invalid_argument("quantized_beam_search: n must be in [1, 8]");
    if (phase_levels < 1)
        throw std::invalid_argument("quantized_beam_search: phase_levels must be positive");

    const auto a1 = steering_vector(n, target.omega1);
    const auto a2 = steering_vector(n, target.omega2);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::complex<double>> unit(static_cast<std::size_t>(phase_levels));
    for (int l = 0; l < phase_levels; ++l)
        unit[static_cast<std::size_t>(l)] = std::polar(amp, 2.0 * std::numbers::pi * l / phase_levels);

    // Per-element contributions conj(a_k) * w_k for each phase level.
    std::vector<std::complex<double>> t1(static_cast<std::size_t>(n * phase_levels));
    std::vector<std::complex<double>> t2(t1.size());
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < phase_levels; ++l)
        {
            const auto idx = static_cast<std::size_t>(k * phase_levels + l);
            t1[idx] = std::conj(a1[static_cast<std::size_t>(k)]) * unit[static_cast<std::size_t>(l)];
            t2[idx] = std::conj(a2[static_cast<std::size_t>(k)]) * unit[static_cast<std::size_t>(l)];
        }

    auto score = [&](double g1, double g2) {
        double r = std::numeric_limits<double>::infinity();
        if (target.b1 > 0.0)
            r = std::min(r, g1 / target.b1);
        if (target.b2 > 0.0)
            r = std::min(r, g2 / target.b2);
        return r;
    };

    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    std::vector<int> best_digits = digits;
    double best = -std::numeric_limits<double>::infinity();
    double best_g1 = 0, best_g2 = 0;
    long long total = 1;
    for (int k = 1; k < n; ++k)
        total *= phase_levels;
    for (long long idx = 0; idx < total; ++idx)
    {
        long long rem = idx;
        for (int k = n - 1; k >= 1; --k)
        {
            digits[static_cast<std::size_t>(k)] = static_cast<int>(rem % phase_levels);
            rem /= phase_levels;
        }
        std::complex<double> s1{}, s2{};
        for (int k = 0; k < n; ++k)
        {
            const auto i = static_cast<std::size_t>(k * phase_levels + digits[static_cast<std::size_t>(k)]);
            s1 += t1[i];
            s2 += t2[i];
        }
        const double g1 = std::norm(s1), g2 = std::norm(s2);
        const double sc = score(g1, g2);
        if (sc > best)
        {
            best = sc;
            best_digits = digits;
            best_g1 = g1;
            best_g2 = g2;
        }
    }

    QuantizedBeam out;
    out.beam.is_cm = true;
    out.beam.weights.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        out.beam.weights[static_cast<std::size_t>(k)] = unit[static_cast<std::size_t>(best_digits[static_cast<std::size_t>(k)])];
    out.min_ratio = best;
    out.gain1 = best_g1;
    out.gain2 = best_g2;
    return out;
}

/// (1/2) * trapezoid integral of |a(N, Omega)^H w|^2 over Omega in [-1, 1].
inline double pattern_integral(const ComplexVector& w, int quad_points)
{
    const int n = static_cast<int>(w.size());
    if (quad_points < 64 * n)
        throw std::invalid_argument("pattern_integral: need at least 64*N quadrature points");
    const auto grid = uniform_grid(quad_points);
    const auto pat = beam_pattern(w, grid);
    const double h = 2.0 / (quad_points - 1);
    double acc = 0.5 * (pat.front() + pat.back());
    for (std::size_t i = 1; i + 1 < pat.size(); ++i)
        acc += pat[i];
    return 0.5 * acc * h;
}

inline double pattern_integral(const BeamVector& w, int quad_points)
{
    return pattern_integral(w.weights, quad_points);
}

} // namespace mmnoma
