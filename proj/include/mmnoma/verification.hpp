// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks shared by `mmnoma verify` and the acceptance test binary.
// Each check returns a pass flag and a one-line summary of the worst case.
#pragma once

#include "mmnoma/allocation.hpp"
#include "mmnoma/beamformer.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/oracle.hpp"
#include "mmnoma/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mmnoma {

struct CriterionResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

struct VerifyOptions
{
    bool quick = false; // reduced sample counts for smoke runs; acceptance uses full scale
    std::uint64_t seed = 20240601;
    int threads = 1;
};

namespace detail {

inline std::string fmt(const char* format, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

template <typename Fn>
CriterionResult timed(int id, std::string name, Fn fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try
    {
        r = fn();
    }
    catch (const std::exception& e)
    {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.id = id;
    r.name = std::move(name);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline ExperimentConfig reference_config()
{
    ExperimentConfig cfg;
    cfg.system = SystemConfig{32, 100.0, 1.0, 3.0, 3.0, 20};
    return cfg;
}

// Random target with both gains non-zero and b1 + b2 <= N.
inline BeamTarget random_target(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    BeamTarget t;
    const double total = n * (0.2 + 0.8 * u(rng));
    const double split = 0.05 + 0.9 * u(rng);
    t.b1 = total * split;
    t.b2 = total - t.b1;
    t.omega1 = 2.0 * u(rng) - 1.0;
    t.omega2 = 2.0 * u(rng) - 1.0;
    return t;
}

struct ModulusSpread
{
    double top_spread = 0; // (max - (N-1)-th largest) / max
    double excess = 0;     // (smallest - max) / max, should be <= 0
};

inline ModulusSpread modulus_spread(const ComplexVector& w)
{
    std::vector<double> m;
    m.reserve(w.size());
    for (const auto& x : w)
        m.push_back(std::abs(x));
    std::sort(m.begin(), m.end(), std::greater<>());
    ModulusSpread s;
    if (m.empty() || m.front() == 0.0)
        return s;
    const std::size_t k = m.size() >= 2 ? m.size() - 2 : 0;
    s.top_spread = (m.front() - m[k]) / m.front();
    s.excess = (m.back() - m.front()) / m.front();
    return s;
}

} // namespace detail

/// allocate vs a 2000 x 2000 grid at the reference configuration, r in {1,2,3,4}.
inline CriterionResult check_oracle_equivalence(const VerifyOptions& opt)
{
    return detail::timed(1, "oracle equivalence (allocation vs grid)", [&] {
        const auto cfg = detail::reference_config();
        const auto pair = reference_pair(cfg);
        const GridSpec grid = opt.quick ? GridSpec{500, 500} : GridSpec{2000, 2000};
        const double tol = opt.quick ? 2e-2 : 1e-3;
        CriterionResult r;
        r.passed = true;
        double worst = 0, slowest = 0;
        for (double rate : {1.0, 2.0, 3.0, 4.0})
        {
            auto sys = sweep_point_config(cfg, SweepAxis::RateFloor, rate);
            const auto t0 = std::chrono::steady_clock::now();
            const auto closed = allocate(pair, sys);
            const auto brute = grid_allocate(pair, sys, grid);
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            slowest = std::max(slowest, dt);
            if (!closed.feasible() || !brute.feasible())
            {
                r.passed = false;
                continue;
            }
            const double diff = std::abs(closed.objective - brute.objective);
            worst = std::max(worst, diff);
            if (diff > tol || dt >= 60.0)
                r.passed = false;
        }
        r.detail = "max |allocate - grid| = " + detail::fmt("%.3e", worst) + " bps/Hz (tol " +
                   detail::fmt("%.0e", tol) + "), slowest point " + detail::fmt("%.2f", slowest) + " s";
        return r;
    });
}

/// Case-2 grid optimum >= Case-1 grid optimum on randomized equal-floor instances.
inline CriterionResult check_decoding_order(const VerifyOptions& opt)
{
    return detail::timed(2, "decoding order (case 2 >= case 1)", [&] {
        std::mt19937_64 rng(opt.seed + 2);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int instances = opt.quick ? 20 : 100;
        const GridSpec grid = opt.quick ? GridSpec{300, 300} : GridSpec{1000, 1000};
        int ok = 0;
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < instances; ++i)
        {
            SystemConfig sys;
            sys.n_antennas = 8 + static_cast<int>(u(rng) * 57.0);
            const double l1 = 0.3 + 1.2 * u(rng);
            const double l2 = l1 * (0.1 + 0.8 * u(rng));
            sys.total_power_mw = std::pow(10.0, 1.0 + 2.0 * u(rng));
            sys.noise_power_mw = 1.0;
            sys.rate_floor_1 = sys.rate_floor_2 = 4.0 * u(rng);
            const auto pair = EffectivePair::from_moduli(l1, l2, -0.25, 0.4, sys.n_antennas);
            const auto cmp = decoding_order_check(pair, sys, grid);
            const double margin = cmp.case2_best - cmp.case1_best;
            if (std::isinf(cmp.case1_best) && cmp.case1_best < 0)
            {
                ++ok;
                continue;
            }
            worst = std::min(worst, margin);
            if (margin >= -1e-6)
                ++ok;
        }
        CriterionResult r;
        r.passed = ok == instances;
        r.detail = std::to_string(ok) + "/" + std::to_string(instances) + " instances, min (case2 - case1) = " +
                   detail::fmt("%.3e", worst);
        return r;
    });
}

struct BeamPropertyStats
{
    int solutions = 0;
    int equal_modulus_ok = 0;
    int cm_ok_trials = 0;
    long long cm_trials = 0;
    double worst_spread = 0;
    double worst_excess = -1;
    double worst_cm_ratio = 0; // max |diff| / (2/sqrt(N))
};

/// Fixed-phase solutions for random targets: modulus structure and CM-normalization bound.
inline BeamPropertyStats beam_property_stats(const VerifyOptions& opt)
{
    std::mt19937_64 rng(opt.seed + 3);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const int targets = opt.quick ? 5 : 50;
    const int probes = opt.quick ? 100 : 1000;
    const int M = 20;
    BeamPropertyStats st;
    for (int n : {8, 16, 32, 64})
    {
        const double bound = 2.0 / std::sqrt(static_cast<double>(n));
        for (int t = 0; t < targets; ++t)
        {
            const auto target = detail::random_target(n, rng);
            for (int m = 1; m <= M; ++m)
            {
                const auto sol = solve_fixed_phase(target, n, m, M);
                ++st.solutions;
                const auto spread = detail::modulus_spread(sol.weights);
                st.worst_spread = std::max(st.worst_spread, spread.top_spread);
                st.worst_excess = std::max(st.worst_excess, spread.excess);
                if (spread.top_spread <= 1e-5 && spread.excess <= 1e-5)
                    ++st.equal_modulus_ok;

                BeamVector w1{sol.weights, false, false};
                const double nrm = norm2(w1.weights);
                for (auto& x : w1.weights)
                    x /= nrm;
                const auto wcm = cm_normalize(w1);
                ComplexVector b(static_cast<std::size_t>(n));
                for (int k = 0; k < probes; ++k)
                {
                    for (auto& x : b)
                        x = std::polar(1.0, u(rng));
                    const double diff = std::abs(std::abs(inner(b, wcm.weights)) - std::abs(inner(b, w1.weights)));
                    st.worst_cm_ratio = std::max(st.worst_cm_ratio, diff / bound);
                    ++st.cm_trials;
                    if (diff < bound)
                        ++st.cm_ok_trials;
                }
            }
        }
    }
    return st;
}

inline CriterionResult check_equal_modulus(const BeamPropertyStats& st)
{
    CriterionResult r;
    r.id = 3;
    r.name = "equal-modulus structure of fixed-phase optima";
    r.passed = st.solutions > 0 && st.equal_modulus_ok == st.solutions;
    r.detail = std::to_string(st.equal_modulus_ok) + "/" + std::to_string(st.solutions) +
               " solutions, worst top-(N-1) spread " + detail::fmt("%.3e", st.worst_spread) +
               ", worst remaining excess " + detail::fmt("%.3e", st.worst_excess);
    return r;
}

inline CriterionResult check_cm_bound(const BeamPropertyStats& st)
{
    CriterionResult r;
    r.id = 4;
    r.name = "CM normalization bound 2/sqrt(N)";
    r.passed = st.cm_trials > 0 && st.cm_ok_trials == st.cm_trials;
    r.detail = std::to_string(st.cm_ok_trials) + "/" + std::to_string(st.cm_trials) +
               " probes, worst |diff| / bound = " + detail::fmt("%.3e", st.worst_cm_ratio);
    return r;
}

/// (1/2) int |a^H w|^2 = ||w||^2 by trapezoid quadrature on 64N points.
inline CriterionResult check_pattern_integral(const VerifyOptions& opt)
{
    return detail::timed(5, "integral identity (1/2) int |a^H w|^2 = ||w||^2", [&] {
        std::mt19937_64 rng(opt.seed + 5);
        std::normal_distribution<double> g(0.0, 1.0);
        const int samples = opt.quick ? 10 : 100;
        double worst = 0;
        int ok = 0, total = 0;
        for (int n : {8, 16, 32, 64})
            for (int i = 0; i < samples; ++i)
            {
                ComplexVector w(static_cast<std::size_t>(n));
                for (auto& x : w)
                    x = {g(rng), g(rng)};
                const double q = pattern_integral(w, 64 * n);
                const double rel = std::abs(q - squared_norm(w)) / squared_norm(w);
                worst = std::max(worst, rel);
                ++total;
                if (rel <= 1e-4)
                    ++ok;
            }
        CriterionResult r;
        r.passed = ok == total;
        r.detail = std::to_string(ok) + "/" + std::to_string(total) + " vectors, worst relative error " +
                   detail::fmt("%.3e", worst);
        return r;
    });
}

/// Gain errors after CM normalization for c1* = N/2, N = 16..64.
inline CriterionResult check_gain_errors(const VerifyOptions& opt)
{
    return detail::timed(6, "gain error after CM normalization (N = 16..64)", [&] {
        auto cfg = detail::reference_config();
        cfg.c1_target_fraction = 0.5;
        double worst = 0, worst_amp = 0;
        int worst_n = 0;
        bool ok = true;
        const int step = opt.quick ? 8 : 1;
        for (int n = 16; n <= 64; n += step)
        {
            const auto row = beam_gain_errors(cfg, n);
            const double e = std::max({row.err_c1, row.err_c2, row.err_sum});
            if (e > worst)
            {
                worst = e;
                worst_n = n;
            }
            const double amp = std::max(row.amp_diff_1, row.amp_diff_2) / row.cm_bound;
            worst_amp = std::max(worst_amp, amp);
            if (e > 0.15 || amp >= 1.0)
                ok = false;
        }
        CriterionResult r;
        r.passed = ok;
        r.detail = "worst relative gain error " + detail::fmt("%.4f", worst) + " at N=" + std::to_string(worst_n) +
                   " (limit 0.15), worst pre/post amplitude diff / bound " + detail::fmt("%.3f", worst_amp);
        return r;
    });
}

/// Designed sum rate vs upper bound along the rate and power sweeps.
inline CriterionResult check_close_to_bound(const VerifyOptions&)
{
    return detail::timed(7, "designed sum rate >= 90% of bound, R2 = r2", [&] {
        const auto cfg = detail::reference_config();
        const auto pair = reference_pair(cfg);
        double worst_ratio = std::numeric_limits<double>::infinity();
        double worst_r2 = 0;
        int points = 0, ok = 0;
        for (auto axis : {SweepAxis::RateFloor, SweepAxis::PowerRatio})
            for (double v : cfg.sweep_range(axis).values())
            {
                ++points;
                const auto sys = sweep_point_config(cfg, axis, v);
                const auto rep = run_single(pair, sys);
                if (!rep.feasible())
                    continue;
                const double ratio = rep.designed.sum / rep.bound.objective;
                const double r2err = std::abs(rep.designed.r2 - sys.rate_floor_2);
                worst_ratio = std::min(worst_ratio, ratio);
                worst_r2 = std::max(worst_r2, r2err);
                if (ratio >= 0.9 && r2err <= 1e-3)
                    ++ok;
            }
        CriterionResult r;
        r.passed = ok == points;
        r.detail = std::to_string(ok) + "/" + std::to_string(points) + " sweep points, min designed/bound " +
                   detail::fmt("%.4f", worst_ratio) + ", max |R2 - r2| " + detail::fmt("%.2e", worst_r2);
        return r;
    });
}

/// Monte Carlo NOMA vs TDMA and effective vs full-multipath agreement.
inline CriterionResult check_montecarlo(const VerifyOptions& opt)
{
    return detail::timed(8, "Monte Carlo: NOMA > TDMA, theory vs practice within 3%", [&] {
        auto cfg = detail::reference_config();
        cfg.realizations = opt.quick ? 50 : 1000;
        cfg.seed = opt.seed;
        cfg.threads = opt.threads;
        cfg.n_paths = 4;
        cfg.user2_amplitude = 0.3;
        cfg.channel_kind = "all";
        int points = 0, ok = 0;
        double worst_gap = 0, worst_margin = std::numeric_limits<double>::infinity();
        const auto t0 = std::chrono::steady_clock::now();
        for (auto axis : {SweepAxis::RateFloor, SweepAxis::PowerRatio})
            for (const auto& row : run_montecarlo(cfg, axis))
            {
                ++points;
                const double gap = std::abs(row.theory_mean - row.practical_mean) / row.theory_mean;
                const double margin = std::min(row.theory_mean, row.practical_mean) - row.tdma_mean;
                worst_gap = std::max(worst_gap, gap);
                worst_margin = std::min(worst_margin, margin);
                if (row.used > 0 && gap <= 0.03 && margin > 0.0)
                    ++ok;
            }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CriterionResult r;
        r.passed = ok == points && dt < 900.0;
        r.detail = std::to_string(ok) + "/" + std::to_string(points) + " points, worst theory/practice gap " +
                   detail::fmt("%.4f", worst_gap) + ", min NOMA - TDMA " + detail::fmt("%.3f", worst_margin) +
                   " bps/Hz, " + detail::fmt("%.1f", dt) + " s";
        return r;
    });
}

struct TinyNComparison
{
    double rate = 0;
    double pipeline_sum = 0;
    double quantized_sum = 0;
    bool pipeline_ok = false;
    bool quantized_ok = false;
};

/// Pipeline vs exhaustive 16-level CM search at N = 6.
inline std::vector<TinyNComparison> tiny_n_comparisons(const std::vector<double>& rates, int levels = 16)
{
    auto cfg = detail::reference_config();
    cfg.system.n_antennas = 6;
    const auto pair = reference_pair(cfg);
    std::vector<TinyNComparison> out;
    for (double rate : rates)
    {
        TinyNComparison c;
        c.rate = rate;
        const auto sys = sweep_point_config(cfg, SweepAxis::RateFloor, rate);
        const auto rep = run_single(pair, sys);
        c.pipeline_ok = rep.feasible();
        if (c.pipeline_ok)
        {
            c.pipeline_sum = rep.designed.sum;
            const auto q = quantized_beam_search(rep.target, 6, levels);
            const double c1 = pair.a() * q.gain1, c2 = pair.b() * q.gain2;
            if (c1 >= c2)
                if (const auto split = finalize_power(c1, c2, sys))
                {
                    c.quantized_ok = true;
                    c.quantized_sum = split->r1 + split->r2;
                }
        }
        out.push_back(c);
    }
    return out;
}

inline CriterionResult check_tiny_n(const VerifyOptions& opt)
{
    return detail::timed(9, "N=6 quantized search within 5% of pipeline", [&] {
        const auto rows = opt.quick ? tiny_n_comparisons({3.0}, 8) : tiny_n_comparisons({1.0, 2.0, 3.0});
        CriterionResult r;
        r.passed = true;
        double worst = 0;
        for (const auto& c : rows)
        {
            if (!c.pipeline_ok || !c.quantized_ok)
            {
                r.passed = false;
                continue;
            }
            const double rel = std::abs(c.quantized_sum - c.pipeline_sum) / c.pipeline_sum;
            worst = std::max(worst, rel);
            if (rel > 0.05)
                r.passed = false;
        }
        r.detail = std::to_string(rows.size()) + " rate floors, worst relative difference " +
                   detail::fmt("%.4f", worst);
        return r;
    });
}

/// In-process determinism: every CSV writer run twice on the same config.
inline CriterionResult check_determinism_in_process(const VerifyOptions& opt)
{
    return detail::timed(10, "determinism (repeat runs byte-identical)", [&] {
        auto cfg = detail::reference_config();
        cfg.realizations = opt.quick ? 10 : 40;
        cfg.seed = opt.seed;
        auto render = [&](int threads) {
            auto c = cfg;
            c.threads = threads;
            std::ostringstream out;
            write_sweep_csv(c, SweepAxis::RateFloor, out);
            write_sweep_csv(c, SweepAxis::PowerRatio, out);
            write_montecarlo_csv(c, SweepAxis::RateFloor, run_montecarlo(c, SweepAxis::RateFloor), out);
            return out.str();
        };
        const auto a = render(1);
        const auto b = render(1);
        const auto c = render(3);
        CriterionResult r;
        r.passed = a == b && a == c;
        r.detail = std::string("repeat ") + (a == b ? "identical" : "DIFFERENT") + ", 1 vs 3 threads " +
                   (a == c ? "identical" : "DIFFERENT") + " (" + std::to_string(a.size()) + " bytes)";
        return r;
    });
}

inline std::vector<CriterionResult> run_all_checks(const VerifyOptions& opt)
{
    std::vector<CriterionResult> out;
    out.push_back(check_oracle_equivalence(opt));
    out.push_back(check_decoding_order(opt));
    {
        const auto t0 = std::chrono::steady_clock::now();
        BeamPropertyStats st;
        std::string err;
        try
        {
            st = beam_property_stats(opt);
        }
        catch (const std::exception& e)
        {
            err = e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        auto c3 = check_equal_modulus(st);
        auto c4 = check_cm_bound(st);
        for (auto* c : {&c3, &c4})
        {
            c->seconds = dt;
            if (!err.empty())
            {
                c->passed = false;
                c->detail = "exception: " + err;
            }
        }
        out.push_back(c3);
        out.push_back(c4);
    }
    out.push_back(check_pattern_integral(opt));
    out.push_back(check_gain_errors(opt));
    out.push_back(check_close_to_bound(opt));
    out.push_back(check_montecarlo(opt));
    out.push_back(check_tiny_n(opt));
    out.push_back(check_determinism_in_process(opt));
    return out;
}

inline std::string format_result_line(const CriterionResult& r)
{
    char head[32];
    std::snprintf(head, sizeof head, "[%2d] ", r.id);
    return std::string(r.passed ? "PASS " : "FAIL ") + head + r.name + ": " + r.detail + " (" +
           detail::fmt("%.2f", r.seconds) + " s)";
}

} // namespace mmnoma
