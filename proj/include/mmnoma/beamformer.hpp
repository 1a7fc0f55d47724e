// SPDX-License-Identifier: Apache-2.0
//
// Two-lobe analog beam synthesis.
//
// For each phase offset m/M the fixed-phase problem is
//
//     minimize   max_i |w_i|^2
//     subject to Re(g1^H w) >= sqrt(b1),  Re(g2^H w) >= sqrt(b2)
//
// with g1 = a(N, Omega1) and g2 = a(N, Omega2) * exp(-j 2 pi m / M). Writing
// t = max_i |w_i|, the Lagrange dual is one-dimensional:
//
//     t* = max_{tau in [0,1]} ((1-tau) s1 + tau s2) / ||(1-tau) g1 + tau g2||_1
//
// and a primal optimum is w_i = t* v_i / |v_i| with v the dual-optimal
// combination. The ratio is quasi-concave in tau, and the sign of its slope
// is cheap to evaluate, so bisection locates the peak.
#pragma once

#include "mmnoma/channel.hpp"
#include "mmnoma/linalg.hpp"
#include "mmnoma/rate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmnoma {

struct BeamTarget
{
    double b1 = 0;
    double b2 = 0;
    double omega1 = 0;
    double omega2 = 0;

    void validate(int n) const
    {
        if (!(b1 >= 0.0) || !(b2 >= 0.0))
            throw std::invalid_argument("BeamTarget: gains must be non-negative");
        if (b1 + b2 > n + 1e-6)
            throw std::invalid_argument("BeamTarget: b1 + b2 exceeds the array budget N");
        if (!(omega1 >= -1.0 && omega1 <= 1.0 && omega2 >= -1.0 && omega2 <= 1.0))
            throw std::invalid_argument("BeamTarget: directions must lie in [-1, 1]");
    }
};

struct BeamVector
{
    ComplexVector weights;
    bool is_cm = false;
    bool zero_element_warning = false;

    int size() const noexcept { return static_cast<int>(weights.size()); }
};

struct FixedPhaseSolution
{
    ComplexVector weights;
    double objective = 0;  // max_i |w_i|^2
    double dual_bound = 0; // certified lower bound on the optimum
    double gap = 0;        // objective - dual_bound
    int m = 0;
    double residual1 = 0;  // Re(g1^H w) - sqrt(b1)
    double residual2 = 0;  // Re(g2^H w) - sqrt(b2)
};

class SolverError : public std::runtime_error
{
public:
    SolverError(const std::string& what, FixedPhaseSolution best) : std::runtime_error(what), best_(std::move(best)) {}
    const FixedPhaseSolution& best_iterate() const noexcept { return best_; }

private:
    FixedPhaseSolution best_;
};

namespace detail {

struct FixedPhaseProblem
{
    ComplexVector g1, g2;
    double s1 = 0, s2 = 0;
};

inline FixedPhaseProblem make_fixed_phase_problem(const BeamTarget& target, int n, int m, int M)
{
    if (M < 1 || m < 1 || m > M)
        throw std::invalid_argument("solve_fixed_phase: need 1 <= m <= M");
    target.validate(n);
    FixedPhaseProblem pr;
    pr.g1 = steering_vector(n, target.omega1);
    pr.g2 = steering_vector(n, target.omega2);
    const auto rot = std::polar(1.0, -2.0 * std::numbers::pi * m / M);
    for (auto& v : pr.g2)
        v *= rot;
    pr.s1 = std::sqrt(target.b1);
    pr.s2 = std::sqrt(target.b2);
    return pr;
}

inline void fill_residuals(FixedPhaseSolution& sol, const FixedPhaseProblem& pr)
{
    sol.residual1 = inner(pr.g1, sol.weights).real() - pr.s1;
    sol.residual2 = inner(pr.g2, sol.weights).real() - pr.s2;
}

} // namespace detail

/// Exact solve of one fixed-phase problem via its scalar dual.
/// `tol` bounds the relative duality gap (objective - dual) / objective.
inline FixedPhaseSolution solve_fixed_phase(const BeamTarget& target, int n, int m, int M, double tol = 1e-10)
{
    const auto pr = detail::make_fixed_phase_problem(target, n, m, M);
    const std::size_t un = static_cast<std::size_t>(n);

    FixedPhaseSolution sol;
    sol.m = m;
    sol.weights.assign(un, {});
    if (pr.s1 == 0.0 && pr.s2 == 0.0)
        return sol;

    auto combo = [&](double tau) {
        ComplexVector v(un);
        for (std::size_t i = 0; i < un; ++i)
            v[i] = (1.0 - tau) * pr.g1[i] + tau * pr.g2[i];
        return v;
    };
    auto phi = [&](double tau) {
        double l1 = 0;
        for (std::size_t i = 0; i < un; ++i)
            l1 += std::abs((1.0 - tau) * pr.g1[i] + tau * pr.g2[i]);
        const double num = (1.0 - tau) * pr.s1 + tau * pr.s2;
        return l1 > 0.0 ? num / l1 : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    };

    // Primal candidate for a given multiplier split: w_i = t v_i / |v_i|,
    // then scaled until both constraints hold.
    auto primal = [&](double tau) {
        const double t_star = phi(tau);
        const auto v = combo(tau);
        const double vmax = max_modulus(v);
        ComplexVector w(un);
        std::vector<std::size_t> null_idx;
        for (std::size_t i = 0; i < un; ++i)
        {
            const double mod = std::abs(v[i]);
            if (mod > 1e-9 * vmax)
                w[i] = t_star * v[i] / mod;
            else
                null_idx.push_back(i);
        }
        // Elements with g1_i = -g2_i move the two constraints in opposite
        // directions; w_i = g1_i * x settles whichever deficit remains.
        if (!null_idx.empty())
        {
            const double e1 = pr.s1 - inner(pr.g1, w).real();
            const double e2 = pr.s2 - inner(pr.g2, w).real();
            const double cap = t_star * static_cast<double>(null_idx.size());
            const double total = std::clamp(std::clamp(0.0, e1, std::max(e1, -e2)), -cap, cap);
            const double x = total / static_cast<double>(null_idx.size());
            for (auto i : null_idx)
                w[i] = pr.g1[i] * x;
        }
        double scale = 0.0;
        const double d1 = inner(pr.g1, w).real();
        const double d2 = inner(pr.g2, w).real();
        if (pr.s1 > 0.0)
            scale = std::max(scale, d1 > 0.0 ? pr.s1 / d1 : std::numeric_limits<double>::infinity());
        if (pr.s2 > 0.0)
            scale = std::max(scale, d2 > 0.0 ? pr.s2 / d2 : std::numeric_limits<double>::infinity());
        for (auto& x : w)
            x *= scale;
        return w;
    };

    // The dual ratio increases while s2 Re(g1^H u) > s1 Re(g2^H u), u = v/|v|.
    auto slope_sign = [&](double tau) {
        const auto v = combo(tau);
        double d1 = 0, d2 = 0;
        for (std::size_t i = 0; i < un; ++i)
        {
            const double mod = std::abs(v[i]);
            if (mod == 0.0)
                continue;
            const auto u = v[i] / mod;
            d1 += (std::conj(pr.g1[i]) * u).real();
            d2 += (std::conj(pr.g2[i]) * u).real();
        }
        return pr.s2 * d1 - pr.s1 * d2;
    };

    std::vector<double> candidates;
    if (pr.s2 == 0.0)
        candidates = {0.0};
    else if (pr.s1 == 0.0)
        candidates = {1.0};
    else
    {
        double lo = 0.0, hi = 1.0;
        if (slope_sign(0.0) <= 0.0)
            hi = 0.0;
        else if (slope_sign(1.0) >= 0.0)
            lo = 1.0;
        else
            for (int it = 0; it < 200 && hi - lo > 0.0; ++it)
            {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi)
                    break;
                (slope_sign(mid) > 0.0 ? lo : hi) = mid;
            }
        candidates = {lo, hi, 0.5};
    }

    double best_obj = std::numeric_limits<double>::infinity();
    double dual = 0.0;
    for (double tau : candidates)
    {
        dual = std::max(dual, phi(tau));
        auto w = primal(tau);
        const double tmax = max_modulus(w);
        if (tmax * tmax < best_obj)
        {
            best_obj = tmax * tmax;
            sol.weights = std::move(w);
        }
    }

    sol.objective = best_obj;
    sol.dual_bound = dual * dual;
    sol.gap = sol.objective - sol.dual_bound;
    detail::fill_residuals(sol, pr);

    if (!std::isfinite(sol.objective) || sol.gap > tol * std::max(sol.objective, 1e-300))
        throw SolverError("solve_fixed_phase: duality gap above tolerance", sol);
    return sol;
}

/// Same problem by bisection on the modulus bound with alternating
/// projections onto the element discs and the two halfspaces. Slower and less
/// accurate than the dual solver; kept as an independent check.
inline FixedPhaseSolution solve_fixed_phase_projection(const BeamTarget& target, int n, int m, int M,
                                                       double residual_tol = 1e-8, double width_tol = 1e-10,
                                                       int max_cycles = 100000)
{
    const auto pr = detail::make_fixed_phase_problem(target, n, m, M);
    const std::size_t un = static_cast<std::size_t>(n);
    const double gg1 = static_cast<double>(n), gg2 = static_cast<double>(n);

    FixedPhaseSolution sol;
    sol.m = m;
    sol.weights.assign(un, {});
    if (pr.s1 == 0.0 && pr.s2 == 0.0)
        return sol;

    auto project_half = [](ComplexVector& w, const ComplexVector& g, double s, double gnorm2) {
        const double d = inner(g, w).real();
        if (d < s)
        {
            const double step = (s - d) / gnorm2;
            for (std::size_t i = 0; i < w.size(); ++i)
                w[i] += step * g[i];
        }
    };

    ComplexVector warm(un);
    auto feasible = [&](double alpha, ComplexVector& w) {
        const double r = std::sqrt(alpha);
        w = warm;
        for (int c = 0; c < max_cycles; ++c)
        {
            if (pr.s1 > 0.0)
                project_half(w, pr.g1, pr.s1, gg1);
            if (pr.s2 > 0.0)
                project_half(w, pr.g2, pr.s2, gg2);
            for (auto& x : w)
                if (std::abs(x) > r)
                    x *= r / std::abs(x);
            const double res1 = pr.s1 > 0.0 ? std::max(0.0, pr.s1 - inner(pr.g1, w).real()) : 0.0;
            const double res2 = pr.s2 > 0.0 ? std::max(0.0, pr.s2 - inner(pr.g2, w).real()) : 0.0;
            if (res1 < residual_tol && res2 < residual_tol)
                return true;
        }
        return false;
    };

    double lo = 0.0;
    double hi = std::max(target.b1, target.b2) / n * 4.0;
    ComplexVector w;
    while (!feasible(hi, w))
    {
        lo = hi;
        hi *= 2.0;
        if (hi > 4.0 * n)
            throw SolverError("solve_fixed_phase_projection: no feasible bracket", sol);
    }
    sol.weights = w;
    warm = w;
    while (hi - lo > width_tol * std::max(1.0, hi))
    {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid, w))
        {
            hi = mid;
            sol.weights = w;
            warm = w;
        }
        else
            lo = mid;
    }
    const double tmax = max_modulus(sol.weights);
    sol.objective = tmax * tmax;
    sol.dual_bound = lo;
    sol.gap = sol.objective - lo;
    detail::fill_residuals(sol, pr);
    return sol;
}

struct BeamDesign
{
    BeamVector unit_norm;                    // w1 = w0 / ||w0||
    ComplexVector raw;                       // w0, the selected fixed-phase optimum
    int selected_m = 0;
    double objective = 0;
    std::vector<double> objectives_per_m;
    bool overlapping_beams = false;
    double achieved_over_target_1 = 0;       // |a1^H w0|^2 / b1 (1 when b1 = 0)
    double achieved_over_target_2 = 0;
};

/// Phase sweep over m = 1..M; the smallest objective wins, lowest m on ties.
inline BeamDesign solve_beam(const BeamTarget& target, const SystemConfig& cfg, double tol = 1e-10)
{
    const int n = cfg.n_antennas;
    const int M = cfg.phase_sweep;
    if (M < 1)
        throw std::invalid_argument("solve_beam: phase_sweep must be at least 1");

    BeamDesign out;
    out.objectives_per_m.assign(static_cast<std::size_t>(M), std::numeric_limits<double>::quiet_NaN());
    FixedPhaseSolution best;
    bool have = false;
    std::string last_error;
    for (int m = 1; m <= M; ++m)
    {
        try
        {
            auto sol = solve_fixed_phase(target, n, m, M, tol);
            out.objectives_per_m[static_cast<std::size_t>(m - 1)] = sol.objective;
            if (!have || sol.objective < best.objective * (1.0 - 1e-12))
            {
                best = std::move(sol);
                have = true;
            }
        }
        catch (const SolverError& e)
        {
            last_error = e.what();
        }
    }
    if (!have)
        throw std::runtime_error("solve_beam: every fixed-phase solve failed: " + last_error);
    if (target.b1 == 0.0 && target.b2 == 0.0)
        throw std::invalid_argument("solve_beam: both targets are zero, no beam to normalize");

    out.raw = best.weights;
    out.selected_m = best.m;
    out.objective = best.objective;
    out.overlapping_beams = direction_distance(target.omega1, target.omega2) < 2.0 / n;

    const double nrm = norm2(out.raw);
    out.unit_norm.weights = out.raw;
    for (auto& w : out.unit_norm.weights)
        w /= nrm;

    const auto a1 = steering_vector(n, target.omega1);
    const auto a2 = steering_vector(n, target.omega2);
    out.achieved_over_target_1 = target.b1 > 0.0 ? std::norm(inner(a1, out.raw)) / target.b1 : 1.0;
    out.achieved_over_target_2 = target.b2 > 0.0 ? std::norm(inner(a2, out.raw)) / target.b2 : 1.0;
    return out;
}

/// Project each element onto the circle of radius 1/sqrt(N), keeping its phase.
/// A zero element has no phase; it becomes 1/sqrt(N) and the warning flag is set.
inline BeamVector cm_normalize(const BeamVector& w)
{
    const std::size_t n = w.weights.size();
    if (n == 0)
        throw std::invalid_argument("cm_normalize: empty beam vector");
    const double r = 1.0 / std::sqrt(static_cast<double>(n));
    BeamVector out;
    out.weights.resize(n);
    out.is_cm = true;
    for (std::size_t k = 0; k < n; ++k)
    {
        const double mod = std::abs(w.weights[k]);
        if (mod == 0.0)
        {
            out.weights[k] = r;
            out.zero_element_warning = true;
        }
        else
            out.weights[k] = w.weights[k] * (r / mod);
    }
    return out;
}

/// |a(N, Omega)^H w|^2 at each grid point.
inline std::vector<double> beam_pattern(const ComplexVector& w, const std::vector<double>& grid)
{
    const int n = static_cast<int>(w.size());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double omega : grid)
    {
        if (!(omega >= -1.0 && omega <= 1.0))
            throw std::invalid_argument("beam_pattern: grid value outside [-1, 1]");
        out.push_back(std::norm(inner(steering_vector(n, omega), w)));
    }
    return out;
}

inline std::vector<double> beam_pattern(const BeamVector& w, const std::vector<double>& grid)
{
    return beam_pattern(w.weights, grid);
}

/// Rectangular two-lobe reference: height b_i over a width-2/N window centred on Omega_i.
inline std::vector<double> ideal_pattern(const BeamTarget& target, int n, const std::vector<double>& grid)
{
    const double half = 1.0 / n;
    std::vector<double> out;
    out.reserve(grid.size());
    for (double omega : grid)
    {
        double g = 0.0;
        if (direction_distance(omega, target.omega1) <= half)
            g += target.b1;
        if (direction_distance(omega, target.omega2) <= half)
            g += target.b2;
        out.push_back(g);
    }
    return out;
}

inline std::vector<double> uniform_grid(int points, double lo = -1.0, double hi = 1.0)
{
    if (points < 2)
        throw std::invalid_argument("uniform_grid: need at least two points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    g.back() = hi;
    return g;
}

} // namespace mmnoma
