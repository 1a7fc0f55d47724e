// SPDX-License-Identifier: Apache-2.0
//
// End-to-end design: allocate -> beam synthesis -> CM normalization -> power
// re-allocation, plus the experiment drivers built on it.
#pragma once

#include "mmnoma/allocation.hpp"
#include "mmnoma/beamformer.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/csv.hpp"
#include "mmnoma/oracle.hpp"
#include "mmnoma/rate.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace mmnoma {

struct PipelineReport
{
    std::string status = "ok"; // ok | infeasible
    std::string stage;         // failing stage when infeasible
    bool swapped = false;
    SystemConfig cfg;          // floors follow the sorted user order

    GainPowerAllocation bound;
    RateReport bound_rates;

    BeamTarget target;
    BeamDesign design;
    BeamVector cm;
    double c1_real = std::nan("");
    double c2_real = std::nan("");

    std::optional<PowerSplit> split;
    RateReport designed;

    bool feasible() const noexcept { return status == "ok"; }
};

inline EffectivePair reference_pair(const ExperimentConfig& cfg)
{
    return EffectivePair::from_moduli(cfg.lambda1_abs, cfg.lambda2_abs, cfg.omega1, cfg.omega2,
                                      cfg.system.n_antennas);
}

inline PipelineReport run_single(const EffectivePair& pair, SystemConfig cfg)
{
    cfg.validate();
    PipelineReport rep;
    rep.swapped = pair.swapped();
    if (rep.swapped)
        std::swap(cfg.rate_floor_1, cfg.rate_floor_2);
    rep.cfg = cfg;

    auto fail = [&](const char* stage) {
        rep.status = "infeasible";
        rep.stage = stage;
        return rep;
    };

    rep.bound = allocate(pair, cfg);
    if (!rep.bound.feasible())
        return fail("allocation");
    rep.bound_rates = rates_case2(rep.bound.c1, rep.bound.c2, rep.bound.p1, rep.bound.p2, cfg.noise_power_mw);

    const double a = pair.a(), b = pair.b();
    const double n = cfg.n_antennas;
    rep.target.b1 = std::clamp(rep.bound.c1 / a, 0.0, n);
    rep.target.b2 = std::clamp(n - rep.target.b1, 0.0, n);
    rep.target.omega1 = pair.user1().direction;
    rep.target.omega2 = pair.user2().direction;

    rep.design = solve_beam(rep.target, cfg);
    rep.cm = cm_normalize(rep.design.unit_norm);

    const auto a1 = steering_vector(cfg.n_antennas, rep.target.omega1);
    const auto a2 = steering_vector(cfg.n_antennas, rep.target.omega2);
    rep.c1_real = a * std::norm(inner(a1, rep.cm.weights));
    rep.c2_real = b * std::norm(inner(a2, rep.cm.weights));
    if (rep.c1_real < rep.c2_real)
        return fail("sic_order");

    rep.split = finalize_power(rep.c1_real, rep.c2_real, cfg);
    if (!rep.split)
        return fail("finalize");
    rep.designed = rates_case2(rep.c1_real, rep.c2_real, rep.split->p1, rep.split->p2, cfg.noise_power_mw);
    return rep;
}

inline nlohmann::json to_json(const PipelineReport& rep)
{
    using nlohmann::json;
    json j;
    j["status"] = rep.status;
    if (!rep.stage.empty())
        j["stage"] = rep.stage;
    j["users_swapped"] = rep.swapped;
    j["config"] = {{"n_antennas", rep.cfg.n_antennas},   {"power_mw", rep.cfg.total_power_mw},
                   {"noise_mw", rep.cfg.noise_power_mw}, {"rate1_bps_hz", rep.cfg.rate_floor_1},
                   {"rate2_bps_hz", rep.cfg.rate_floor_2}, {"phase_sweep", rep.cfg.phase_sweep}};
    if (rep.bound.feasible())
    {
        j["upper_bound"] = {{"c1", rep.bound.c1},
                            {"c2", rep.bound.c2},
                            {"p1", rep.bound.p1},
                            {"p2", rep.bound.p2},
                            {"r1", rep.bound_rates.r1},
                            {"r2", rep.bound_rates.r2},
                            {"sum", rep.bound.objective},
                            {"case_tag", to_string(rep.bound.case_tag)},
                            {"repaired", rep.bound.repaired},
                            {"singular", rep.bound.singular}};
    }
    if (!rep.design.unit_norm.weights.empty())
    {
        j["beam"] = {{"b1", rep.target.b1},
                     {"b2", rep.target.b2},
                     {"selected_m", rep.design.selected_m},
                     {"objective", rep.design.objective},
                     {"overlapping_beams", rep.design.overlapping_beams},
                     {"achieved_over_target_1", rep.design.achieved_over_target_1},
                     {"achieved_over_target_2", rep.design.achieved_over_target_2},
                     {"zero_element_warning", rep.cm.zero_element_warning},
                     {"c1_real", rep.c1_real},
                     {"c2_real", rep.c2_real}};
    }
    if (rep.split)
    {
        j["designed"] = {{"p1", rep.split->p1},      {"p2", rep.split->p2},   {"r1", rep.designed.r1},
                         {"r2", rep.designed.r2},    {"sum", rep.designed.sum}, {"sic_valid", rep.designed.sic_valid}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Sweeps

inline SystemConfig sweep_point_config(const ExperimentConfig& cfg, SweepAxis axis, double value)
{
    SystemConfig sys = cfg.system;
    if (axis == SweepAxis::RateFloor)
    {
        sys.rate_floor_1 = value;
        sys.rate_floor_2 = value;
    }
    else
        sys.total_power_mw = sys.noise_power_mw * std::pow(10.0, value / 10.0);
    return sys;
}

inline void write_sweep_csv(const ExperimentConfig& cfg, SweepAxis axis, std::ostream& out)
{
    cfg.validate();
    CsvWriter csv(out);
    csv.meta("sweep", to_string(axis));
    csv.meta("sweep_unit", axis == SweepAxis::RateFloor ? "bps/Hz (r1 = r2)" : "dB (P / sigma^2)");
    csv.meta("lambda", format_double(cfg.lambda1_abs) + "," + format_double(cfg.lambda2_abs));
    csv.meta("omega", format_double(cfg.omega1) + "," + format_double(cfg.omega2));
    csv.meta("n_antennas", std::to_string(cfg.system.n_antennas));
    csv.meta("phase_sweep", std::to_string(cfg.system.phase_sweep));
    csv.header({"sweep_value", "bound_r1", "bound_r2", "bound_sum", "designed_r1", "designed_r2", "designed_sum",
                "c1_ideal", "c2_ideal", "c1_real", "c2_real", "p1", "p2", "status"});

    const auto pair = reference_pair(cfg);
    const double nan = std::nan("");
    for (double v : cfg.sweep_range(axis).values())
    {
        PipelineReport rep;
        std::string status;
        try
        {
            rep = run_single(pair, sweep_point_config(cfg, axis, v));
            status = rep.feasible() ? "ok" : "infeasible:" + rep.stage;
        }
        catch (const std::exception& e)
        {
            status = "error";
        }
        const bool has_bound = rep.bound.feasible();
        const bool ok = rep.feasible() && status == "ok";
        csv.row({format_double(v),
                 format_double(has_bound ? rep.bound_rates.r1 : nan),
                 format_double(has_bound ? rep.bound_rates.r2 : nan),
                 format_double(has_bound ? rep.bound.objective : nan),
                 format_double(ok ? rep.designed.r1 : nan),
                 format_double(ok ? rep.designed.r2 : nan),
                 format_double(ok ? rep.designed.sum : nan),
                 format_double(has_bound ? rep.bound.c1 : nan),
                 format_double(has_bound ? rep.bound.c2 : nan),
                 format_double(rep.c1_real),
                 format_double(rep.c2_real),
                 format_double(ok ? rep.split->p1 : nan),
                 format_double(ok ? rep.split->p2 : nan),
                 status});
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McSeries
{
    ChannelKind kind = ChannelKind::Los;
    double nlos_power_db = std::nan(""); // LOS only
    std::string name;
};

inline std::vector<McSeries> montecarlo_series(const ExperimentConfig& cfg)
{
    std::vector<McSeries> out;
    if (cfg.channel_kind != "nlos")
        for (double db : cfg.nlos_power_db)
            out.push_back({ChannelKind::Los, db, "los_" + format_double(db) + "db"});
    if (cfg.channel_kind != "los")
        out.push_back({ChannelKind::Nlos, std::nan(""), "nlos"});
    return out;
}

struct McOutcome
{
    enum class Kind : unsigned char
    {
        Used,
        Overlap,
        Infeasible
    } kind = Kind::Infeasible;
    double theory = 0;
    double practical = 0;
    double tdma = 0;
};

struct ChannelDraw
{
    Channel user1;
    Channel user2;
};

/// Channel pair for one realization. The seed depends on (master, series,
/// index) only, so every sweep point sees the same draws.
inline ChannelDraw draw_channel_pair(const ExperimentConfig& cfg, const McSeries& series, std::size_t series_index,
                                     std::size_t realization)
{
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(series_index), static_cast<std::uint32_t>(realization)};
    std::mt19937_64 rng(seq);
    const double nlos_power = std::isnan(series.nlos_power_db) ? 1.0 : std::pow(10.0, series.nlos_power_db / 10.0);
    const int n = cfg.system.n_antennas;
    auto ch1 = sample_channel(n, series.kind, cfg.n_paths, nlos_power, rng, cfg.nlos_scaling());
    auto ch2 = sample_channel(n, series.kind, cfg.n_paths, nlos_power, rng, cfg.nlos_scaling());
    std::vector<PathComponent> scaled = ch2.paths();
    for (auto& p : scaled)
        p.gain *= cfg.user2_amplitude;
    return {std::move(ch1), Channel(n, std::move(scaled))};
}

inline McOutcome evaluate_realization(const ChannelDraw& draw, const SystemConfig& sys)
{
    McOutcome out;
    const EffectivePair pair(effective_channel(draw.user1), effective_channel(draw.user2));
    if (direction_distance(pair.user1().direction, pair.user2().direction) < 2.0 / sys.n_antennas)
    {
        out.kind = McOutcome::Kind::Overlap;
        return out;
    }
    const auto rep = run_single(pair, sys);
    if (!rep.feasible())
        return out;

    const Channel& full1 = pair.swapped() ? draw.user2 : draw.user1;
    const Channel& full2 = pair.swapped() ? draw.user1 : draw.user2;
    const double h1 = beam_gain(channel_vector(full1), rep.cm.weights);
    const double h2 = beam_gain(channel_vector(full2), rep.cm.weights);

    out.kind = McOutcome::Kind::Used;
    out.theory = rep.designed.sum;
    out.practical = rates_case2(h1, h2, rep.split->p1, rep.split->p2, sys.noise_power_mw).sum;
    out.tdma = tdma_sum_rate(pair.user1().gain, pair.user2().gain, sys);
    return out;
}

struct McPointSummary
{
    std::string series;
    std::string channel_kind;
    double nlos_power_db = 0;
    double sweep_value = 0;
    int realizations = 0;
    int used = 0;
    int excluded_overlap = 0;
    int excluded_infeasible = 0;
    double theory_mean = 0, theory_se = 0;
    double practical_mean = 0, practical_se = 0;
    double tdma_mean = 0, tdma_se = 0;
};

namespace detail {

struct RunningStat
{
    double sum = 0, sumsq = 0;
    int n = 0;
    void add(double x)
    {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    double mean() const { return n ? sum / n : std::nan(""); }
    double se() const
    {
        if (n < 2)
            return std::nan("");
        const double m = mean();
        const double var = std::max(0.0, (sumsq - n * m * m) / (n - 1));
        return std::sqrt(var / n);
    }
};

// Run fn(i) for i in [0, count) on `threads` workers; results land in slot i.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t count, int threads, Fn fn)
{
    std::vector<Result> out(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load())
                return;
            try
            {
                out[i] = fn(i);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    error = std::current_exception();
                return;
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (nthreads == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

} // namespace detail

inline std::vector<McPointSummary> run_montecarlo(const ExperimentConfig& cfg, SweepAxis axis)
{
    cfg.validate();
    const auto points = cfg.sweep_range(axis).values();
    const auto series = montecarlo_series(cfg);
    std::vector<McPointSummary> out;

    for (std::size_t si = 0; si < series.size(); ++si)
    {
        const auto& ser = series[si];
        const auto per_draw = detail::parallel_map<std::vector<McOutcome>>(
            static_cast<std::size_t>(cfg.realizations), cfg.threads, [&](std::size_t i) {
                const auto draw = draw_channel_pair(cfg, ser, si, i);
                std::vector<McOutcome> res;
                res.reserve(points.size());
                for (double v : points)
                    res.push_back(evaluate_realization(draw, sweep_point_config(cfg, axis, v)));
                return res;
            });

        for (std::size_t pi = 0; pi < points.size(); ++pi)
        {
            McPointSummary s;
            s.series = ser.name;
            s.channel_kind = to_string(ser.kind);
            s.nlos_power_db = ser.nlos_power_db;
            s.sweep_value = points[pi];
            s.realizations = cfg.realizations;
            detail::RunningStat th, pr, td;
            for (const auto& draw : per_draw)
            {
                const auto& o = draw[pi];
                if (o.kind == McOutcome::Kind::Overlap)
                    ++s.excluded_overlap;
                else if (o.kind == McOutcome::Kind::Infeasible)
                    ++s.excluded_infeasible;
                else
                {
                    th.add(o.theory);
                    pr.add(o.practical);
                    td.add(o.tdma);
                }
            }
            s.used = th.n;
            s.theory_mean = th.mean();
            s.theory_se = th.se();
            s.practical_mean = pr.mean();
            s.practical_se = pr.se();
            s.tdma_mean = td.mean();
            s.tdma_se = td.se();
            out.push_back(s);
        }
    }
    return out;
}

inline void write_montecarlo_csv(const ExperimentConfig& cfg, SweepAxis axis,
                                 const std::vector<McPointSummary>& rows, std::ostream& out)
{
    CsvWriter csv(out);
    csv.meta("sweep", to_string(axis));
    csv.meta("seed", std::to_string(cfg.seed));
    csv.meta("realizations", std::to_string(cfg.realizations));
    csv.meta("n_antennas", std::to_string(cfg.system.n_antennas));
    csv.meta("n_paths", std::to_string(cfg.n_paths));
    csv.meta("user2_amplitude", format_double(cfg.user2_amplitude));
    csv.meta("aod_distribution", "uniform[-1,1]");
    csv.meta("nlos_path_power", cfg.nlos_normalized ? "1/L" : "1/sqrt(L)");
    csv.meta("tdma", "half time per user, full power per slot, beam gain N/2");
    csv.header({"series", "channel_kind", "nlos_power_db", "sweep_value", "realizations", "used",
                "excluded_overlap", "excluded_infeasible", "theory_mean", "theory_se", "practical_mean",
                "practical_se", "tdma_mean", "tdma_se"});
    for (const auto& r : rows)
        csv.row({r.series, r.channel_kind, format_double(r.nlos_power_db), format_double(r.sweep_value),
                 std::to_string(r.realizations), std::to_string(r.used), std::to_string(r.excluded_overlap),
                 std::to_string(r.excluded_infeasible), format_double(r.theory_mean), format_double(r.theory_se),
                 format_double(r.practical_mean), format_double(r.practical_se), format_double(r.tdma_mean),
                 format_double(r.tdma_se)});
}

// ---------------------------------------------------------------------------
// Beam patterns and gain errors

struct GainErrorRow
{
    int n = 0;
    int selected_m = 0;
    double c1_target = 0, c2_target = 0;
    double c1_pre = 0, c2_pre = 0;   // unit-norm relaxed beam
    double c1_post = 0, c2_post = 0; // after CM normalization
    double err_c1 = 0, err_c2 = 0, err_sum = 0;
    double amp_diff_1 = 0, amp_diff_2 = 0; // | |a_i^H w*| - |a_i^H w1| |
    double cm_bound = 0;             // 2 / sqrt(N)
    double integral_pre = 0, integral_post = 0;
    BeamTarget target;
    BeamDesign design;
    BeamVector cm;
};

/// Beam for c1* = c1_target_fraction * N and c2* from the gain budget.
inline GainErrorRow beam_gain_errors(const ExperimentConfig& cfg, int n)
{
    const double a = cfg.lambda1_abs * cfg.lambda1_abs;
    const double b = cfg.lambda2_abs * cfg.lambda2_abs;
    SystemConfig sys = cfg.system;
    sys.n_antennas = n;

    GainErrorRow r;
    r.n = n;
    r.c1_target = cfg.c1_target_fraction * n;
    r.target.b1 = r.c1_target / a;
    if (r.target.b1 > n)
        throw std::invalid_argument("beam_gain_errors: c1 target exceeds N |lambda1|^2");
    r.target.b2 = n - r.target.b1;
    r.c2_target = r.target.b2 * b;
    r.target.omega1 = cfg.omega1;
    r.target.omega2 = cfg.omega2;

    r.design = solve_beam(r.target, sys);
    r.selected_m = r.design.selected_m;
    r.cm = cm_normalize(r.design.unit_norm);

    const auto a1 = steering_vector(n, cfg.omega1);
    const auto a2 = steering_vector(n, cfg.omega2);
    const double pre1 = std::abs(inner(a1, r.design.unit_norm.weights));
    const double pre2 = std::abs(inner(a2, r.design.unit_norm.weights));
    const double post1 = std::abs(inner(a1, r.cm.weights));
    const double post2 = std::abs(inner(a2, r.cm.weights));
    r.c1_pre = a * pre1 * pre1;
    r.c2_pre = b * pre2 * pre2;
    r.c1_post = a * post1 * post1;
    r.c2_post = b * post2 * post2;
    r.err_c1 = std::abs(r.c1_post - r.c1_target) / r.c1_target;
    r.err_c2 = std::abs(r.c2_post - r.c2_target) / r.c2_target;
    r.err_sum = std::abs(r.c1_post + r.c2_post - r.c1_target - r.c2_target) / (r.c1_target + r.c2_target);
    r.amp_diff_1 = std::abs(post1 - pre1);
    r.amp_diff_2 = std::abs(post2 - pre2);
    r.cm_bound = 2.0 / std::sqrt(static_cast<double>(n));
    const int quad = std::max(64 * n, cfg.pattern_points);
    r.integral_pre = pattern_integral(r.design.unit_norm, quad);
    r.integral_post = pattern_integral(r.cm, quad);
    return r;
}

namespace detail {

inline void write_pattern(const std::filesystem::path& path, const std::vector<double>& grid,
                          const std::vector<double>& gain)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    CsvWriter csv(f);
    csv.header({"omega", "gain"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.row({format_double(grid[i]), format_double(gain[i])});
}

inline void write_weights(const std::filesystem::path& path, const ComplexVector& w)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    CsvWriter csv(f);
    csv.header({"k", "re", "im", "modulus"});
    for (std::size_t k = 0; k < w.size(); ++k)
        csv.row({std::to_string(k), format_double(w[k].real()), format_double(w[k].imag()),
                 format_double(std::abs(w[k]))});
}

} // namespace detail

/// Writes per-N pattern and weight files plus gains.csv into `dir`.
inline std::vector<GainErrorRow> write_beampatterns(const ExperimentConfig& cfg, const std::filesystem::path& dir)
{
    cfg.validate();
    std::filesystem::create_directories(dir);
    const auto grid = uniform_grid(cfg.pattern_points);
    std::vector<GainErrorRow> rows;
    for (int n : cfg.n_list)
    {
        auto r = beam_gain_errors(cfg, n);
        const std::string tag = "N" + std::to_string(n);
        detail::write_pattern(dir / ("pattern_ideal_" + tag + ".csv"), grid, ideal_pattern(r.target, n, grid));
        detail::write_pattern(dir / ("pattern_precm_" + tag + ".csv"), grid, beam_pattern(r.design.unit_norm, grid));
        detail::write_pattern(dir / ("pattern_postcm_" + tag + ".csv"), grid, beam_pattern(r.cm, grid));
        detail::write_weights(dir / ("weights_precm_" + tag + ".csv"), r.design.unit_norm.weights);
        detail::write_weights(dir / ("weights_postcm_" + tag + ".csv"), r.cm.weights);
        rows.push_back(std::move(r));
    }

    std::ofstream f(dir / "gains.csv");
    if (!f)
        throw std::runtime_error("cannot write gains.csv");
    CsvWriter csv(f);
    csv.meta("c1_target_fraction", format_double(cfg.c1_target_fraction));
    csv.header({"n", "selected_m", "c1_target", "c2_target", "c1_pre", "c2_pre", "c1_post", "c2_post", "err_c1",
                "err_c2", "err_sum", "amp_diff_1", "amp_diff_2", "cm_bound", "integral_pre", "integral_post"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.n), std::to_string(r.selected_m), format_double(r.c1_target),
                 format_double(r.c2_target), format_double(r.c1_pre), format_double(r.c2_pre),
                 format_double(r.c1_post), format_double(r.c2_post), format_double(r.err_c1),
                 format_double(r.err_c2), format_double(r.err_sum), format_double(r.amp_diff_1),
                 format_double(r.amp_diff_2), format_double(r.cm_bound), format_double(r.integral_pre),
                 format_double(r.integral_post)});
    return rows;
}

} // namespace mmnoma
