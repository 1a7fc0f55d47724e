// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a flat `key = value` text format, one setting per
// line, `#` starts a comment. Units are part of the key names.
#pragma once

#include "mmnoma/channel.hpp"
#include "mmnoma/rate.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmnoma {

enum class SweepAxis
{
    RateFloor, // r1 = r2 = value, bps/Hz
    PowerRatio // P / sigma^2 = value, dB
};

inline std::string to_string(SweepAxis axis)
{
    return axis == SweepAxis::RateFloor ? "rate" : "power";
}

struct SweepRange
{
    double start = 0;
    double stop = 0;
    double step = 1;

    std::vector<double> values() const
    {
        if (!(step > 0.0))
            throw std::invalid_argument("SweepRange: step must be positive");
        std::vector<double> out;
        if (stop < start)
            return out;
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long long i = 0; i < count; ++i)
            out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
};

struct ExperimentConfig
{
    SystemConfig system{32, 100.0, 1.0, 3.0, 3.0, 20};

    double lambda1_abs = 0.8;
    double lambda2_abs = 0.5;
    double omega1 = -0.25;
    double omega2 = 0.4;

    SweepAxis sweep = SweepAxis::RateFloor;
    std::optional<double> sweep_start;
    std::optional<double> sweep_stop;
    std::optional<double> sweep_step;

    // Monte Carlo
    std::string channel_kind = "all"; // all | los | nlos
    std::vector<double> nlos_power_db{-10.0, -15.0};
    int n_paths = 4;
    double user2_amplitude = 0.3;
    int realizations = 1000;
    std::uint64_t seed = 20240601;
    int threads = 1;
    bool nlos_normalized = false;

    // Beam patterns
    std::vector<int> n_list{16, 32, 64};
    int pattern_points = 2048;
    double c1_target_fraction = 0.5;

    SweepRange sweep_range(SweepAxis axis) const
    {
        SweepRange r = axis == SweepAxis::RateFloor ? SweepRange{0.5, 4.5, 0.5} : SweepRange{10.0, 30.0, 2.0};
        if (sweep_start)
            r.start = *sweep_start;
        if (sweep_stop)
            r.stop = *sweep_stop;
        if (sweep_step)
            r.step = *sweep_step;
        return r;
    }

    NlosScaling nlos_scaling() const { return nlos_normalized ? NlosScaling::InvL : NlosScaling::InvSqrtL; }

    void validate() const
    {
        system.validate();
        if (!(lambda1_abs > 0.0) || !(lambda2_abs > 0.0))
            throw std::invalid_argument("config: lambda moduli must be positive");
        if (!(omega1 >= -1.0 && omega1 <= 1.0 && omega2 >= -1.0 && omega2 <= 1.0))
            throw std::invalid_argument("config: omega1/omega2 must lie in [-1, 1]");
        if (channel_kind != "all" && channel_kind != "los" && channel_kind != "nlos")
            throw std::invalid_argument("config: channel_kind must be all, los or nlos");
        if (n_paths < 1)
            throw std::invalid_argument("config: n_paths must be at least 1");
        if (!(user2_amplitude > 0.0))
            throw std::invalid_argument("config: user2_amplitude must be positive");
        if (realizations < 1)
            throw std::invalid_argument("config: realizations must be at least 1");
        if (threads < 1)
            throw std::invalid_argument("config: threads must be at least 1");
        if (pattern_points < 2)
            throw std::invalid_argument("config: pattern_points must be at least 2");
        if (!(c1_target_fraction >= 0.0))
            throw std::invalid_argument("config: c1_target_fraction must be non-negative");
        for (int n : n_list)
            if (n < 2)
                throw std::invalid_argument("config: every n_list entry must be at least 2");
        if (sweep_step && !(*sweep_step > 0.0))
            throw std::invalid_argument("config: sweep_step must be positive");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text)
{
    T v{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("config: bad value for " + std::string(key) + ": '" + std::string(text) + "'");
    return v;
}

inline bool parse_bool(std::string_view key, std::string_view text)
{
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    throw std::invalid_argument("config: bad boolean for " + std::string(key));
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text)
{
    std::vector<T> out;
    while (!text.empty())
    {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (!item.empty())
            out.push_back(parse_number<T>(key, item));
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace detail

/// Apply one `key = value` setting. Unknown keys are an error.
inline void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value)
{
    using detail::parse_number;
    if (key == "n_antennas")
        cfg.system.n_antennas = parse_number<int>(key, value);
    else if (key == "power_mw")
        cfg.system.total_power_mw = parse_number<double>(key, value);
    else if (key == "noise_mw")
        cfg.system.noise_power_mw = parse_number<double>(key, value);
    else if (key == "rate1_bps_hz")
        cfg.system.rate_floor_1 = parse_number<double>(key, value);
    else if (key == "rate2_bps_hz")
        cfg.system.rate_floor_2 = parse_number<double>(key, value);
    else if (key == "phase_sweep")
        cfg.system.phase_sweep = parse_number<int>(key, value);
    else if (key == "lambda1_abs")
        cfg.lambda1_abs = parse_number<double>(key, value);
    else if (key == "lambda2_abs")
        cfg.lambda2_abs = parse_number<double>(key, value);
    else if (key == "omega1")
        cfg.omega1 = parse_number<double>(key, value);
    else if (key == "omega2")
        cfg.omega2 = parse_number<double>(key, value);
    else if (key == "sweep")
    {
        if (value == "rate")
            cfg.sweep = SweepAxis::RateFloor;
        else if (value == "power")
            cfg.sweep = SweepAxis::PowerRatio;
        else
            throw std::invalid_argument("config: sweep must be rate or power");
    }
    else if (key == "sweep_start")
        cfg.sweep_start = parse_number<double>(key, value);
    else if (key == "sweep_stop")
        cfg.sweep_stop = parse_number<double>(key, value);
    else if (key == "sweep_step")
        cfg.sweep_step = parse_number<double>(key, value);
    else if (key == "channel_kind")
        cfg.channel_kind = std::string(value);
    else if (key == "nlos_power_db")
        cfg.nlos_power_db = detail::parse_list<double>(key, value);
    else if (key == "n_paths")
        cfg.n_paths = parse_number<int>(key, value);
    else if (key == "user2_amplitude")
        cfg.user2_amplitude = parse_number<double>(key, value);
    else if (key == "realizations")
        cfg.realizations = parse_number<int>(key, value);
    else if (key == "seed")
        cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "threads")
        cfg.threads = parse_number<int>(key, value);
    else if (key == "nlos_normalized")
        cfg.nlos_normalized = detail::parse_bool(key, value);
    else if (key == "n_list")
        cfg.n_list = detail::parse_list<int>(key, value);
    else if (key == "pattern_points")
        cfg.pattern_points = parse_number<int>(key, value);
    else if (key == "c1_target_fraction")
        cfg.c1_target_fraction = parse_number<double>(key, value);
    else
        throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::string_view sv(line);
        if (const auto hash = sv.find('#'); hash != std::string_view::npos)
            sv = sv.substr(0, hash);
        sv = detail::trim(sv);
        if (sv.empty())
            continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, detail::trim(sv.substr(0, eq)), detail::trim(sv.substr(eq + 1)));
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path);
    return parse_config(in);
}

inline ExperimentConfig parse_config_string(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace mmnoma
