// SPDX-License-Identifier: Apache-2.0
//
// Sparse multipath channels for a half-wavelength uniform linear array.
//
// A channel is a sum of L path components, each a complex gain times the
// array steering vector a(N, Omega) with Omega = cos(AoD) in [-1, 1]:
//
//     h = sum_l gain_l * a(N, Omega_l),   [a(N, Omega)]_k = exp(j*pi*k*Omega), k = 0..N-1
//
// The effective channel keeps only the strongest path.
#pragma once

#include "mmnoma/linalg.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmnoma {

struct PathComponent
{
    std::complex<double> gain;
    double direction = 0.0; // cos(AoD)

    bool operator==(const PathComponent&) const = default;
};

class Channel
{
public:
    Channel(int n_antennas, std::vector<PathComponent> paths)
        : n_antennas_(n_antennas), paths_(std::move(paths))
    {
        if (n_antennas_ < 2)
            throw std::invalid_argument("Channel: n_antennas must be at least 2");
        if (paths_.empty())
            throw std::invalid_argument("Channel: at least one path is required");
        for (const auto& p : paths_)
            if (!(p.direction >= -1.0 && p.direction <= 1.0))
                throw std::invalid_argument("Channel: path direction outside [-1, 1]");
    }

    int n_antennas() const noexcept { return n_antennas_; }
    const std::vector<PathComponent>& paths() const noexcept { return paths_; }

    bool operator==(const Channel&) const = default;

private:
    int n_antennas_;
    std::vector<PathComponent> paths_;
};

struct EffectiveChannel
{
    std::complex<double> gain;
    double direction = 0.0;
    int n_antennas = 0;
    std::size_t path_index = 0; // index of the retained path in the source channel

    double power() const noexcept { return std::norm(gain); }
};

enum class ChannelKind
{
    Los,
    Nlos
};

// Per-path average power rule for NLOS channels. The verbatim setup gives every
// path power 1/sqrt(L); the normalized variant uses 1/L so the total is one.
enum class NlosScaling
{
    InvSqrtL,
    InvL
};

inline std::string to_string(ChannelKind kind)
{
    return kind == ChannelKind::Los ? "los" : "nlos";
}

template <std::floating_point T = double>
BasicComplexVector<T> steering_vector(int n, T omega)
{
    if (n < 1)
        throw std::invalid_argument("steering_vector: n must be positive");
    BasicComplexVector<T> a(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        a[static_cast<std::size_t>(k)] = std::polar(T(1), std::numbers::pi_v<T> * T(k) * omega);
    return a;
}

inline ComplexVector channel_vector(const Channel& ch)
{
    ComplexVector h(static_cast<std::size_t>(ch.n_antennas()));
    for (const auto& path : ch.paths())
    {
        const auto a = steering_vector(ch.n_antennas(), path.direction);
        for (std::size_t k = 0; k < h.size(); ++k)
            h[k] += path.gain * a[k];
    }
    return h;
}

inline ComplexVector channel_vector(const EffectiveChannel& eff)
{
    auto h = steering_vector(eff.n_antennas, eff.direction);
    for (auto& v : h)
        v *= eff.gain;
    return h;
}

/// Strongest path by |gain|; ties go to the lowest index.
inline EffectiveChannel effective_channel(const Channel& ch)
{
    const auto& paths = ch.paths();
    std::size_t best = 0;
    for (std::size_t i = 1; i < paths.size(); ++i)
        if (std::abs(paths[i].gain) > std::abs(paths[best].gain))
            best = i;
    return EffectiveChannel{paths[best].gain, paths[best].direction, ch.n_antennas(), best};
}

/// |h^H w|^2
inline double beam_gain(std::span<const std::complex<double>> h, std::span<const std::complex<double>> w)
{
    if (h.size() != w.size())
        throw std::invalid_argument("beam_gain: channel and beam lengths differ");
    return std::norm(inner<double>(h, w));
}

inline double beam_gain(const ComplexVector& h, const ComplexVector& w)
{
    return beam_gain(std::span<const std::complex<double>>(h), std::span<const std::complex<double>>(w));
}

/// Circular distance between two directions; a(N, Omega) has period 2 in Omega.
inline double direction_distance(double omega1, double omega2)
{
    const double d = std::abs(omega1 - omega2);
    return std::min(d, 2.0 - d);
}

/// Draw a channel from the LOS or NLOS model using the supplied engine.
///
/// LOS: path 0 has modulus `los_modulus` with a uniform phase; the remaining
/// n_paths-1 gains are CN(0, nlos_power). NLOS: every gain is CN(0, 1/sqrt(L))
/// (or CN(0, 1/L) with NlosScaling::InvL) and nlos_power is unused. All
/// directions are uniform on [-1, 1].
inline Channel sample_channel(int n, ChannelKind kind, int n_paths, double nlos_power, std::mt19937_64& rng,
                              NlosScaling scaling = NlosScaling::InvSqrtL, double los_modulus = 1.0)
{
    if (n_paths < 1)
        throw std::invalid_argument("sample_channel: n_paths must be at least 1");
    if (!(nlos_power > 0.0))
        throw std::invalid_argument("sample_channel: nlos_power must be positive");

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform_dir(-1.0, 1.0);
    std::uniform_real_distribution<double> uniform_phase(0.0, 2.0 * std::numbers::pi);

    const double L = static_cast<double>(n_paths);
    const double nlos_path_power = kind == ChannelKind::Los ? nlos_power
                                   : scaling == NlosScaling::InvSqrtL ? 1.0 / std::sqrt(L)
                                                                      : 1.0 / L;
    const double sigma = std::sqrt(nlos_path_power / 2.0);

    std::vector<PathComponent> paths;
    paths.reserve(static_cast<std::size_t>(n_paths));
    for (int l = 0; l < n_paths; ++l)
    {
        PathComponent p;
        if (kind == ChannelKind::Los && l == 0)
        {
            p.gain = std::polar(los_modulus, uniform_phase(rng));
        }
        else
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            p.gain = {sigma * re, sigma * im};
        }
        p.direction = uniform_dir(rng);
        paths.push_back(p);
    }
    return Channel(n, std::move(paths));
}

inline Channel sample_channel(int n, ChannelKind kind, int n_paths, double nlos_power, std::uint64_t seed,
                              NlosScaling scaling = NlosScaling::InvSqrtL, double los_modulus = 1.0)
{
    std::mt19937_64 rng(seed);
    return sample_channel(n, kind, n_paths, nlos_power, rng, scaling, los_modulus);
}

} // namespace mmnoma
