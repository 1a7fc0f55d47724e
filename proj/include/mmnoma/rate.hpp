// SPDX-License-Identifier: Apache-2.0
//
// Achievable rates of the two-user downlink under either SIC decoding order.
#pragma once

#include "mmnoma/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mmnoma {

struct SystemConfig
{
    int n_antennas = 32;          // N
    double total_power_mw = 100;  // P
    double noise_power_mw = 1;    // sigma^2
    double rate_floor_1 = 0;      // r1, bps/Hz
    double rate_floor_2 = 0;      // r2, bps/Hz
    int phase_sweep = 20;         // M

    void validate() const
    {
        if (n_antennas < 2)
            throw std::invalid_argument("SystemConfig: n_antennas must be at least 2");
        if (!(total_power_mw > 0.0))
            throw std::invalid_argument("SystemConfig: total_power_mw must be positive");
        if (!(noise_power_mw > 0.0))
            throw std::invalid_argument("SystemConfig: noise_power_mw must be positive");
        if (!(rate_floor_1 >= 0.0) || !(rate_floor_2 >= 0.0))
            throw std::invalid_argument("SystemConfig: rate floors must be non-negative");
        if (phase_sweep < 1)
            throw std::invalid_argument("SystemConfig: phase_sweep must be at least 1");
    }
};

enum class DecodingOrder
{
    DecodeUser1First, // Case 1: User 2 cancels nothing, User 1 cancels User 2
    DecodeUser2First  // Case 2: User 1 cancels User 2's signal first
};

inline std::string to_string(DecodingOrder order)
{
    return order == DecodingOrder::DecodeUser1First ? "decode_user1_first" : "decode_user2_first";
}

struct RateReport
{
    double r1 = 0;
    double r2 = 0;
    double sum = 0;
    DecodingOrder order = DecodingOrder::DecodeUser2First;
    bool sic_valid = false;
};

/// User 1 decodes and removes User 2's signal; valid iff c1 >= c2.
inline RateReport rates_case2(double c1, double c2, double p1, double p2, double sigma2)
{
    RateReport r;
    r.r1 = std::log2(1.0 + c1 * p1 / sigma2);
    r.r2 = std::log2(1.0 + c2 * p2 / (c2 * p1 + sigma2));
    r.sum = r.r1 + r.r2;
    r.order = DecodingOrder::DecodeUser2First;
    r.sic_valid = c1 >= c2;
    return r;
}

/// User 2 decodes and removes User 1's signal; valid iff c2 >= c1.
inline RateReport rates_case1(double c1, double c2, double p1, double p2, double sigma2)
{
    RateReport r;
    r.r1 = std::log2(1.0 + c1 * p1 / (c1 * p2 + sigma2));
    r.r2 = std::log2(1.0 + c2 * p2 / sigma2);
    r.sum = r.r1 + r.r2;
    r.order = DecodingOrder::DecodeUser1First;
    r.sic_valid = c2 >= c1;
    return r;
}

/// Half the time per user, full power P, beam gain N/2.
inline double tdma_sum_rate(std::complex<double> lambda1, std::complex<double> lambda2, const SystemConfig& cfg)
{
    const double g = 0.5 * cfg.n_antennas * cfg.total_power_mw / cfg.noise_power_mw;
    return 0.5 * std::log2(1.0 + g * std::norm(lambda1)) + 0.5 * std::log2(1.0 + g * std::norm(lambda2));
}

} // namespace mmnoma
