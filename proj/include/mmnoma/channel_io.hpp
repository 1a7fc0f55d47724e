// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented JSON for channel ensembles:
//   {"n": 32, "paths": [{"re": 1.0, "im": 0.0, "omega": -0.25}, ...], "seed": 7}
#pragma once

#include "mmnoma/channel.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace mmnoma {

struct SeededChannel
{
    Channel channel;
    std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const Channel& ch, std::uint64_t seed)
{
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : ch.paths())
        paths.push_back({{"re", p.gain.real()}, {"im", p.gain.imag()}, {"omega", p.direction}});
    return {{"n", ch.n_antennas()}, {"paths", paths}, {"seed", seed}};
}

inline SeededChannel channel_from_json(const nlohmann::json& j)
{
    std::vector<PathComponent> paths;
    for (const auto& p : j.at("paths"))
        paths.push_back({{p.at("re").get<double>(), p.at("im").get<double>()}, p.at("omega").get<double>()});
    return {Channel(j.at("n").get<int>(), std::move(paths)), j.value("seed", std::uint64_t{0})};
}

inline void write_channels_jsonl(std::ostream& out, const std::vector<SeededChannel>& channels)
{
    for (const auto& c : channels)
        out << to_json(c.channel, c.seed).dump() << '\n';
}

inline std::vector<SeededChannel> read_channels_jsonl(std::istream& in)
{
    std::vector<SeededChannel> out;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        out.push_back(channel_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

} // namespace mmnoma
