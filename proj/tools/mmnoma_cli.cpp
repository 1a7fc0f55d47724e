// SPDX-License-Identifier: Apache-2.0
//
// mmnoma: experiment driver for the two-user mmWave-NOMA solver.
//
//   mmnoma solve        --config reference.cfg
//   mmnoma sweep-rate   --config reference.cfg -o rate.csv
//   mmnoma sweep-power  --config reference.cfg -o power.csv
//   mmnoma beampattern  --config reference.cfg --output-dir patterns/
//   mmnoma montecarlo   --config mc.cfg --sweep power -o mc.csv
//   mmnoma verify
//
// Exit status: 0 success, 2 infeasible single solve, 1 error (or failed verify check).

#include "mmnoma/mmnoma.hpp"
#include "mmnoma/verification.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides
{
    std::string config_path;
    std::optional<int> n_antennas;
    std::optional<double> power_mw;
    std::optional<double> noise_mw;
    std::optional<double> rate1;
    std::optional<double> rate2;
    std::optional<int> phase_sweep;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::optional<double> omega1;
    std::optional<double> omega2;
    std::optional<double> start;
    std::optional<double> stop;
    std::optional<double> step;
    std::optional<std::string> sweep;
    std::optional<int> realizations;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> channel_kind;
    std::optional<std::string> nlos_power_db;
    std::optional<int> n_paths;
    bool nlos_normalized = false;
    std::optional<std::string> n_list;
    std::optional<int> pattern_points;
    std::optional<double> c1_fraction;
    std::vector<std::string> settings;
};

void add_system_options(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("-c,--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--n-antennas", o.n_antennas, "array size N");
    cmd->add_option("--power-mw", o.power_mw, "total transmit power P (mW)");
    cmd->add_option("--noise-mw", o.noise_mw, "noise power sigma^2 (mW)");
    cmd->add_option("--rate1", o.rate1, "User 1 rate floor (bps/Hz)");
    cmd->add_option("--rate2", o.rate2, "User 2 rate floor (bps/Hz)");
    cmd->add_option("--phase-sweep", o.phase_sweep, "phase sweep resolution M");
    cmd->add_option("--lambda1", o.lambda1, "|lambda1|");
    cmd->add_option("--lambda2", o.lambda2, "|lambda2|");
    cmd->add_option("--omega1", o.omega1, "User 1 direction (cos AoD)");
    cmd->add_option("--omega2", o.omega2, "User 2 direction (cos AoD)");
    cmd->add_option("--set", o.settings, "extra key=value setting (repeatable)");
}

void add_sweep_options(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--start", o.start, "first sweep value");
    cmd->add_option("--stop", o.stop, "last sweep value (inclusive)");
    cmd->add_option("--step", o.step, "sweep step");
}

mmnoma::ExperimentConfig build_config(const Overrides& o)
{
    auto cfg = o.config_path.empty() ? mmnoma::ExperimentConfig{} : mmnoma::load_config(o.config_path);
    for (const auto& s : o.settings)
    {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        mmnoma::apply_setting(cfg, mmnoma::detail::trim(std::string_view(s).substr(0, eq)),
                              mmnoma::detail::trim(std::string_view(s).substr(eq + 1)));
    }
    auto& sys = cfg.system;
    if (o.n_antennas) sys.n_antennas = *o.n_antennas;
    if (o.power_mw) sys.total_power_mw = *o.power_mw;
    if (o.noise_mw) sys.noise_power_mw = *o.noise_mw;
    if (o.rate1) sys.rate_floor_1 = *o.rate1;
    if (o.rate2) sys.rate_floor_2 = *o.rate2;
    if (o.phase_sweep) sys.phase_sweep = *o.phase_sweep;
    if (o.lambda1) cfg.lambda1_abs = *o.lambda1;
    if (o.lambda2) cfg.lambda2_abs = *o.lambda2;
    if (o.omega1) cfg.omega1 = *o.omega1;
    if (o.omega2) cfg.omega2 = *o.omega2;
    if (o.start) cfg.sweep_start = *o.start;
    if (o.stop) cfg.sweep_stop = *o.stop;
    if (o.step) cfg.sweep_step = *o.step;
    if (o.sweep) mmnoma::apply_setting(cfg, "sweep", *o.sweep);
    if (o.realizations) cfg.realizations = *o.realizations;
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    if (o.channel_kind) cfg.channel_kind = *o.channel_kind;
    if (o.nlos_power_db) mmnoma::apply_setting(cfg, "nlos_power_db", *o.nlos_power_db);
    if (o.n_paths) cfg.n_paths = *o.n_paths;
    if (o.nlos_normalized) cfg.nlos_normalized = true;
    if (o.n_list) mmnoma::apply_setting(cfg, "n_list", *o.n_list);
    if (o.pattern_points) cfg.pattern_points = *o.pattern_points;
    if (o.c1_fraction) cfg.c1_target_fraction = *o.c1_fraction;
    cfg.validate();
    return cfg;
}

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn fn)
{
    if (path.empty() || path == "-")
    {
        fn(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file " + path);
    fn(f);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint power allocation and constant-modulus beamforming for two-user mmWave-NOMA"};
    app.require_subcommand(1);

    Overrides o;
    std::string output;
    std::string output_dir = "beampatterns";
    bool quick = false;

    auto* solve = app.add_subcommand("solve", "run the full pipeline once and print a JSON report");
    add_system_options(solve, o);
    solve->add_option("-o,--output", output, "JSON output file (default stdout)");

    auto* sweep_rate = app.add_subcommand("sweep-rate", "sweep r1 = r2 and write a CSV series");
    add_system_options(sweep_rate, o);
    add_sweep_options(sweep_rate, o);
    sweep_rate->add_option("-o,--output", output, "CSV output file (default stdout)");

    auto* sweep_power = app.add_subcommand("sweep-power", "sweep P/sigma^2 in dB and write a CSV series");
    add_system_options(sweep_power, o);
    add_sweep_options(sweep_power, o);
    sweep_power->add_option("-o,--output", output, "CSV output file (default stdout)");

    auto* beampattern = app.add_subcommand("beampattern", "ideal, pre-CM and post-CM beam patterns per N");
    add_system_options(beampattern, o);
    beampattern->add_option("--n-list", o.n_list, "comma-separated array sizes");
    beampattern->add_option("--points", o.pattern_points, "pattern grid points over [-1, 1]");
    beampattern->add_option("--c1-fraction", o.c1_fraction, "c1 target as a fraction of N");
    beampattern->add_option("-d,--output-dir", output_dir, "directory for the CSV files");

    auto* montecarlo = app.add_subcommand("montecarlo", "average rates over random multipath channels");
    add_system_options(montecarlo, o);
    add_sweep_options(montecarlo, o);
    montecarlo->add_option("--sweep", o.sweep, "rate or power")->check(CLI::IsMember({"rate", "power"}));
    montecarlo->add_option("--realizations", o.realizations, "channel draws per sweep point");
    montecarlo->add_option("--seed", o.seed, "master seed");
    montecarlo->add_option("--threads", o.threads, "worker threads");
    montecarlo->add_option("--channel-kind", o.channel_kind, "all, los or nlos")
        ->check(CLI::IsMember({"all", "los", "nlos"}));
    montecarlo->add_option("--nlos-power-db", o.nlos_power_db, "comma-separated LOS-case NLOS path powers (dB)");
    montecarlo->add_option("--n-paths", o.n_paths, "paths per channel");
    montecarlo->add_flag("--nlos-normalized", o.nlos_normalized, "NLOS path power 1/L instead of 1/sqrt(L)");
    montecarlo->add_option("-o,--output", output, "CSV output file (default stdout)");

    auto* verify = app.add_subcommand("verify", "run the oracle and property checks");
    verify->add_flag("--quick", quick, "reduced sample counts");
    verify->add_option("--seed", o.seed, "seed for randomized checks");
    verify->add_option("--threads", o.threads, "worker threads for the Monte Carlo check");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*solve)
        {
            const auto cfg = build_config(o);
            const auto rep = mmnoma::run_single(mmnoma::reference_pair(cfg), cfg.system);
            with_output(output, [&](std::ostream& out) { out << mmnoma::to_json(rep).dump(2) << '\n'; });
            return rep.feasible() ? 0 : 2;
        }
        if (*sweep_rate || *sweep_power)
        {
            const auto cfg = build_config(o);
            const auto axis = *sweep_rate ? mmnoma::SweepAxis::RateFloor : mmnoma::SweepAxis::PowerRatio;
            with_output(output, [&](std::ostream& out) { mmnoma::write_sweep_csv(cfg, axis, out); });
            return 0;
        }
        if (*beampattern)
        {
            const auto cfg = build_config(o);
            const auto rows = mmnoma::write_beampatterns(cfg, output_dir);
            for (const auto& r : rows)
                std::cout << "N=" << r.n << " m=" << r.selected_m << " err_c1=" << mmnoma::format_double(r.err_c1)
                          << " err_c2=" << mmnoma::format_double(r.err_c2) << '\n';
            return 0;
        }
        if (*montecarlo)
        {
            const auto cfg = build_config(o);
            const auto rows = mmnoma::run_montecarlo(cfg, cfg.sweep);
            with_output(output, [&](std::ostream& out) { mmnoma::write_montecarlo_csv(cfg, cfg.sweep, rows, out); });
            return 0;
        }
        if (*verify)
        {
            mmnoma::VerifyOptions opt;
            opt.quick = quick;
            if (o.seed)
                opt.seed = *o.seed;
            if (o.threads)
                opt.threads = *o.threads;
            bool all = true;
            for (const auto& r : mmnoma::run_all_checks(opt))
            {
                std::cout << mmnoma::format_result_line(r) << std::endl;
                all = all && r.passed;
            }
            return all ? 0 : 1;
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
