#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fbmc/errors.hpp"
#include "fbmc/simulation.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string designs;
    std::optional<std::size_t> parallel;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "config file (key = value lines)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--out", flags.out, "output path");
    cmd->add_option("--designs", flags.designs, "comma separated design list");
    cmd->add_option("--parallel", flags.parallel, "worker threads")->check(CLI::PositiveNumber);
}

fbmc::SimConfig resolve(const CommonFlags& flags) {
    fbmc::SimConfig cfg = flags.config.empty() ? fbmc::SimConfig{} : fbmc::load_config(flags.config);
    if (flags.seed) cfg.seed = *flags.seed;
    if (!flags.out.empty()) cfg.output = flags.out;
    if (!flags.designs.empty()) cfg.designs = fbmc::parse_design_list(flags.designs);
    if (flags.parallel) cfg.parallel = *flags.parallel;
    cfg.validate();
    return cfg;
}

void warn_power(std::size_t violations) {
    if (violations) {
        std::cerr << "warning: " << violations << " downlink cell(s) exceed the transmit power budget M_u\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FBMC/OQAM link simulator: MMSE DFE and dual THP designs"};
    app.require_subcommand(1);

    CommonFlags design_flags;
    auto* design_cmd = app.add_subcommand("design", "dump the filters of one design on one channel");
    add_common(design_cmd, design_flags);
    std::size_t design_channel = 0;
    double design_ebn0 = 15.0;
    design_cmd->add_option("--channel", design_channel, "channel index");
    design_cmd->add_option("--ebn0", design_ebn0, "Eb/N0 in dB");

    CommonFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "simulate a single cell per design");
    add_common(run_cmd, run_flags);
    std::size_t run_channel = 0;
    double run_ebn0 = 15.0;
    bool genie = false;
    run_cmd->add_option("--channel", run_channel, "channel index");
    run_cmd->add_option("--ebn0", run_ebn0, "Eb/N0 in dB");
    run_cmd->add_flag("--genie", genie, "feed back true symbols in the uplink DFE");

    CommonFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "full designs x Eb/N0 x channels grid, written as CSV");
    add_common(sweep_cmd, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*design_cmd) {
            const auto cfg = resolve(design_flags);
            const fbmc::LinkSimulator sim(cfg);
            const auto ch = sim.channel(design_channel);
            const double noise = fbmc::noise_variance_from_ebn0(design_ebn0, cfg.qam_order, 1.0, cfg.subcarriers,
                                                                cfg.used_subcarriers);
            std::ofstream file;
            if (!design_flags.out.empty()) {
                file.open(design_flags.out);
                if (!file) throw std::runtime_error("cannot open " + design_flags.out);
            }
            std::ostream& out = design_flags.out.empty() ? std::cout : file;
            for (const auto d : cfg.designs) {
                const auto filters = sim.design(d, ch, noise);
                fbmc::write_filters_csv(out, filters);
                if (filters.dl && !filters.dl->power_within_budget) warn_power(1);
            }
        } else if (*run_cmd) {
            const auto cfg = resolve(run_flags);
            const fbmc::LinkSimulator sim(cfg);
            fbmc::CellOptions options;
            if (genie) options.feedback = fbmc::FeedbackMode::genie;
            std::printf("design,ebn0_db,channel,latency,bit_errors,bits,ber,mse_analytic,mse_empirical,tx_power\n");
            std::size_t violations = 0;
            for (const auto d : cfg.designs) {
                const auto r = sim.run_cell(d, run_ebn0, run_channel, options);
                if (!r.power_within_budget) ++violations;
                std::printf("%s,%g,%zu,%zu,%llu,%llu,%.6g,%.6g,%.6g,%.6g\n", std::string(fbmc::design_name(d)).c_str(),
                            r.ebn0_db, r.channel_index, r.latency, static_cast<unsigned long long>(r.bit_errors),
                            static_cast<unsigned long long>(r.bits),
                            r.bits ? static_cast<double>(r.bit_errors) / static_cast<double>(r.bits) : 0.0,
                            r.mse_analytic, r.mse_empirical, r.transmit_power);
            }
            warn_power(violations);
        } else if (*sweep_cmd) {
            const auto cfg = resolve(sweep_flags);
            const auto start = std::chrono::steady_clock::now();
            const auto result = fbmc::sweep(cfg);
            fbmc::write_sweep_csv(cfg.output, cfg, result);
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            std::cerr << "wrote " << result.rows.size() << " rows to " << cfg.output.string() << " in "
                      << elapsed.count() << " s\n";
            warn_power(result.power_violations);
        }
    } catch (const fbmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
