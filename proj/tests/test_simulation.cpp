#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fbmc/errors.hpp"
#include "fbmc/simulation.hpp"
#include "test_support.hpp"

using namespace fbmc;

namespace {

SimConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string csv(const SimConfig& cfg, const SimRunResult& r) {
    std::ostringstream out;
    write_sweep_csv(out, cfg, r);
    return out.str();
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse(
        "# desk\n"
        "M = 32   # subcarriers\n"
        "M_u = 20\n"
        "ebn0_db = 0, 7.5,30\n"
        "nu = 12\n"
        "tau = auto\n"
        "designs = dfe-ul,thp-sc\n"
        "seed = 18446744073709551615\n");
    CHECK(cfg.subcarriers == 32);
    CHECK(cfg.used_subcarriers == 20);
    CHECK(cfg.ebn0_db == std::vector<double>{0.0, 7.5, 30.0});
    CHECK(cfg.latency == 12u);
    CHECK_FALSE(cfg.tau.has_value());
    CHECK(cfg.designs == std::vector<Design>{Design::dfe_ul, Design::thp_sc});
    CHECK(cfg.seed == 18446744073709551615ull);
    CHECK(cfg.ff_taps == SimConfig{}.ff_taps);

    CHECK_THROWS_AS(parse("L_x = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("M 32\n"), ConfigError);
    CHECK_THROWS_AS(parse("M = 3x\n"), ConfigError);
    CHECK_THROWS_AS(parse("M = 48\n"), ConfigError);
    CHECK_THROWS_AS(parse("M_u = 65\n"), ConfigError);
    CHECK_THROWS_AS(parse("designs = dfe\n"), ConfigError);
    CHECK_THROWS_AS(parse("tau = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse("ebn0_db = \n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("config text round trip") {
    auto cfg = fbmc::testing::small_config();
    cfg.latency = 9;
    cfg.tau = 2.5;
    cfg.designs = {Design::thp_sum, Design::linear_ul};
    const auto again = parse(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.latency == 9u);
    CHECK(again.tau == 2.5);
}

TEST_CASE("design names") {
    for (auto d : all_designs()) CHECK(parse_design(design_name(d)) == d);
    CHECK(all_designs().size() == 6);
    CHECK_THROWS_AS(parse_design("thp"), ConfigError);
}

TEST_CASE("noise variance from Eb/N0") {
    CHECK(noise_variance_from_ebn0(0.0, 16, 1.0, 64, 64) == doctest::Approx(0.25));
    CHECK(noise_variance_from_ebn0(0.0, 16, 1.0, 64, 48) == doctest::Approx(0.1875));
    CHECK(noise_variance_from_ebn0(0.0, 4, 1.0, 64, 64) == doctest::Approx(0.5));
    CHECK(noise_variance_from_ebn0(10.0 * std::log10(2.0), 16, 1.0, 64, 64) == doctest::Approx(0.125));
    CHECK(noise_variance_from_ebn0(20.0, 16, 2.0, 64, 64) == doctest::Approx(0.005));
}

TEST_CASE("empirical MSE") {
    const std::vector<double> a{1.0, 2.0, 3.0}, b{1.0, 0.0, 4.0};
    CHECK(empirical_mse(a, b) == doctest::Approx(5.0 / 3.0));
    CHECK(empirical_mse(a, a) == 0.0);
    CHECK_THROWS_AS(empirical_mse(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
    CHECK(derive_seed(1, {2}) != derive_seed(1, {2, 0}));
}

TEST_CASE("bit count covers the non-excluded window") {
    const LinkSimulator sim(fbmc::testing::small_config());
    const auto& cfg = sim.config();
    for (auto d : {Design::linear_ul, Design::dfe_ul, Design::thp_sum}) {
        const auto r = sim.run_cell(d, 30.0, 0);
        // 2 bits per real half-symbol for 16-QAM
        CHECK(r.bits == 2ull * cfg.used_subcarriers * (2 * cfg.block_length - 2 * sim.excluded_half_symbols(d)));
    }
}

TEST_CASE("excluded window covers the filter bank transient") {
    const LinkSimulator sim(fbmc::testing::small_config());
    const auto& p = sim.prototype();
    const std::size_t transient = (2 * (p.length() - 1) + p.hop() - 1) / p.hop();
    CHECK(sim.excluded_half_symbols(Design::dfe_ul) == transient + sim.config().ff_taps);
    CHECK(sim.excluded_half_symbols(Design::linear_ul) == transient + sim.config().linear_taps);
}

TEST_CASE("sweep is reproducible and independent of scheduling") {
    auto cfg = fbmc::testing::small_config();
    cfg.block_length = 120;
    cfg.designs = {Design::linear_ul, Design::dfe_ul, Design::thp_sum, Design::thp_sc};
    cfg.parallel = 1;
    const auto one = csv(cfg, sweep(cfg));
    cfg.parallel = 3;
    const auto three = csv(cfg, sweep(cfg));
    CHECK(one == three);
    CHECK(csv(cfg, sweep(cfg)) == three);

    const auto rows = data_lines(one);
    REQUIRE(rows.size() == 1 + cfg.designs.size() * cfg.ebn0_db.size());
    CHECK(rows.front() == kSweepColumns);
    CHECK(rows[1].rfind("linear-ul,10,", 0) == 0);
    CHECK(one.find("# infeasible_duality_cells: 0") != std::string::npos);

    cfg.seed = 2;
    CHECK(csv(cfg, sweep(cfg)) != three);
}

TEST_CASE("sweep rows aggregate their cells") {
    auto cfg = fbmc::testing::small_config();
    cfg.block_length = 120;
    cfg.designs = {Design::dfe_ul};
    const auto r = sweep(cfg);
    REQUIRE(r.cells.size() == cfg.ebn0_db.size() * cfg.channels);
    for (std::size_t e = 0; e < cfg.ebn0_db.size(); ++e) {
        std::uint64_t errors = 0, bits = 0;
        double mse = 0.0;
        for (std::size_t c = 0; c < cfg.channels; ++c) {
            const auto& cell = r.cells[e * cfg.channels + c];
            CHECK(cell.channel_index == c);
            const auto direct = LinkSimulator(cfg).run_cell(Design::dfe_ul, cfg.ebn0_db[e], c);
            CHECK(direct.bit_errors == cell.bit_errors);
            errors += cell.bit_errors;
            bits += cell.bits;
            mse += cell.mse_analytic;
        }
        CHECK(r.rows[e].bits == bits);
        CHECK(r.rows[e].channels == cfg.channels);
        CHECK(r.rows[e].ber == doctest::Approx(double(errors) / double(bits)));
        CHECK(r.rows[e].mse_analytic == doctest::Approx(mse / cfg.channels));
    }
}

TEST_CASE("BER falls with Eb/N0") {
    auto cfg = fbmc::testing::small_config();
    cfg.ebn0_db = {0, 10, 20};
    cfg.channels = 4;
    cfg.designs = {Design::dfe_ul, Design::thp_sum};
    const auto r = sweep(cfg);
    for (std::size_t d = 0; d < cfg.designs.size(); ++d) {
        for (std::size_t e = 1; e < cfg.ebn0_db.size(); ++e) {
            const auto& lo = r.rows[d * cfg.ebn0_db.size() + e - 1];
            const auto& hi = r.rows[d * cfg.ebn0_db.size() + e];
            CHECK(hi.ber < lo.ber);
            CHECK(hi.mse_analytic < lo.mse_analytic);
        }
    }
}

TEST_CASE("CSV file is written atomically and filters dump") {
    auto cfg = fbmc::testing::small_config();
    cfg.block_length = 60;
    cfg.channels = 1;
    cfg.ebn0_db = {10};
    cfg.designs = {Design::thp_sc};
    const auto path = std::filesystem::temp_directory_path() / "fbmc_sweep_test.csv";
    std::filesystem::remove(path);
    write_sweep_csv(path, cfg, sweep(cfg));
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(data_lines(text.str()).size() == 2);
    CHECK(text.str().find("# M = 32") != std::string::npos);
    std::filesystem::remove(path);

    const LinkSimulator sim(cfg);
    const auto f = sim.design(Design::thp_sc, sim.channel(0), 0.01);
    std::ostringstream dump;
    write_filters_csv(dump, f);
    const auto lines = data_lines(dump.str());
    CHECK(lines.front() == "design,k,filter,tap,re,im");
    // per subcarrier: L_f ff taps, L_b fb taps, one gain
    CHECK(lines.size() == 1 + cfg.used_subcarriers * (cfg.ff_taps + cfg.fb_taps + 1));
}

TEST_CASE("desk-scale cell runs quickly") {
    SimConfig desk;
    const LinkSimulator sim(desk);
    const auto start = std::chrono::steady_clock::now();
    const auto r = sim.run_cell(Design::thp_sc, 20.0, 0);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.bits > 0);
    CHECK(seconds < 5.0);
}
