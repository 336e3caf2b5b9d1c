#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbmc/channel.hpp"
#include "fbmc/equalizer.hpp"
#include "fbmc/filter_bank.hpp"
#include "fbmc/thp.hpp"

namespace fbmc {

enum class Design { linear_ul, linear_dl_sum, linear_dl_sc, dfe_ul, thp_sum, thp_sc };

std::string_view design_name(Design d) noexcept;
Design parse_design(std::string_view name);
std::vector<Design> parse_design_list(std::string_view list);
const std::vector<Design>& all_designs();

constexpr bool is_downlink(Design d) noexcept { return d != Design::linear_ul && d != Design::dfe_ul; }
constexpr bool is_linear(Design d) noexcept {
    return d == Design::linear_ul || d == Design::linear_dl_sum || d == Design::linear_dl_sc;
}

struct SimConfig {
    std::size_t subcarriers = 64;       // M
    std::size_t used_subcarriers = 48;  // M_u
    std::size_t overlap = 4;            // K
    double rolloff = 1.0;
    int qam_order = 16;
    std::size_t ff_taps = 7;      // L_f
    std::size_t fb_taps = 4;      // L_b
    std::size_t linear_taps = 9;  // L_lin
    std::optional<std::size_t> latency;  // nu; empty = auto
    std::optional<double> tau;           // empty = constellation default
    double sample_rate_hz = 3.84e6;
    std::size_t channel_length = 28;
    std::string channel_profile = "bu";
    std::vector<double> ebn0_db{0, 5, 10, 15, 20, 25, 30};
    std::size_t block_length = 500;  // QAM symbols per subcarrier
    std::size_t channels = 50;
    std::uint64_t seed = 1;
    std::vector<Design> designs = all_designs();
    std::filesystem::path output = "sweep.csv";
    std::size_t parallel = 1;

    /// Throws ConfigError on inconsistent values.
    void validate() const;
    /// Flat `key = value` lines in the config file format.
    std::string to_text() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::filesystem::path& path);

/// Pseudo-SNR convention: sigma_eta^2 = E_s (M_u / M) / (log2(Q) 10^(EbN0/10)),
/// E_s the complex symbol energy.
double noise_variance_from_ebn0(double ebn0_db, int qam_order, double symbol_energy, std::size_t subcarriers,
                                std::size_t used_subcarriers);

/// Mean squared difference; throws on length mismatch.
double empirical_mse(std::span<const double> reference, std::span<const double> estimates);

/// Deterministic 64-bit seed from a master seed and cell coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates) noexcept;

struct CellRecord {
    Design design = Design::dfe_ul;
    double ebn0_db = 0.0;
    std::size_t channel_index = 0;
    std::size_t latency = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    double mse_analytic = 0.0;        // subcarrier average
    double mse_empirical = 0.0;       // subcarrier average, real slots
    std::uint64_t mse_samples = 0;
    double transmit_power = 0.0;      // sum_k ||f_1,k||^2 for downlink designs
    bool power_within_budget = true;
    /// False when the duality transform had no valid scaling; the counters
    /// above are then zero and the cell is left out of the sweep averages.
    bool feasible = true;
};

struct CellOptions {
    FeedbackMode feedback = FeedbackMode::decision;
};

/// Filters of one design on one channel.
struct DesignedFilters {
    Design design = Design::dfe_ul;
    std::size_t latency = 0;
    std::vector<UlFilter> ul;
    std::optional<DlFilterSet> dl;
    std::vector<SubchannelMatrixSet> sets;
};

/// Everything that is fixed for a configuration. Cells are independent and
/// may run concurrently on one simulator.
class LinkSimulator {
public:
    explicit LinkSimulator(SimConfig config);

    const SimConfig& config() const noexcept { return config_; }
    const PrototypeFilter& prototype() const noexcept { return prototype_; }
    UsedBand band() const noexcept { return band_; }
    double tau() const noexcept { return tau_; }
    double signal_variance() const noexcept { return 0.5; }
    std::size_t excluded_half_symbols(Design d) const noexcept;

    ChannelRealization channel(std::size_t channel_index) const;
    DesignedFilters design(Design d, const ChannelRealization& channel, double noise_variance) const;
    CellRecord run_cell(Design d, double ebn0_db, std::size_t channel_index, CellOptions options = {}) const;

private:
    SimConfig config_;
    PrototypeFilter prototype_;
    UsedBand band_;
    double tau_;
};

struct SweepRow {
    Design design = Design::dfe_ul;
    double ebn0_db = 0.0;
    double ber = 0.0;
    double mse_analytic = 0.0;
    double mse_empirical = 0.0;
    std::uint64_t bits = 0;
    std::size_t channels = 0;
    std::uint64_t seed = 0;
};

struct SimRunResult {
    std::vector<SweepRow> rows;
    std::vector<CellRecord> cells;
    std::size_t power_violations = 0;
    /// (design, ebn0_db, channel) of cells skipped for DualityInfeasibleError.
    std::vector<CellRecord> infeasible;
};

/// Runs |designs| x |grid| x channels cells on `config.parallel` threads.
/// Aggregation is in cell order, so the result does not depend on scheduling.
/// Rows average over the feasible cells; n_channels counts them.
SimRunResult sweep(const SimConfig& config);

void write_sweep_csv(std::ostream& out, const SimConfig& config, const SimRunResult& result);
/// Writes to a temporary file and renames it into place.
void write_sweep_csv(const std::filesystem::path& path, const SimConfig& config, const SimRunResult& result);

/// Filter dump: design,k,filter,tap,re,im with `filter` one of ff, fb, gain.
void write_filters_csv(std::ostream& out, const DesignedFilters& filters);

inline constexpr std::string_view kSweepColumns = "design,ebn0_db,ber,mse_analytic,mse_empirical,n_bits,n_channels,seed";

}  // namespace fbmc
