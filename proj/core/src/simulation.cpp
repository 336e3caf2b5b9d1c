#include "fbmc/simulation.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fbmc/errors.hpp"
#include "fbmc/oqam.hpp"

namespace fbmc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t coordinate(double value) noexcept { return std::bit_cast<std::uint64_t>(value); }

enum SeedStream : std::uint64_t { kChannelStream = 1, kDataStream = 2, kNoiseStream = 3 };

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates) noexcept {
    std::uint64_t h = splitmix64(master);
    for (const auto c : coordinates) h = splitmix64(h ^ splitmix64(c));
    return h;
}

double noise_variance_from_ebn0(double ebn0_db, int qam_order, double symbol_energy, std::size_t subcarriers,
                                std::size_t used_subcarriers) {
    if (qam_order < 4) throw std::invalid_argument("QAM order must be >= 4");
    const double bits = std::log2(static_cast<double>(qam_order));
    const double ratio = static_cast<double>(used_subcarriers) / static_cast<double>(subcarriers);
    return symbol_energy * ratio / (bits * std::pow(10.0, ebn0_db / 10.0));
}

double empirical_mse(std::span<const double> reference, std::span<const double> estimates) {
    if (reference.size() != estimates.size()) throw std::invalid_argument("empirical_mse: length mismatch");
    if (reference.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = estimates[i] - reference[i];
        acc += d * d;
    }
    return acc / static_cast<double>(reference.size());
}

LinkSimulator::LinkSimulator(SimConfig config)
    : config_(std::move(config)),
      prototype_(PrototypeFilter::root_raised_cosine(config_.subcarriers, config_.overlap, config_.rolloff)),
      band_(UsedBand::centred(config_.subcarriers, config_.used_subcarriers)),
      tau_(config_.tau ? *config_.tau : Constellation(config_.qam_order).modulo_constant()) {
    config_.validate();
}

std::size_t LinkSimulator::excluded_half_symbols(Design d) const noexcept {
    const std::size_t hop = prototype_.hop();
    const std::size_t spread = (2 * (prototype_.length() - 1) + hop - 1) / hop;
    return spread + (is_linear(d) ? config_.linear_taps : config_.ff_taps);
}

ChannelRealization LinkSimulator::channel(std::size_t channel_index) const {
    std::mt19937_64 rng(derive_seed(config_.seed, {kChannelStream, channel_index}));
    return generate_bu_channel(rng, config_.sample_rate_hz, config_.channel_length);
}

DesignedFilters LinkSimulator::design(Design d, const ChannelRealization& channel, double noise_variance) const {
    const std::size_t ff = is_linear(d) ? config_.linear_taps : config_.ff_taps;
    const std::size_t fb = is_linear(d) ? 0 : config_.fb_taps;
    const double sx = signal_variance();

    std::vector<std::shared_ptr<const SubcarrierModel>> models;
    models.reserve(band_.count);
    for (std::size_t i = 0; i < band_.count; ++i) {
        models.push_back(std::make_shared<const SubcarrierModel>(
            build_subcarrier_model(prototype_, channel, band_, band_.first + i, ff)));
    }
    const EqualizerDims probe{ff, fb, models.front()->response_taps, 0};

    auto design_all = [&](std::size_t nu, std::vector<SubchannelMatrixSet>& sets, std::vector<UlFilter>& filters) {
        sets.clear();
        filters.clear();
        for (const auto& model : models) {
            sets.push_back(assemble(model, fb, nu, sx));
            filters.push_back(design_dfe(sets.back(), noise_variance));
        }
    };

    DesignedFilters out;
    out.design = d;
    if (config_.latency) {
        out.latency = *config_.latency;
    } else {
        std::vector<SubchannelMatrixSet> sets;
        std::vector<UlFilter> filters;
        out.latency = select_latency(
            [&](std::size_t nu) {
                design_all(nu, sets, filters);
                double total = 0.0;
                for (const auto& f : filters) total += f.mse;
                return total;
            },
            0, probe.max_latency());
    }
    design_all(out.latency, out.sets, out.ul);

    if (is_downlink(d)) {
        const bool thp = !is_linear(d);
        DualityProblem problem;
        problem.sets = out.sets;
        problem.ul = out.ul;
        problem.signal_variance = sx;
        // without the modulo the transmitted half-symbols keep the data variance
        problem.transmit_variance = thp ? modulo_variance(tau_) : sx;
        problem.noise_variance = noise_variance;
        problem.prototype_energy = prototype_.energy();
        const bool sum = d == Design::thp_sum || d == Design::linear_dl_sum;
        DlFilterSet dl = sum ? sum_mse_duality(problem) : sc_mse_duality(problem);
        dl.tau = tau_;
        dl.modulo = thp;
        out.dl = std::move(dl);
    }
    return out;
}

CellRecord LinkSimulator::run_cell(Design d, double ebn0_db, std::size_t channel_index, CellOptions options) const {
    const Constellation constellation(config_.qam_order);
    const double noise_variance = noise_variance_from_ebn0(ebn0_db, config_.qam_order, 1.0, config_.subcarriers,
                                                           config_.used_subcarriers);
    const auto ch = channel(channel_index);
    const auto filters = [&] {
        try {
            return design(d, ch, noise_variance);
        } catch (const DualityInfeasibleError& e) {
            std::ostringstream msg;
            msg << "cell (" << design_name(d) << ", " << ebn0_db << " dB, channel " << channel_index << "): " << e.what();
            throw DualityInfeasibleError(msg.str());
        }
    }();

    CellRecord record;
    record.design = d;
    record.ebn0_db = ebn0_db;
    record.channel_index = channel_index;
    record.latency = filters.latency;

    // data and noise are shared by all designs of a cell coordinate
    std::mt19937_64 data_rng(derive_seed(config_.seed, {kDataStream, channel_index, coordinate(ebn0_db)}));
    std::mt19937_64 noise_rng(derive_seed(config_.seed, {kNoiseStream, channel_index, coordinate(ebn0_db)}));

    const auto bps = static_cast<std::size_t>(constellation.bits_per_symbol());
    std::vector<std::uint8_t> bits(band_.count * config_.block_length * bps);
    for (auto& b : bits) b = static_cast<std::uint8_t>(data_rng() >> 63);
    const auto grid = qam_modulate(bits, config_.qam_order, band_.count, band_.first);
    const auto streams = oqam_stagger(grid);
    const std::size_t count = streams.length();

    std::vector<PrecodedStream> precoded;
    const Eigen::MatrixXcd inputs = filters.dl ? thp_precode(streams, *filters.dl, &precoded) : phase_rotated(streams);
    const auto tx = sfb_synthesize(inputs, band_.first, prototype_);

    const std::size_t window = filters.sets.front().dims.window();
    const std::size_t outputs = count + window + 1;
    const auto rx = apply_channel(tx, ch, noise_variance, noise_rng, outputs * prototype_.hop());
    const Eigen::MatrixXcd y = afb_analyze(rx, prototype_, band_, outputs);

    const std::size_t excluded = excluded_half_symbols(d);
    if (2 * excluded >= count) throw ConfigError("block length too short for the transient exclusion window");

    double mse_sum = 0.0;
    double analytic_sum = 0.0;
    std::vector<std::complex<double>> row(outputs);
    for (std::size_t i = 0; i < band_.count; ++i) {
        const std::size_t k = band_.first + i;
        for (std::size_t n = 0; n < outputs; ++n) row[n] = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n));
        const Eigen::VectorXd truth_row = streams.values.row(static_cast<Eigen::Index>(i)).transpose();
        const std::span<const double> truth(truth_row.data(), count);

        std::vector<double> estimate;   // compared against the target for MSE
        std::vector<double> reference;
        std::vector<double> decided(count);
        if (filters.dl) {
            const auto& f = filters.dl->filters[i];
            analytic_sum += f.mse;
            estimate = dl_receive_unwrapped(row, f, count);
            reference.resize(count);
            for (std::size_t m = 0; m < count; ++m) {
                reference[m] = truth[m] + precoded[i].offset[m];
                const double x = filters.dl->modulo ? modulo_reduce(estimate[m], tau_) : estimate[m];
                decided[m] = constellation.slice_axis(x);
            }
        } else {
            const auto& f = filters.ul[i];
            analytic_sum += f.mse;
            auto eq = dfe_run(row, f, count, constellation, options.feedback, truth);
            estimate = std::move(eq.soft);
            reference.assign(truth.begin(), truth.end());
            decided = std::move(eq.decisions);
        }

        double sq = 0.0;
        std::uint64_t samples = 0;
        for (std::size_t m = excluded; m < count - excluded; ++m) {
            const auto diff = constellation.demap_axis(decided[m]) ^ constellation.demap_axis(truth[m]);
            record.bit_errors += static_cast<std::uint64_t>(std::popcount(diff));
            record.bits += static_cast<std::uint64_t>(constellation.bits_per_axis());
            if (is_real_slot(k, static_cast<std::ptrdiff_t>(m + filters.latency))) {
                const double e = estimate[m] - reference[m];
                sq += e * e;
                ++samples;
            }
        }
        mse_sum += samples ? sq / static_cast<double>(samples) : 0.0;
        record.mse_samples += samples;
    }
    record.mse_analytic = analytic_sum / static_cast<double>(band_.count);
    record.mse_empirical = mse_sum / static_cast<double>(band_.count);
    if (filters.dl) {
        record.transmit_power = filters.dl->transmit_power;
        record.power_within_budget = filters.dl->power_within_budget;
    }
    return record;
}

SimRunResult sweep(const SimConfig& config) {
    const LinkSimulator sim(config);
    struct Coord {
        Design design;
        double ebn0;
        std::size_t channel;
    };
    std::vector<Coord> coords;
    for (const auto d : config.designs) {
        for (const double e : config.ebn0_db) {
            for (std::size_t c = 0; c < config.channels; ++c) coords.push_back({d, e, c});
        }
    }

    SimRunResult result;
    result.cells.resize(coords.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= coords.size()) return;
            const auto& c = coords[idx];
            try {
                result.cells[idx] = sim.run_cell(c.design, c.ebn0, c.channel);
            } catch (const DualityInfeasibleError&) {
                auto& cell = result.cells[idx];
                cell.design = c.design;
                cell.ebn0_db = c.ebn0;
                cell.channel_index = c.channel;
                cell.feasible = false;
            } catch (const std::exception& ex) {
                std::ostringstream msg;
                msg << "cell (" << design_name(c.design) << ", " << c.ebn0 << " dB, channel " << c.channel
                    << "): " << ex.what();
                std::lock_guard lock(error_mutex);
                if (!error) error = std::make_exception_ptr(std::runtime_error(msg.str()));
                next.store(coords.size());
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(config.parallel, coords.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    std::size_t idx = 0;
    for (const auto d : config.designs) {
        for (const double e : config.ebn0_db) {
            SweepRow row{d, e, 0.0, 0.0, 0.0, 0, 0, config.seed};
            std::uint64_t errors = 0;
            for (std::size_t c = 0; c < config.channels; ++c, ++idx) {
                const auto& cell = result.cells[idx];
                if (!cell.feasible) {
                    result.infeasible.push_back(cell);
                    continue;
                }
                ++row.channels;
                errors += cell.bit_errors;
                row.bits += cell.bits;
                row.mse_analytic += cell.mse_analytic;
                row.mse_empirical += cell.mse_empirical;
                if (!cell.power_within_budget) ++result.power_violations;
            }
            row.ber = row.bits ? static_cast<double>(errors) / static_cast<double>(row.bits) : 0.0;
            if (row.channels) {
                row.mse_analytic /= static_cast<double>(row.channels);
                row.mse_empirical /= static_cast<double>(row.channels);
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const SimConfig& config, const SimRunResult& result) {
    const LinkSimulator sim(config);
    out << "# fbmc link-level sweep\n";
    std::istringstream echo(config.to_text());
    for (std::string line; std::getline(echo, line);) out << "# " << line << '\n';
    out << "# pseudo_snr: sigma_eta^2 = (M_u/M) / (log2(Q) * 10^(ebn0_db/10)), unit symbol and channel energy\n";
    out << "# excluded_half_symbols_each_end: linear=" << sim.excluded_half_symbols(Design::linear_ul)
        << " dfe/thp=" << sim.excluded_half_symbols(Design::dfe_ul) << '\n';
    out << "# mse_empirical: real slots only; downlink error taken before the receive modulo\n";
    out << "# infeasible_duality_cells: " << result.infeasible.size() << '\n';
    for (const auto& cell : result.infeasible) {
        out << "#   " << design_name(cell.design) << " ebn0_db=" << cell.ebn0_db << " channel=" << cell.channel_index
            << '\n';
    }
    out << kSweepColumns << '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const auto& row : result.rows) {
        out << design_name(row.design) << ',' << num(row.ebn0_db) << ',' << num(row.ber) << ','
            << num(row.mse_analytic) << ',' << num(row.mse_empirical) << ',' << row.bits << ',' << row.channels << ','
            << row.seed << '\n';
    }
}

void write_sweep_csv(const std::filesystem::path& path, const SimConfig& config, const SimRunResult& result) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        write_sweep_csv(out, config, result);
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_filters_csv(std::ostream& out, const DesignedFilters& filters) {
    out.precision(17);
    out << "# design=" << design_name(filters.design) << " latency=" << filters.latency << '\n';
    if (filters.dl) {
        out << "# transmit_power=" << filters.dl->transmit_power << " tau=" << filters.dl->tau
            << " modulo=" << (filters.dl->modulo ? "on" : "off") << '\n';
    }
    out << "design,k,filter,tap,re,im\n";
    const auto name = design_name(filters.design);
    auto emit = [&](std::size_t k, std::string_view filter, std::size_t tap, double re, double im) {
        out << name << ',' << k << ',' << filter << ',' << tap << ',' << re << ',' << im << '\n';
    };
    auto emit_taps = [&](std::size_t k, const std::vector<std::complex<double>>& taps, const Eigen::VectorXd& fb) {
        for (std::size_t i = 0; i < taps.size(); ++i) emit(k, "ff", i, taps[i].real(), taps[i].imag());
        for (Eigen::Index i = 0; i < fb.size(); ++i) emit(k, "fb", static_cast<std::size_t>(i + 1), fb(i), 0.0);
    };
    if (filters.dl) {
        for (const auto& f : filters.dl->filters) {
            emit_taps(f.k, f.taps(), f.fb);
            emit(f.k, "gain", 0, f.rx_gain, 0.0);
        }
    } else {
        for (const auto& f : filters.ul) {
            emit_taps(f.k, f.taps(), f.fb);
            emit(f.k, "gain", 0, 1.0, 0.0);
        }
    }
}

}  // namespace fbmc
