#include "fbmc/filter_bank.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace fbmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Continuous RRC impulse response at time x (in symbol periods).
double rrc(double x, double beta) {
    if (std::abs(x) < 1e-12) return 1.0 - beta + 4.0 * beta / kPi;
    if (beta > 0.0 && std::abs(std::abs(x) - 1.0 / (4.0 * beta)) < 1e-12) {
        return beta / std::sqrt(2.0) *
               ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
    }
    const double num = std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
    const double den = kPi * x * (1.0 - (4.0 * beta * x) * (4.0 * beta * x));
    return num / den;
}

// exp(-j 2 pi k D / M) with D = (L_p - 1) / 2 = K M / 2.
cplx centre_phase(const PrototypeFilter& p, std::size_t k) {
    const double d = 0.5 * static_cast<double>(p.length() - 1);
    const double arg = -2.0 * kPi * static_cast<double>(k) * d / static_cast<double>(p.subcarriers());
    return std::polar(1.0, arg);
}

}  // namespace

PrototypeFilter PrototypeFilter::root_raised_cosine(std::size_t subcarriers, std::size_t overlap, double rolloff) {
    if (subcarriers < 2 || (subcarriers & (subcarriers - 1)) != 0) {
        throw std::invalid_argument("number of subcarriers must be a power of two >= 2");
    }
    if (overlap < 1) throw std::invalid_argument("overlapping factor must be >= 1");
    if (!(rolloff > 0.0 && rolloff <= 1.0)) throw std::invalid_argument("roll-off must lie in (0, 1]");

    const std::size_t length = overlap * subcarriers + 1;
    const double centre = 0.5 * static_cast<double>(length - 1);
    std::vector<double> taps(length);
    for (std::size_t r = 0; r < length; ++r) {
        taps[r] = rrc((static_cast<double>(r) - centre) / static_cast<double>(subcarriers), rolloff);
    }
    // exact symmetry, then unit energy
    for (std::size_t r = 0; r < length / 2; ++r) taps[length - 1 - r] = taps[r];
    const double norm = std::sqrt(std::inner_product(taps.begin(), taps.end(), taps.begin(), 0.0));
    for (auto& t : taps) t /= norm;
    return PrototypeFilter(subcarriers, overlap, std::move(taps));
}

double PrototypeFilter::energy() const noexcept {
    return std::inner_product(taps_.begin(), taps_.end(), taps_.begin(), 0.0);
}

void PrototypeFilter::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out.precision(17);
    for (double t : taps_) out << t << '\n';
}

std::vector<cplx> modulated_filter(const PrototypeFilter& prototype, std::size_t k) {
    const std::size_t m = prototype.subcarriers();
    if (k >= m) throw std::out_of_range("subcarrier index out of range");
    const std::size_t length = prototype.length();
    const double centre = 0.5 * static_cast<double>(length - 1);
    std::vector<cplx> h(length);
    for (std::size_t r = 0; r < length; ++r) {
        // reduce k*(r - centre) mod M before scaling to keep the phase exact
        const double cycles = std::fmod(static_cast<double>(k) * (static_cast<double>(r) - centre), static_cast<double>(m));
        h[r] = prototype[r] * std::polar(1.0, 2.0 * kPi * cycles / static_cast<double>(m));
    }
    return h;
}

UsedBand UsedBand::centred(std::size_t total, std::size_t used) {
    if (used == 0 || used > total) throw std::invalid_argument("used subcarriers must lie in [1, M]");
    return {(total - used) / 2, used};
}

std::size_t synthesis_length(const PrototypeFilter& prototype, std::size_t half_symbols) noexcept {
    if (half_symbols == 0) return 0;
    return (half_symbols - 1) * prototype.hop() + prototype.length();
}

BasebandSignal sfb_synthesize_direct(const Eigen::MatrixXcd& inputs, std::size_t first_subcarrier,
                                     const PrototypeFilter& prototype) {
    const auto half_symbols = static_cast<std::size_t>(inputs.cols());
    BasebandSignal out(synthesis_length(prototype, half_symbols), cplx{});
    const std::size_t hop = prototype.hop();
    for (Eigen::Index row = 0; row < inputs.rows(); ++row) {
        const auto h = modulated_filter(prototype, first_subcarrier + static_cast<std::size_t>(row));
        for (std::size_t n = 0; n < half_symbols; ++n) {
            const cplx x = inputs(row, static_cast<Eigen::Index>(n));
            if (x == cplx{}) continue;
            for (std::size_t q = 0; q < h.size(); ++q) out[n * hop + q] += x * h[q];
        }
    }
    return out;
}

// Uses h_k[r - n M/2] = h_p[r - n M/2] (-1)^{kn} e^{-j 2 pi k D / M} e^{j 2 pi k r / M}:
// one inverse DFT per half-symbol followed by a weighted overlap-add.
BasebandSignal sfb_synthesize(const Eigen::MatrixXcd& inputs, std::size_t first_subcarrier,
                              const PrototypeFilter& prototype) {
    const std::size_t m = prototype.subcarriers();
    const std::size_t hop = prototype.hop();
    const auto half_symbols = static_cast<std::size_t>(inputs.cols());
    BasebandSignal out(synthesis_length(prototype, half_symbols), cplx{});
    if (first_subcarrier + static_cast<std::size_t>(inputs.rows()) > m) {
        throw std::out_of_range("synthesis inputs exceed the bank size");
    }

    std::vector<cplx> centre(static_cast<std::size_t>(inputs.rows()));
    for (std::size_t i = 0; i < centre.size(); ++i) centre[i] = centre_phase(prototype, first_subcarrier + i);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> spectrum(m);
    std::vector<cplx> branch(m);
    const auto taps = prototype.taps();
    for (std::size_t n = 0; n < half_symbols; ++n) {
        std::fill(spectrum.begin(), spectrum.end(), cplx{});
        for (std::size_t i = 0; i < centre.size(); ++i) {
            const std::size_t k = first_subcarrier + i;
            const double sign = ((k * n) & 1) ? -1.0 : 1.0;
            spectrum[k] = inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) * centre[i] * sign;
        }
        fft.inv(branch, spectrum);
        const std::size_t start = n * hop;
        for (std::size_t q = 0; q < taps.size(); ++q) {
            const std::size_t r = start + q;
            out[r] += taps[q] * branch[r % m];
        }
    }
    return out;
}

Eigen::MatrixXcd phase_rotated(const RealSymbolStream& streams) {
    Eigen::MatrixXcd x(streams.values.rows(), streams.values.cols());
    for (Eigen::Index row = 0; row < x.rows(); ++row) {
        const std::size_t k = streams.first_subcarrier + static_cast<std::size_t>(row);
        for (Eigen::Index n = 0; n < x.cols(); ++n) x(row, n) = slot_phase(k, n) * streams.values(row, n);
    }
    return x;
}

BasebandSignal sfb_synthesize(const RealSymbolStream& streams, const PrototypeFilter& prototype) {
    return sfb_synthesize(phase_rotated(streams), streams.first_subcarrier, prototype);
}

Eigen::MatrixXcd afb_analyze_direct(std::span<const cplx> signal, const PrototypeFilter& prototype,
                                    UsedBand band, std::size_t outputs) {
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(band.count), static_cast<Eigen::Index>(outputs));
    const std::size_t hop = prototype.hop();
    for (std::size_t i = 0; i < band.count; ++i) {
        const auto h = modulated_filter(prototype, band.first + i);
        for (std::size_t n = 0; n < outputs; ++n) {
            const std::size_t r = n * hop;
            cplx acc{};
            for (std::size_t q = 0; q < h.size() && q <= r; ++q) {
                if (r - q < signal.size()) acc += h[q] * signal[r - q];
            }
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = acc;
        }
    }
    return y;
}

// y_k[n] = e^{-j 2 pi k D / M} sum_p W_n[p] e^{j 2 pi k p / M}, with W_n the
// prototype-weighted input window folded modulo M.
Eigen::MatrixXcd afb_analyze(std::span<const cplx> signal, const PrototypeFilter& prototype, UsedBand band,
                             std::size_t outputs) {
    const std::size_t m = prototype.subcarriers();
    const std::size_t hop = prototype.hop();
    if (band.first + band.count > m) throw std::out_of_range("analysis band exceeds the bank size");
    Eigen::MatrixXcd y(static_cast<Eigen::Index>(band.count), static_cast<Eigen::Index>(outputs));

    std::vector<cplx> centre(band.count);
    for (std::size_t i = 0; i < band.count; ++i) centre[i] = centre_phase(prototype, band.first + i);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> folded(m);
    std::vector<cplx> bins(m);
    const auto taps = prototype.taps();
    for (std::size_t n = 0; n < outputs; ++n) {
        std::fill(folded.begin(), folded.end(), cplx{});
        const std::size_t r = n * hop;
        const std::size_t q_end = std::min(taps.size(), r + 1);
        for (std::size_t q = 0; q < q_end; ++q) {
            const std::size_t idx = r - q;
            if (idx < signal.size()) folded[q % m] += taps[q] * signal[idx];
        }
        fft.inv(bins, folded);
        for (std::size_t i = 0; i < band.count; ++i) {
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = centre[i] * bins[band.first + i];
        }
    }
    return y;
}

}  // namespace fbmc
