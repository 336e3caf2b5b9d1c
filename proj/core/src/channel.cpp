#include "fbmc/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fbmc {

TapProfile TapProfile::bad_urban() {
    return {{0.0, 0.4, 1.0, 1.6, 5.0, 6.6}, {-3.0, 0.0, -3.0, -5.0, -2.0, -4.0}};
}

ChannelRealization ChannelRealization::identity(std::size_t length) {
    ChannelRealization ch;
    ch.taps.assign(std::max<std::size_t>(length, 1), cplx{});
    ch.taps[0] = 1.0;
    return ch;
}

void ChannelRealization::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out.precision(17);
    out << "index,re,im\n";
    for (std::size_t i = 0; i < taps.size(); ++i) out << i << ',' << taps[i].real() << ',' << taps[i].imag() << '\n';
}

ChannelRealization ChannelRealization::read_csv(const std::filesystem::path& path, double sample_rate_hz) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    ChannelRealization ch;
    ch.sample_rate_hz = sample_rate_hz;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string idx, re, im;
        std::getline(row, idx, ',');
        std::getline(row, re, ',');
        std::getline(row, im, ',');
        const auto i = std::stoul(idx);
        if (ch.taps.size() <= i) ch.taps.resize(i + 1);
        ch.taps[i] = {std::stod(re), std::stod(im)};
    }
    return ch;
}

ChannelRealization generate_channel(std::mt19937_64& rng, const TapProfile& profile, double sample_rate_hz,
                                    std::size_t length) {
    if (length < 1) throw std::invalid_argument("channel length must be >= 1");
    if (profile.delays_us.size() != profile.powers_db.size()) {
        throw std::invalid_argument("tap profile delays and powers differ in size");
    }
    ChannelRealization ch;
    ch.sample_rate_hz = sample_rate_hz;
    ch.taps.assign(length, cplx{});

    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < profile.delays_us.size(); ++i) {
        const double delay = std::round(profile.delays_us[i] * 1e-6 * sample_rate_hz);
        if (delay < 0.0 || delay >= static_cast<double>(length)) {
            throw std::invalid_argument("tap delay exceeds the channel length");
        }
        const double sigma = std::sqrt(0.5 * std::pow(10.0, profile.powers_db[i] / 10.0));
        const double re = gauss(rng);
        const double im = gauss(rng);
        ch.taps[static_cast<std::size_t>(delay)] += sigma * cplx{re, im};
    }
    double energy = 0.0;
    for (const auto& t : ch.taps) energy += std::norm(t);
    const double scale = 1.0 / std::sqrt(energy);
    for (auto& t : ch.taps) t *= scale;
    return ch;
}

BasebandSignal apply_channel(std::span<const cplx> signal, const ChannelRealization& channel, double noise_variance,
                             std::mt19937_64& rng, std::size_t output_length) {
    if (noise_variance < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    const std::size_t full = signal.empty() ? 0 : signal.size() + channel.taps.size() - 1;
    const std::size_t len = output_length == 0 ? full : output_length;
    BasebandSignal out(len, cplx{});

    std::vector<std::size_t> nonzero;
    for (std::size_t d = 0; d < channel.taps.size(); ++d) {
        if (channel.taps[d] != cplx{}) nonzero.push_back(d);
    }
    for (std::size_t i = 0; i < signal.size(); ++i) {
        for (const auto d : nonzero) {
            if (i + d < len) out[i + d] += signal[i] * channel.taps[d];
        }
    }
    if (noise_variance > 0.0) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * noise_variance));
        for (auto& s : out) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            s += cplx{re, im};
        }
    }
    return out;
}

std::size_t subchannel_length(const PrototypeFilter& prototype, std::size_t channel_length) noexcept {
    const std::size_t total = 2 * (prototype.length() - 1) + channel_length;
    const std::size_t hop = prototype.hop();
    return (total + hop - 1) / hop;
}

SubchannelResponse total_subchannel_response(const PrototypeFilter& prototype, std::size_t from, std::size_t to,
                                             const ChannelRealization& channel) {
    const auto gap = from > to ? from - to : to - from;
    if (gap > 1) throw std::invalid_argument("only adjacent subcarriers (|l - k| <= 1) are modelled");

    const auto h_tx = modulated_filter(prototype, from);
    const auto h_rx = modulated_filter(prototype, to);
    // h_ch * h_k first, then evaluate the outer convolution only at multiples of M/2
    std::vector<cplx> tail(channel.taps.size() + h_rx.size() - 1, cplx{});
    for (std::size_t i = 0; i < channel.taps.size(); ++i) {
        if (channel.taps[i] == cplx{}) continue;
        for (std::size_t j = 0; j < h_rx.size(); ++j) tail[i + j] += channel.taps[i] * h_rx[j];
    }
    const std::size_t n_taps = subchannel_length(prototype, channel.taps.size());
    const std::size_t hop = prototype.hop();
    SubchannelResponse resp{std::vector<cplx>(n_taps, cplx{}), from, to};
    for (std::size_t n = 0; n < n_taps; ++n) {
        const std::size_t r = n * hop;
        cplx acc{};
        for (std::size_t q = 0; q < h_tx.size() && q <= r; ++q) {
            if (r - q < tail.size()) acc += h_tx[q] * tail[r - q];
        }
        resp.taps[n] = acc;
    }
    return resp;
}

}  // namespace fbmc
