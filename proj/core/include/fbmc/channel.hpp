#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "fbmc/filter_bank.hpp"

namespace fbmc {

/// Tapped-delay-line power profile.
struct TapProfile {
    std::vector<double> delays_us;
    std::vector<double> powers_db;

    /// COST 207 bad-urban 6-tap reference profile.
    static TapProfile bad_urban();
};

struct ChannelRealization {
    std::vector<cplx> taps;
    double sample_rate_hz = 0.0;

    std::size_t length() const noexcept { return taps.size(); }

    static ChannelRealization identity(std::size_t length = 1);
    void write_csv(const std::filesystem::path& path) const;
    static ChannelRealization read_csv(const std::filesystem::path& path, double sample_rate_hz);
};

/// Rayleigh taps drawn from `profile`, placed at the nearest sample delay and
/// renormalized to unit energy.
ChannelRealization generate_channel(std::mt19937_64& rng, const TapProfile& profile, double sample_rate_hz,
                                    std::size_t length);

inline ChannelRealization generate_bu_channel(std::mt19937_64& rng, double sample_rate_hz, std::size_t length) {
    return generate_channel(rng, TapProfile::bad_urban(), sample_rate_hz, length);
}

/// Convolution with the channel plus circular Gaussian noise of variance
/// `noise_variance` per complex sample. The output has `output_length`
/// samples (0 selects the full convolution length); the noise covers all of them.
BasebandSignal apply_channel(std::span<const cplx> signal, const ChannelRealization& channel, double noise_variance,
                             std::mt19937_64& rng, std::size_t output_length = 0);

/// Total response from transmit subcarrier l into receive subcarrier k,
/// h_{l,k}[n] = (h_l * h_ch * h_k)[n M/2], n = 0 .. N-1.
struct SubchannelResponse {
    std::vector<cplx> taps;
    std::size_t from = 0;
    std::size_t to = 0;
};

/// N = ceil((2 (L_p - 1) + L_ch) / (M / 2)).
std::size_t subchannel_length(const PrototypeFilter& prototype, std::size_t channel_length) noexcept;

/// Only |l - k| <= 1 is modelled.
SubchannelResponse total_subchannel_response(const PrototypeFilter& prototype, std::size_t from, std::size_t to,
                                             const ChannelRealization& channel);

}  // namespace fbmc
