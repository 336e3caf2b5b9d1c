#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmc/oqam.hpp"

namespace fbmc {

using cplx = std::complex<double>;
using BasebandSignal = std::vector<cplx>;

/// Real symmetric lowpass prototype h_p of length K*M + 1, scaled to unit energy.
class PrototypeFilter {
public:
    /// Root-raised-cosine sampled at symbol spacing M and truncated
    /// symmetrically to K*M + 1 taps.
    static PrototypeFilter root_raised_cosine(std::size_t subcarriers, std::size_t overlap, double rolloff);

    std::size_t subcarriers() const noexcept { return subcarriers_; }
    std::size_t overlap() const noexcept { return overlap_; }
    std::size_t length() const noexcept { return taps_.size(); }
    /// Half-symbol hop in samples, M/2.
    std::size_t hop() const noexcept { return subcarriers_ / 2; }
    std::span<const double> taps() const noexcept { return taps_; }
    double operator[](std::size_t r) const noexcept { return taps_[r]; }
    double energy() const noexcept;

    void write_csv(const std::filesystem::path& path) const;

private:
    PrototypeFilter(std::size_t m, std::size_t k, std::vector<double> taps)
        : subcarriers_(m), overlap_(k), taps_(std::move(taps)) {}

    std::size_t subcarriers_;
    std::size_t overlap_;
    std::vector<double> taps_;
};

/// h_k[r] = h_p[r] exp(j 2 pi k (r - (L_p - 1)/2) / M).
std::vector<cplx> modulated_filter(const PrototypeFilter& prototype, std::size_t k);

/// Contiguous block of active subcarriers, absolute indices [first, first + count).
struct UsedBand {
    std::size_t first = 0;
    std::size_t count = 0;

    std::size_t last() const noexcept { return first + count - 1; }
    bool contains(std::size_t k) const noexcept { return k >= first && k < first + count; }

    /// Centred block of `used` out of `total` subcarriers.
    static UsedBand centred(std::size_t total, std::size_t used);
};

/// Samples produced by the synthesis bank for `half_symbols` inputs per subcarrier.
std::size_t synthesis_length(const PrototypeFilter& prototype, std::size_t half_symbols) noexcept;

// Synthesis: t[r] = sum_k sum_n x_k[n] h_k[r - n M/2]. The complex inputs are
// already phase-rotated (x_k[n] = J_{k,n} x'_k[n] or a precoded sequence); row
// i of `inputs` feeds subcarrier first_subcarrier + i.
BasebandSignal sfb_synthesize_direct(const Eigen::MatrixXcd& inputs, std::size_t first_subcarrier,
                                     const PrototypeFilter& prototype);
BasebandSignal sfb_synthesize(const Eigen::MatrixXcd& inputs, std::size_t first_subcarrier,
                              const PrototypeFilter& prototype);

/// Staggered real streams: applies J_{k,n} and runs the polyphase bank.
BasebandSignal sfb_synthesize(const RealSymbolStream& streams, const PrototypeFilter& prototype);
/// Complex OQAM inputs x_k[n] = J_{k,n} x'_k[n] for every stream entry.
Eigen::MatrixXcd phase_rotated(const RealSymbolStream& streams);

// Analysis: y_k[n] = sum_q h_k[q] s[n M/2 - q] for n = 0 .. outputs-1, one row
// per subcarrier of `band`.
Eigen::MatrixXcd afb_analyze_direct(std::span<const cplx> signal, const PrototypeFilter& prototype,
                                    UsedBand band, std::size_t outputs);
Eigen::MatrixXcd afb_analyze(std::span<const cplx> signal, const PrototypeFilter& prototype, UsedBand band,
                             std::size_t outputs);

}  // namespace fbmc
