#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmc/constellation.hpp"

namespace fbmc {

/// Complex QAM symbols d_k[m]: one row per used subcarrier, one column per
/// symbol slot. Row 0 is absolute subcarrier `first_subcarrier` of the bank.
struct QamGrid {
    int order = 16;
    std::size_t first_subcarrier = 0;
    Eigen::MatrixXcd symbols;

    std::size_t subcarriers() const noexcept { return static_cast<std::size_t>(symbols.rows()); }
    std::size_t slots() const noexcept { return static_cast<std::size_t>(symbols.cols()); }
};

/// Real OQAM half-symbols x'_k[n] at twice the symbol rate. Time index n = 0
/// is even; parity is always taken against the absolute subcarrier index.
struct RealSymbolStream {
    std::size_t first_subcarrier = 0;
    Eigen::MatrixXd values;

    std::size_t subcarriers() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t length() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// True when the half-symbol of subcarrier k at time n carries a real part
/// (k + n odd). The other parity carries the imaginary part.
constexpr bool is_real_slot(std::size_t k, std::ptrdiff_t n) noexcept {
    return ((static_cast<std::ptrdiff_t>(k) + n) & 1) != 0;
}

/// Entry of J_{k,n} for the sample at time n: 1 for real slots, j otherwise.
inline std::complex<double> slot_phase(std::size_t k, std::ptrdiff_t n) noexcept {
    return is_real_slot(k, n) ? std::complex<double>{1.0, 0.0} : std::complex<double>{0.0, 1.0};
}

/// Sign mapping a half-symbol sequence on the real-slot design onto the other
/// parity: (-1)^offset. See equalizer.hpp for how it is used.
constexpr double alternating_sign(std::size_t offset) noexcept { return (offset & 1) ? -1.0 : 1.0; }

/// `bits` are consumed row by row (subcarrier-major), bits_per_symbol per slot.
QamGrid qam_modulate(std::span<const std::uint8_t> bits, int order, std::size_t subcarriers,
                     std::size_t first_subcarrier = 0);
std::vector<std::uint8_t> qam_demodulate(const QamGrid& grid);

RealSymbolStream oqam_stagger(const QamGrid& grid);
QamGrid oqam_destagger(const RealSymbolStream& stream, int order);

/// Multiplies segment[i] (time n - i) by J_{k,n}[i].
std::vector<std::complex<double>> apply_phase(std::span<const double> segment, std::size_t k,
                                              std::ptrdiff_t n);

/// Hard decision of every entry onto the constellation.
QamGrid slice(const Eigen::MatrixXcd& estimates, int order, std::size_t first_subcarrier = 0);

}  // namespace fbmc
