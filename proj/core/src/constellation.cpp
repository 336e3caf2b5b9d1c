#include "fbmc/constellation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmc {

namespace {

std::uint32_t gray_to_binary(std::uint32_t g) {
    std::uint32_t b = g;
    for (std::uint32_t shift = 1; shift < 32; shift <<= 1) b ^= b >> shift;
    return b;
}

}  // namespace

Constellation::Constellation(int order) : order_(order) {
    if (order < 4 || (order & (order - 1)) != 0) {
        throw std::invalid_argument("QAM order must be a power of 4, got " + std::to_string(order));
    }
    int bits = 0;
    while ((1 << bits) < order) ++bits;
    if (bits % 2 != 0) {
        throw std::invalid_argument("QAM order must be a power of 4, got " + std::to_string(order));
    }
    bits_per_axis_ = bits / 2;
    levels_ = 1 << bits_per_axis_;
    // E|d|^2 = 2 (L^2 - 1) / 3 for unit-spaced odd levels.
    scale_ = 1.0 / std::sqrt(2.0 * (static_cast<double>(order) - 1.0) / 3.0);
}

double Constellation::axis_amplitude(std::uint32_t gray_label) const {
    if (gray_label >= static_cast<std::uint32_t>(levels_)) {
        throw std::out_of_range("axis label out of range");
    }
    const auto index = static_cast<int>(gray_to_binary(gray_label));
    return (2.0 * index - (levels_ - 1)) * scale_;
}

std::uint32_t Constellation::axis_label(int level_index) const noexcept {
    const auto i = static_cast<std::uint32_t>(level_index);
    return i ^ (i >> 1);
}

int Constellation::slice_axis_index(double value) const noexcept {
    // position in units of the level grid, 0 .. levels-1
    const double pos = (value / scale_ + (levels_ - 1)) / 2.0;
    if (!(pos > 0.0)) return 0;
    if (pos >= levels_ - 1) return levels_ - 1;
    const double lower = std::floor(pos);
    const auto lo = static_cast<int>(lower);
    const double frac = pos - lower;
    if (frac < 0.5) return lo;
    if (frac > 0.5) return lo + 1;
    return axis_label(lo) < axis_label(lo + 1) ? lo : lo + 1;
}

double Constellation::slice_axis(double value) const noexcept {
    return (2.0 * slice_axis_index(value) - (levels_ - 1)) * scale_;
}

std::complex<double> Constellation::map(std::uint32_t symbol_bits) const {
    const std::uint32_t mask = (1u << bits_per_axis_) - 1u;
    const std::uint32_t i_bits = (symbol_bits >> bits_per_axis_) & mask;
    const std::uint32_t q_bits = symbol_bits & mask;
    return {axis_amplitude(i_bits), axis_amplitude(q_bits)};
}

std::uint32_t Constellation::demap(std::complex<double> point) const noexcept {
    return (demap_axis(point.real()) << bits_per_axis_) | demap_axis(point.imag());
}

std::complex<double> Constellation::slice(std::complex<double> point) const noexcept {
    return {slice_axis(point.real()), slice_axis(point.imag())};
}

}  // namespace fbmc
