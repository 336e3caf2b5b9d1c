#pragma once

#include <complex>
#include <cstdint>

namespace fbmc {

/// Square Gray-mapped Q-QAM with unit average complex symbol energy.
///
/// Each axis is an independent sqrt(Q)-PAM. Axis bits are read MSB first;
/// the first half of a symbol's bits drives the in-phase axis. Level index i
/// (0 = most negative) carries the Gray label i ^ (i >> 1), so the all-zero
/// label is the most negative amplitude on both axes.
class Constellation {
public:
    explicit Constellation(int order);

    int order() const noexcept { return order_; }
    int bits_per_symbol() const noexcept { return 2 * bits_per_axis_; }
    int bits_per_axis() const noexcept { return bits_per_axis_; }
    int levels_per_axis() const noexcept { return levels_; }

    /// Distance between neighbouring PAM levels.
    double spacing() const noexcept { return 2.0 * scale_; }

    /// Variance of one real axis (half the complex symbol energy).
    double axis_variance() const noexcept { return 0.5; }

    /// THP modulo width: levels_per_axis * spacing. Gives 8/sqrt(10) for 16-QAM.
    double modulo_constant() const noexcept { return levels_ * spacing(); }

    double axis_amplitude(std::uint32_t gray_label) const;
    std::uint32_t axis_label(int level_index) const noexcept;

    /// Nearest level index. Exact midpoints go to the neighbour whose Gray
    /// label is numerically smaller.
    int slice_axis_index(double value) const noexcept;
    double slice_axis(double value) const noexcept;
    std::uint32_t demap_axis(double value) const noexcept { return axis_label(slice_axis_index(value)); }

    std::complex<double> map(std::uint32_t symbol_bits) const;
    std::uint32_t demap(std::complex<double> point) const noexcept;
    std::complex<double> slice(std::complex<double> point) const noexcept;

private:
    int order_;
    int bits_per_axis_;
    int levels_;
    double scale_;
};

}  // namespace fbmc
