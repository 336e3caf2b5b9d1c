#include "fbmc/oqam.hpp"

#include <stdexcept>

namespace fbmc {

QamGrid qam_modulate(std::span<const std::uint8_t> bits, int order, std::size_t subcarriers,
                     std::size_t first_subcarrier) {
    const Constellation constellation(order);
    const auto bps = static_cast<std::size_t>(constellation.bits_per_symbol());
    if (subcarriers == 0 || bits.size() % (bps * subcarriers) != 0) {
        throw std::invalid_argument("bit count is not a multiple of subcarriers * log2(Q)");
    }
    const std::size_t slots = bits.size() / (bps * subcarriers);

    QamGrid grid;
    grid.order = order;
    grid.first_subcarrier = first_subcarrier;
    grid.symbols.resize(static_cast<Eigen::Index>(subcarriers), static_cast<Eigen::Index>(slots));
    std::size_t pos = 0;
    for (std::size_t k = 0; k < subcarriers; ++k) {
        for (std::size_t m = 0; m < slots; ++m) {
            std::uint32_t word = 0;
            for (std::size_t b = 0; b < bps; ++b) word = (word << 1) | (bits[pos++] & 1u);
            grid.symbols(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = constellation.map(word);
        }
    }
    return grid;
}

std::vector<std::uint8_t> qam_demodulate(const QamGrid& grid) {
    const Constellation constellation(grid.order);
    const auto bps = constellation.bits_per_symbol();
    std::vector<std::uint8_t> bits;
    bits.reserve(grid.subcarriers() * grid.slots() * static_cast<std::size_t>(bps));
    for (Eigen::Index k = 0; k < grid.symbols.rows(); ++k) {
        for (Eigen::Index m = 0; m < grid.symbols.cols(); ++m) {
            const std::uint32_t word = constellation.demap(grid.symbols(k, m));
            for (int b = bps - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((word >> b) & 1u));
        }
    }
    return bits;
}

RealSymbolStream oqam_stagger(const QamGrid& grid) {
    RealSymbolStream stream;
    stream.first_subcarrier = grid.first_subcarrier;
    stream.values.resize(grid.symbols.rows(), 2 * grid.symbols.cols());
    for (Eigen::Index row = 0; row < grid.symbols.rows(); ++row) {
        const std::size_t k = grid.first_subcarrier + static_cast<std::size_t>(row);
        for (Eigen::Index m = 0; m < grid.symbols.cols(); ++m) {
            const auto d = grid.symbols(row, m);
            // within the pair {2m, 2m+1} the real part sits on the real slot
            const bool first_is_real = is_real_slot(k, 2 * m);
            stream.values(row, 2 * m) = first_is_real ? d.real() : d.imag();
            stream.values(row, 2 * m + 1) = first_is_real ? d.imag() : d.real();
        }
    }
    return stream;
}

QamGrid oqam_destagger(const RealSymbolStream& stream, int order) {
    if (stream.values.cols() % 2 != 0) {
        throw std::invalid_argument("OQAM stream must hold an even number of half-symbols");
    }
    QamGrid grid;
    grid.order = order;
    grid.first_subcarrier = stream.first_subcarrier;
    grid.symbols.resize(stream.values.rows(), stream.values.cols() / 2);
    for (Eigen::Index row = 0; row < stream.values.rows(); ++row) {
        const std::size_t k = stream.first_subcarrier + static_cast<std::size_t>(row);
        for (Eigen::Index m = 0; m < grid.symbols.cols(); ++m) {
            const double a = stream.values(row, 2 * m);
            const double b = stream.values(row, 2 * m + 1);
            grid.symbols(row, m) = is_real_slot(k, 2 * m) ? std::complex<double>{a, b} : std::complex<double>{b, a};
        }
    }
    return grid;
}

std::vector<std::complex<double>> apply_phase(std::span<const double> segment, std::size_t k,
                                              std::ptrdiff_t n) {
    std::vector<std::complex<double>> out(segment.size());
    for (std::size_t i = 0; i < segment.size(); ++i) {
        out[i] = slot_phase(k, n - static_cast<std::ptrdiff_t>(i)) * segment[i];
    }
    return out;
}

QamGrid slice(const Eigen::MatrixXcd& estimates, int order, std::size_t first_subcarrier) {
    const Constellation constellation(order);
    QamGrid grid;
    grid.order = order;
    grid.first_subcarrier = first_subcarrier;
    grid.symbols = estimates.unaryExpr([&](std::complex<double> z) { return constellation.slice(z); });
    return grid;
}

}  // namespace fbmc
