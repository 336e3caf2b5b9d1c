#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fbmc/channel.hpp"
#include "fbmc/filter_bank.hpp"
#include "fbmc/simulation.hpp"

namespace fbmc::testing {

inline std::vector<cplx> random_complex(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

inline Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = {g(rng), g(rng)};
    return m;
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return a.size() == b.size() ? m : 1e300;
}

// Plain O(n m) full convolution.
inline std::vector<cplx> convolve(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// Reduced link for end-to-end tests: M = 32 at 1.92 MHz keeps the desk
// subcarrier spacing; L_ch scaled accordingly.
inline SimConfig small_config() {
    SimConfig c;
    c.subcarriers = 32;
    c.used_subcarriers = 24;
    c.sample_rate_hz = 1.92e6;
    c.channel_length = 14;
    c.block_length = 200;
    c.channels = 3;
    c.ebn0_db = {10, 20};
    return c;
}

}  // namespace fbmc::testing
