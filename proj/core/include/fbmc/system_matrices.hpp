#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "fbmc/channel.hpp"
#include "fbmc/filter_bank.hpp"

namespace fbmc {

/// Filter and window sizes of one per-subcarrier design.
struct EqualizerDims {
    std::size_t ff_taps = 7;        // L_f
    std::size_t fb_taps = 4;        // L_b
    std::size_t response_taps = 1;  // N
    std::size_t latency = 0;        // nu, in half-symbols

    /// Length of the x'_k window seen by the feed-forward filter, N + L_f - 1.
    std::size_t window() const noexcept { return response_taps + ff_taps - 1; }
    /// Window positions after the target, L = L_f + N - nu - 2.
    std::ptrdiff_t tail() const noexcept {
        return static_cast<std::ptrdiff_t>(window()) - static_cast<std::ptrdiff_t>(latency) - 1;
    }
    std::size_t max_latency() const noexcept { return window() - 1; }
};

/// Row i holds g shifted right by i: (C x)[i] = sum_j g[j] x[i + j]. With x
/// holding x'[n], x'[n-1], ... this yields the filtered outputs y[n - i].
Eigen::MatrixXcd convolution_matrix(std::span<const cplx> g, std::size_t rows);

/// [Re(H); Im(H)].
Eigen::MatrixXd stack_real_imag(const Eigen::MatrixXcd& h);

/// [Re(H J_{k,n}); Im(H J_{k,n})]: column c is rotated by the phase of
/// subcarrier k's half-symbol at time n - c.
Eigen::MatrixXd realify(const Eigen::MatrixXcd& h, std::size_t k, std::ptrdiff_t n);

/// Noise path of receive subcarrier k: row i is h_k advanced by i M/2, so
/// that row i applied to eta[n M/2 - c] (c = 0, 1, ...) gives the filtered noise
/// at output n - i. Shape rows x ((rows - 1) M/2 + L_p).
Eigen::MatrixXcd noise_filter_matrix(std::span<const cplx> h_k, std::size_t rows, std::size_t hop);

/// [[Re H, -Im H], [Im H, Re H]].
Eigen::MatrixXd build_gamma(const Eigen::MatrixXcd& noise_matrix);

/// Output time of subcarrier k used for every design: the first real slot.
constexpr std::ptrdiff_t design_time(std::size_t k) noexcept { return static_cast<std::ptrdiff_t>((k + 1) & 1); }

/// Latency-independent part of subcarrier k's model: realified responses from
/// subcarriers k-1, k, k+1 (zero when the neighbour is not transmitting) and
/// the noise matrix.
struct SubcarrierModel {
    std::size_t k = 0;
    std::size_t ff_taps = 0;
    std::size_t response_taps = 0;
    Eigen::MatrixXd h_own;   // Hbar'_{k,k}
    Eigen::MatrixXd h_prev;  // Hbar'_{k-1,k}
    Eigen::MatrixXd h_next;  // Hbar'_{k+1,k}
    Eigen::MatrixXd gamma;
    Eigen::MatrixXd noise_gram;   // Gamma Gamma^T
    Eigen::MatrixXd signal_gram;  // sum_l Hbar'_{l,k} Hbar'^T_{l,k}
};

/// `prev` / `next` may be null at the edge of the used band.
SubcarrierModel make_subcarrier_model(std::size_t k, std::size_t ff_taps, const SubchannelResponse& own,
                                      const SubchannelResponse* prev, const SubchannelResponse* next,
                                      const Eigen::MatrixXcd& noise_matrix);

SubcarrierModel build_subcarrier_model(const PrototypeFilter& prototype, const ChannelRealization& channel,
                                       UsedBand band, std::size_t k, std::size_t ff_taps);

/// Stacked real system of one subcarrier at a given (L_b, nu).
struct SubchannelMatrixSet {
    std::shared_ptr<const SubcarrierModel> model;
    EqualizerDims dims;
    double signal_variance = 0.5;  // sigma_x^2 of one real half-symbol
    Eigen::MatrixXd a;    // A_k
    Eigen::MatrixXd b;    // B_k
    Eigen::MatrixXd psi;  // Psi

    std::size_t k() const noexcept { return model->k; }
    const Eigen::MatrixXd& h_own() const noexcept { return model->h_own; }
    const Eigen::MatrixXd& h_prev() const noexcept { return model->h_prev; }
    const Eigen::MatrixXd& h_next() const noexcept { return model->h_next; }
    const Eigen::MatrixXd& gamma() const noexcept { return model->gamma; }

    /// Xi_k = [Gamma_k; 0].
    Eigen::MatrixXd xi() const;
    /// Xi_k Xi_k^T without forming Xi_k.
    Eigen::MatrixXd xi_gram() const;
};

/// Overlap of the feedback window with the feed-forward window:
/// Upsilon(a, i) = 1 iff a == nu + 1 + i, via the three cases L > L_b, L = L_b, L < L_b.
Eigen::MatrixXd upsilon(const EqualizerDims& dims);

SubchannelMatrixSet assemble(std::shared_ptr<const SubcarrierModel> model, std::size_t fb_taps,
                             std::size_t latency, double signal_variance);

}  // namespace fbmc
