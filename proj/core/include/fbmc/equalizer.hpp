#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmc/constellation.hpp"
#include "fbmc/system_matrices.hpp"

namespace fbmc {

/// Uplink DFE of one subcarrier. The transmit scalar is fixed to one.
///
/// `ff` holds the feed-forward filter in stacked real form [Re f; Im f]
/// (2 L_f entries); `fb` the real feedback taps b_1 .. b_{L_b}. A real-slot
/// estimate is ff^T Hbar' x' - fb^T (past decisions).
struct UlFilter {
    std::size_t k = 0;
    Eigen::VectorXd ff;
    Eigen::VectorXd fb;
    std::size_t latency = 0;
    double mse = 0.0;

    /// Complex taps c_i = ff[i] - j ff[L_f + i], so that the real-slot output
    /// is Re(sum_i c_i y[n - i]).
    std::vector<std::complex<double>> taps() const;
    Eigen::VectorXd stacked() const;
};

/// System matrix and right-hand side of the MMSE normal equations,
/// (A Psi A^T + sigma_x^2 B B^T + sigma_eta^2/2 Xi Xi^T) w = A Psi e_nu.
struct NormalEquations {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

NormalEquations normal_equations(const SubchannelMatrixSet& set, double noise_variance);

/// Solves the normal equations by Cholesky. Throws SingularSystemError when
/// the matrix is not numerically positive definite.
UlFilter design_dfe(const SubchannelMatrixSet& set, double noise_variance);

/// Linear equalizer, i.e. design_dfe on a set assembled with L_b = 0.
UlFilter design_linear(const SubchannelMatrixSet& set, double noise_variance);

/// e = [0_nu, 1, b^T] extended to cover both the window and the feedback span.
Eigen::VectorXd target_vector(const EqualizerDims& dims, const Eigen::VectorXd& fb);

/// Uplink MSE in feed-forward / feedback form:
/// f^T (sigma_x^2 sum_l Hbar Hbar^T + sigma_eta^2/2 Gamma Gamma^T) f + sigma_x^2 (r^T r - 2 f^T Hbar_kk r).
double ul_mse(const SubchannelMatrixSet& set, const Eigen::VectorXd& ff, const Eigen::VectorXd& fb,
              double noise_variance);

/// Uplink MSE as the quadratic form in w = [ff; fb] built from A, B, Xi, Psi.
double ul_mse_quadratic(const SubchannelMatrixSet& set, const Eigen::VectorXd& w, double noise_variance);

/// Smallest latency in [first, last] minimizing `cost`.
std::size_t select_latency(const std::function<double(std::size_t)>& cost, std::size_t first, std::size_t last);

enum class FeedbackMode { genie, decision };

struct EqualizerOutput {
    std::vector<double> soft;       // estimates of x'_k[m] before slicing
    std::vector<double> decisions;  // sliced half-symbols fed back
};

/// Runs the DFE on AFB output `received` of subcarrier k for half-symbols
/// m = 0 .. count-1, estimating x'_k[m] at output time m + nu. Real slots use
/// the designed filter directly; the other parity reads the imaginary part
/// with sign (-1)^nu and feedback taps (-1)^i b_i, which has the same error
/// statistics. Genie mode feeds back `truth` instead of decisions.
EqualizerOutput dfe_run(std::span<const std::complex<double>> received, const UlFilter& filter, std::size_t count,
                        const Constellation& constellation, FeedbackMode mode, std::span<const double> truth = {});

/// Phase applied before taking the real part of an output at time n, so that
/// Re(phase * z) is the estimate for either parity.
std::complex<double> output_rotation(std::size_t k, std::ptrdiff_t n, std::size_t latency) noexcept;

/// Feedback tap sign for output time n: 1 on real slots, (-1)^i otherwise.
double feedback_sign(std::size_t k, std::ptrdiff_t n, std::size_t tap) noexcept;

}  // namespace fbmc
