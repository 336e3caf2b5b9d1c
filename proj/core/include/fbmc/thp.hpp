#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmc/equalizer.hpp"
#include "fbmc/oqam.hpp"
#include "fbmc/system_matrices.hpp"

namespace fbmc {

/// x - floor(x / tau + 1/2) tau, in [-tau/2, tau/2).
double modulo_reduce(double x, double tau) noexcept;

/// OQAM modulo of subcarrier l at time n: the real part is reduced when l + n
/// is odd, the imaginary part otherwise; the other component is discarded.
std::complex<double> oqam_modulo(std::complex<double> x, std::size_t l, std::ptrdiff_t n, double tau) noexcept;

/// Downlink precoder of one subcarrier: transmit filter f_1 (stacked real,
/// 2 L_f), THP feedback taps, receive scalar f_2 = 1 / scaling.
struct DlFilter {
    std::size_t k = 0;
    Eigen::VectorXd ff;
    Eigen::VectorXd fb;
    double rx_gain = 1.0;
    double scaling = 1.0;  // gamma or gamma_k
    std::size_t latency = 0;
    double mse = 0.0;

    /// Complex transmit taps c_i = ff[i] - j ff[L_f + i] applied as a plain
    /// convolution to the phase-rotated half-symbols.
    std::vector<std::complex<double>> taps() const;
};

struct DlFilterSet {
    std::vector<DlFilter> filters;  // one per used subcarrier, ascending k
    double tau = 0.0;
    double transmit_variance = 0.5;  // sigma_v^2
    bool modulo = true;
    /// sum_k ||f_1,k||^2
    double transmit_power = 0.0;
    /// transmit_power <= M_u (1 + 1e-9)
    bool power_within_budget = true;
};

/// sigma_v^2 = tau^2 / 12.
constexpr double modulo_variance(double tau) noexcept { return tau * tau / 12.0; }

struct PrecodedStream {
    std::vector<double> v;                   // v'_l[m], post-modulo
    std::vector<double> offset;              // a_l[m], multiples of tau
    std::vector<std::complex<double>> tx;    // f_1 * (J v'), length count + L_f - 1
};

/// THP loop of subcarrier `filter.k`: v'[m] = M(x'[m] - sum_i b_i v'[m - i]),
/// then the transmit filter. Feedback taps follow the receiver parity at
/// time m + nu (see feedback_sign). Without modulo this is a linear precoder.
PrecodedStream thp_precode(std::span<const double> symbols, const DlFilter& filter, bool modulo, double tau);

/// Precodes every row of `streams`; the result feeds sfb_synthesize.
Eigen::MatrixXcd thp_precode(const RealSymbolStream& streams, const DlFilterSet& set,
                             std::vector<PrecodedStream>* detail = nullptr);

/// Receiver of subcarrier k: scalar gain, parity rotation, then the modulo.
/// Returns estimates of x'_k[m] (modulo-reduced when enabled) for m < count.
std::vector<double> dl_receive(std::span<const std::complex<double>> received, const DlFilter& filter,
                               std::size_t count, bool modulo, double tau);

/// Same as dl_receive but without the final modulo; compare against x' + a.
std::vector<double> dl_receive_unwrapped(std::span<const std::complex<double>> received, const DlFilter& filter,
                                         std::size_t count);

/// Downlink MSE of receive subcarrier k. `prev` / `next` are the neighbours'
/// precoders (null where nothing is transmitted).
double dl_mse(const SubchannelMatrixSet& set, const DlFilter* prev, const DlFilter& own, const DlFilter* next,
              double transmit_variance, double noise_variance, double prototype_energy);

/// Inputs shared by both duality transforms; sets[i] and ul[i] describe the
/// i-th used subcarrier.
struct DualityProblem {
    std::span<const SubchannelMatrixSet> sets;
    std::span<const UlFilter> ul;
    double signal_variance = 0.5;    // sigma_x^2
    double transmit_variance = 0.5;  // sigma_v^2
    double noise_variance = 0.0;     // sigma_eta^2
    double prototype_energy = 1.0;   // ||h_p||^2
};

/// delta of the sum-MSE transform; gamma^2 = M_u sigma_eta^2/2 ||h_p||^2 / delta.
double sum_mse_delta(const DualityProblem& problem);

/// One scaling for all subcarriers, keeping sum_k eps_DL = sum_k eps_UL.
DlFilterSet sum_mse_duality(const DualityProblem& problem);

/// Tridiagonal system T gamma^2 = sigma_eta^2/2 ||h_p||^2 1 of the
/// per-subcarrier transform, with the diagonal obtained by collecting the
/// gamma_k^2 terms of eps_DL,k = eps_UL,k.
Eigen::MatrixXd sc_mse_system(const DualityProblem& problem);

/// Thomas algorithm; throws on a zero pivot.
Eigen::VectorXd solve_tridiagonal(const Eigen::MatrixXd& t, const Eigen::VectorXd& rhs);

/// One scaling per subcarrier, keeping eps_DL,k = eps_UL,k for every k.
DlFilterSet sc_mse_duality(const DualityProblem& problem);

/// Recomputes mse and transmit-power bookkeeping of `set` from its filters.
void evaluate_downlink(DlFilterSet& set, const DualityProblem& problem);

}  // namespace fbmc
