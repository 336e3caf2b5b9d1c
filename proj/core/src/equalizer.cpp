#include "fbmc/equalizer.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "fbmc/errors.hpp"
#include "fbmc/oqam.hpp"

namespace fbmc {

std::vector<std::complex<double>> UlFilter::taps() const {
    const auto lf = ff.size() / 2;
    std::vector<std::complex<double>> c(static_cast<std::size_t>(lf));
    for (Eigen::Index i = 0; i < lf; ++i) c[static_cast<std::size_t>(i)] = {ff(i), -ff(lf + i)};
    return c;
}

Eigen::VectorXd UlFilter::stacked() const {
    Eigen::VectorXd w(ff.size() + fb.size());
    w << ff, fb;
    return w;
}

NormalEquations normal_equations(const SubchannelMatrixSet& set, double noise_variance) {
    const Eigen::MatrixXd a_psi = set.a * set.psi;
    NormalEquations eq;
    eq.matrix = a_psi * set.a.transpose() + set.signal_variance * set.b * set.b.transpose() +
                0.5 * noise_variance * set.xi_gram();
    eq.rhs = a_psi.col(static_cast<Eigen::Index>(set.dims.latency));
    return eq;
}

UlFilter design_dfe(const SubchannelMatrixSet& set, double noise_variance) {
    if (noise_variance < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    const auto eq = normal_equations(set, noise_variance);
    Eigen::LLT<Eigen::MatrixXd> llt(eq.matrix);
    if (llt.info() != Eigen::Success) {
        throw SingularSystemError("MMSE normal equations of subcarrier " + std::to_string(set.k()) +
                                  " are not positive definite");
    }
    const Eigen::VectorXd w = llt.solve(eq.rhs);
    if (!w.allFinite()) {
        throw SingularSystemError("MMSE solution of subcarrier " + std::to_string(set.k()) + " is not finite");
    }
    UlFilter f;
    f.k = set.k();
    const auto ff = static_cast<Eigen::Index>(2 * set.dims.ff_taps);
    f.ff = w.head(ff);
    f.fb = w.tail(static_cast<Eigen::Index>(set.dims.fb_taps));
    f.latency = set.dims.latency;
    f.mse = ul_mse(set, f.ff, f.fb, noise_variance);
    return f;
}

UlFilter design_linear(const SubchannelMatrixSet& set, double noise_variance) {
    if (set.dims.fb_taps != 0) throw std::invalid_argument("linear design needs a set assembled with L_b = 0");
    return design_dfe(set, noise_variance);
}

Eigen::VectorXd target_vector(const EqualizerDims& dims, const Eigen::VectorXd& fb) {
    const auto span = std::max<std::size_t>(dims.window(), dims.latency + 1 + dims.fb_taps);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(span));
    r(static_cast<Eigen::Index>(dims.latency)) = 1.0;
    r.segment(static_cast<Eigen::Index>(dims.latency + 1), fb.size()) = fb;
    return r;
}

double ul_mse(const SubchannelMatrixSet& set, const Eigen::VectorXd& ff, const Eigen::VectorXd& fb,
              double noise_variance) {
    const auto& model = *set.model;
    const double sx = set.signal_variance;
    const Eigen::VectorXd r = target_vector(set.dims, fb);
    const Eigen::VectorXd r_window = r.head(static_cast<Eigen::Index>(set.dims.window()));
    const double quad = ff.dot((sx * model.signal_gram + 0.5 * noise_variance * model.noise_gram) * ff);
    return quad + sx * (r.squaredNorm() - 2.0 * ff.dot(model.h_own * r_window));
}

double ul_mse_quadratic(const SubchannelMatrixSet& set, const Eigen::VectorXd& w, double noise_variance) {
    const auto eq = normal_equations(set, noise_variance);
    return w.dot(eq.matrix * w) - 2.0 * w.dot(eq.rhs) + set.signal_variance;
}

std::size_t select_latency(const std::function<double(std::size_t)>& cost, std::size_t first, std::size_t last) {
    if (first > last) throw std::invalid_argument("empty latency range");
    std::size_t best = first;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t nu = first; nu <= last; ++nu) {
        const double c = cost(nu);
        if (c < best_cost) {
            best_cost = c;
            best = nu;
        }
    }
    return best;
}

std::complex<double> output_rotation(std::size_t k, std::ptrdiff_t n, std::size_t latency) noexcept {
    if (is_real_slot(k, n)) return {1.0, 0.0};
    // Re(-j s z) = s Im(z), s = (-1)^nu
    return {0.0, -alternating_sign(latency)};
}

double feedback_sign(std::size_t k, std::ptrdiff_t n, std::size_t tap) noexcept {
    return is_real_slot(k, n) ? 1.0 : alternating_sign(tap);
}

EqualizerOutput dfe_run(std::span<const std::complex<double>> received, const UlFilter& filter, std::size_t count,
                        const Constellation& constellation, FeedbackMode mode, std::span<const double> truth) {
    if (mode == FeedbackMode::genie && truth.size() < count) {
        throw std::invalid_argument("genie feedback needs the transmitted half-symbols");
    }
    const auto taps = filter.taps();
    const auto lb = static_cast<std::size_t>(filter.fb.size());
    EqualizerOutput out;
    out.soft.resize(count);
    out.decisions.resize(count);
    for (std::size_t m = 0; m < count; ++m) {
        const auto n = static_cast<std::ptrdiff_t>(m + filter.latency);
        std::complex<double> z{};
        for (std::size_t i = 0; i < taps.size(); ++i) {
            const std::ptrdiff_t t = n - static_cast<std::ptrdiff_t>(i);
            if (t >= 0 && static_cast<std::size_t>(t) < received.size()) z += taps[i] * received[static_cast<std::size_t>(t)];
        }
        double estimate = (output_rotation(filter.k, n, filter.latency) * z).real();
        for (std::size_t i = 1; i <= lb && i <= m; ++i) {
            const double past = mode == FeedbackMode::genie ? truth[m - i] : out.decisions[m - i];
            estimate -= feedback_sign(filter.k, n, i) * filter.fb(static_cast<Eigen::Index>(i - 1)) * past;
        }
        out.soft[m] = estimate;
        out.decisions[m] = constellation.slice_axis(estimate);
    }
    return out;
}

}  // namespace fbmc
