#include "fbmc/system_matrices.hpp"

#include <stdexcept>
#include <string>

namespace fbmc {

Eigen::MatrixXcd convolution_matrix(std::span<const cplx> g, std::size_t rows) {
    if (g.empty()) throw std::invalid_argument("convolution_matrix: empty filter");
    if (rows == 0) throw std::invalid_argument("convolution_matrix: need at least one row");
    const auto r = static_cast<Eigen::Index>(rows);
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(r, n + r - 1);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) c(i, i + j) = g[static_cast<std::size_t>(j)];
    }
    return c;
}

Eigen::MatrixXd stack_real_imag(const Eigen::MatrixXcd& h) {
    Eigen::MatrixXd out(2 * h.rows(), h.cols());
    out.topRows(h.rows()) = h.real();
    out.bottomRows(h.rows()) = h.imag();
    return out;
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& h, std::size_t k, std::ptrdiff_t n) {
    Eigen::MatrixXcd rotated = h;
    for (Eigen::Index c = 0; c < h.cols(); ++c) rotated.col(c) *= slot_phase(k, n - c);
    return stack_real_imag(rotated);
}

Eigen::MatrixXcd noise_filter_matrix(std::span<const cplx> h_k, std::size_t rows, std::size_t hop) {
    const auto width = static_cast<Eigen::Index>((rows - 1) * hop + h_k.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows), width);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t q = 0; q < h_k.size(); ++q) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i * hop + q)) = h_k[q];
        }
    }
    return m;
}

Eigen::MatrixXd build_gamma(const Eigen::MatrixXcd& noise_matrix) {
    const auto r = noise_matrix.rows();
    const auto c = noise_matrix.cols();
    Eigen::MatrixXd g(2 * r, 2 * c);
    g.topLeftCorner(r, c) = noise_matrix.real();
    g.topRightCorner(r, c) = -noise_matrix.imag();
    g.bottomLeftCorner(r, c) = noise_matrix.imag();
    g.bottomRightCorner(r, c) = noise_matrix.real();
    return g;
}

SubcarrierModel make_subcarrier_model(std::size_t k, std::size_t ff_taps, const SubchannelResponse& own,
                                      const SubchannelResponse* prev, const SubchannelResponse* next,
                                      const Eigen::MatrixXcd& noise_matrix) {
    if (noise_matrix.rows() != static_cast<Eigen::Index>(ff_taps)) {
        throw std::invalid_argument("noise matrix must have one row per feed-forward tap");
    }
    SubcarrierModel model;
    model.k = k;
    model.ff_taps = ff_taps;
    model.response_taps = own.taps.size();
    const std::ptrdiff_t n = design_time(k);
    const auto rows = static_cast<Eigen::Index>(2 * ff_taps);
    const auto cols = static_cast<Eigen::Index>(own.taps.size() + ff_taps - 1);

    auto realified = [&](const SubchannelResponse* resp) -> Eigen::MatrixXd {
        if (resp == nullptr) return Eigen::MatrixXd::Zero(rows, cols);
        if (resp->taps.size() != own.taps.size()) throw std::invalid_argument("subchannel responses differ in length");
        // columns carry the transmitting subcarrier's phase pattern
        return realify(convolution_matrix(resp->taps, ff_taps), resp->from, n);
    };
    model.h_own = realified(&own);
    model.h_prev = realified(prev);
    model.h_next = realified(next);
    model.gamma = build_gamma(noise_matrix);
    model.noise_gram = model.gamma * model.gamma.transpose();
    model.signal_gram = model.h_own * model.h_own.transpose() + model.h_prev * model.h_prev.transpose() +
                        model.h_next * model.h_next.transpose();
    return model;
}

SubcarrierModel build_subcarrier_model(const PrototypeFilter& prototype, const ChannelRealization& channel,
                                       UsedBand band, std::size_t k, std::size_t ff_taps) {
    if (!band.contains(k)) throw std::out_of_range("subcarrier " + std::to_string(k) + " is not in the used band");
    const auto own = total_subchannel_response(prototype, k, k, channel);
    std::unique_ptr<SubchannelResponse> prev;
    std::unique_ptr<SubchannelResponse> next;
    if (k > band.first) prev = std::make_unique<SubchannelResponse>(total_subchannel_response(prototype, k - 1, k, channel));
    if (k < band.last()) next = std::make_unique<SubchannelResponse>(total_subchannel_response(prototype, k + 1, k, channel));
    const auto h_k = modulated_filter(prototype, k);
    return make_subcarrier_model(k, ff_taps, own, prev.get(), next.get(),
                                 noise_filter_matrix(h_k, ff_taps, prototype.hop()));
}

Eigen::MatrixXd SubchannelMatrixSet::xi() const {
    const auto& g = model->gamma;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(g.rows() + static_cast<Eigen::Index>(dims.fb_taps), g.cols());
    x.topRows(g.rows()) = g;
    return x;
}

Eigen::MatrixXd SubchannelMatrixSet::xi_gram() const {
    const auto ff = static_cast<Eigen::Index>(2 * dims.ff_taps);
    const auto total = ff + static_cast<Eigen::Index>(dims.fb_taps);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(total, total);
    g.topLeftCorner(ff, ff) = model->noise_gram;
    return g;
}

Eigen::MatrixXd upsilon(const EqualizerDims& dims) {
    const auto window = static_cast<Eigen::Index>(dims.window());
    const auto lb = static_cast<Eigen::Index>(dims.fb_taps);
    const auto lead = static_cast<Eigen::Index>(dims.latency + 1);
    const auto tail = static_cast<Eigen::Index>(dims.tail());
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(window, lb);
    if (lb == 0) return u;
    if (tail >= lb) {
        // L > L_b and L = L_b: [0_{(nu+1) x L_b}; I_{L_b}; 0_{(L - L_b) x L_b}]
        u.block(lead, 0, lb, lb).setIdentity();
    } else if (tail > 0) {
        // L < L_b: [0_{(nu+1) x L_b}; I_L 0_{L x (L_b - L)}]
        u.block(lead, 0, tail, tail).setIdentity();
    }
    return u;
}

SubchannelMatrixSet assemble(std::shared_ptr<const SubcarrierModel> model, std::size_t fb_taps,
                             std::size_t latency, double signal_variance) {
    EqualizerDims dims{model->ff_taps, fb_taps, model->response_taps, latency};
    if (latency > dims.max_latency()) {
        throw std::out_of_range("latency " + std::to_string(latency) + " exceeds N + L_f - 2 = " +
                                std::to_string(dims.max_latency()));
    }
    const auto ff = static_cast<Eigen::Index>(2 * dims.ff_taps);
    const auto lb = static_cast<Eigen::Index>(fb_taps);
    const auto window = static_cast<Eigen::Index>(dims.window());

    SubchannelMatrixSet set;
    set.dims = dims;
    set.signal_variance = signal_variance;

    set.a = Eigen::MatrixXd::Zero(ff + lb, window + lb);
    set.a.topLeftCorner(ff, window) = model->h_own;
    set.a.bottomRightCorner(lb, lb) = -Eigen::MatrixXd::Identity(lb, lb);

    set.b = Eigen::MatrixXd::Zero(ff + lb, 2 * window);
    set.b.topLeftCorner(ff, window) = model->h_prev;
    set.b.block(0, window, ff, window) = model->h_next;

    const Eigen::MatrixXd ups = upsilon(dims);
    set.psi = Eigen::MatrixXd::Identity(window + lb, window + lb);
    set.psi.topRightCorner(window, lb) = ups;
    set.psi.bottomLeftCorner(lb, window) = ups.transpose();
    set.psi *= signal_variance;

    set.model = std::move(model);
    return set;
}

}  // namespace fbmc
