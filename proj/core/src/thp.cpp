#include "fbmc/thp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fbmc/errors.hpp"

namespace fbmc {

namespace {

// f^T H H^T f for a realified block.
double leak(const Eigen::MatrixXd& h, const Eigen::VectorXd& f) { return (h.transpose() * f).squaredNorm(); }

}  // namespace

double modulo_reduce(double x, double tau) noexcept { return x - std::floor(x / tau + 0.5) * tau; }

std::complex<double> oqam_modulo(std::complex<double> x, std::size_t l, std::ptrdiff_t n, double tau) noexcept {
    if (is_real_slot(l, n)) return {modulo_reduce(x.real(), tau), 0.0};
    return {0.0, modulo_reduce(x.imag(), tau)};
}

std::vector<std::complex<double>> DlFilter::taps() const {
    const auto lf = ff.size() / 2;
    std::vector<std::complex<double>> c(static_cast<std::size_t>(lf));
    for (Eigen::Index i = 0; i < lf; ++i) c[static_cast<std::size_t>(i)] = {ff(i), -ff(lf + i)};
    return c;
}

PrecodedStream thp_precode(std::span<const double> symbols, const DlFilter& filter, bool modulo, double tau) {
    const std::size_t count = symbols.size();
    const auto lb = static_cast<std::size_t>(filter.fb.size());
    PrecodedStream out;
    out.v.resize(count);
    out.offset.assign(count, 0.0);
    for (std::size_t m = 0; m < count; ++m) {
        const auto n = static_cast<std::ptrdiff_t>(m + filter.latency);
        double u = symbols[m];
        for (std::size_t i = 1; i <= lb && i <= m; ++i) {
            u -= feedback_sign(filter.k, n, i) * filter.fb(static_cast<Eigen::Index>(i - 1)) * out.v[m - i];
        }
        out.v[m] = modulo ? modulo_reduce(u, tau) : u;
        out.offset[m] = out.v[m] - u;
    }

    const auto taps = filter.taps();
    out.tx.assign(count + taps.size() - 1, {});
    for (std::size_t m = 0; m < count; ++m) {
        const auto x = slot_phase(filter.k, static_cast<std::ptrdiff_t>(m)) * out.v[m];
        for (std::size_t i = 0; i < taps.size(); ++i) out.tx[m + i] += taps[i] * x;
    }
    return out;
}

Eigen::MatrixXcd thp_precode(const RealSymbolStream& streams, const DlFilterSet& set,
                             std::vector<PrecodedStream>* detail) {
    if (set.filters.size() != streams.subcarriers()) {
        throw std::invalid_argument("one downlink filter per stream row is required");
    }
    std::size_t width = 0;
    std::vector<PrecodedStream> rows;
    rows.reserve(set.filters.size());
    for (std::size_t i = 0; i < set.filters.size(); ++i) {
        if (set.filters[i].k != streams.first_subcarrier + i) throw std::invalid_argument("filter/stream subcarrier mismatch");
        const Eigen::VectorXd row = streams.values.row(static_cast<Eigen::Index>(i)).transpose();
        rows.push_back(thp_precode(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                   set.filters[i], set.modulo, set.tau));
        width = std::max(width, rows.back().tx.size());
    }
    Eigen::MatrixXcd tx = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t p = 0; p < rows[i].tx.size(); ++p) {
            tx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = rows[i].tx[p];
        }
    }
    if (detail != nullptr) *detail = std::move(rows);
    return tx;
}

std::vector<double> dl_receive_unwrapped(std::span<const std::complex<double>> received, const DlFilter& filter,
                                         std::size_t count) {
    std::vector<double> out(count, 0.0);
    for (std::size_t m = 0; m < count; ++m) {
        const std::size_t n = m + filter.latency;
        if (n >= received.size()) break;
        const auto rot = output_rotation(filter.k, static_cast<std::ptrdiff_t>(n), filter.latency);
        out[m] = filter.rx_gain * (rot * received[n]).real();
    }
    return out;
}

std::vector<double> dl_receive(std::span<const std::complex<double>> received, const DlFilter& filter,
                               std::size_t count, bool modulo, double tau) {
    auto out = dl_receive_unwrapped(received, filter, count);
    if (modulo) {
        for (auto& x : out) x = modulo_reduce(x, tau);
    }
    return out;
}

double dl_mse(const SubchannelMatrixSet& set, const DlFilter* prev, const DlFilter& own, const DlFilter* next,
              double transmit_variance, double noise_variance, double prototype_energy) {
    const auto& model = *set.model;
    double received = leak(model.h_own, own.ff);
    if (prev != nullptr) received += leak(model.h_prev, prev->ff);
    if (next != nullptr) received += leak(model.h_next, next->ff);

    const Eigen::VectorXd s = target_vector(set.dims, own.fb);
    const Eigen::VectorXd s_window = s.head(static_cast<Eigen::Index>(set.dims.window()));
    const double g = own.rx_gain;
    return g * g * (transmit_variance * received + 0.5 * noise_variance * prototype_energy) +
           transmit_variance * (s.squaredNorm() - 2.0 * g * own.ff.dot(model.h_own * s_window));
}

namespace {

void check_problem(const DualityProblem& problem) {
    if (problem.sets.size() != problem.ul.size() || problem.sets.empty()) {
        throw std::invalid_argument("duality needs one matrix set per uplink filter");
    }
    for (std::size_t i = 1; i < problem.sets.size(); ++i) {
        if (problem.sets[i].k() != problem.sets[i - 1].k() + 1) {
            throw std::invalid_argument("duality expects contiguous subcarriers");
        }
    }
}

// r^T r - 2 f^T Hbar_kk r
double target_term(const SubchannelMatrixSet& set, const UlFilter& f) {
    const Eigen::VectorXd r = target_vector(set.dims, f.fb);
    const Eigen::VectorXd r_window = r.head(static_cast<Eigen::Index>(set.dims.window()));
    return r.squaredNorm() - 2.0 * f.ff.dot(set.h_own() * r_window);
}

DlFilterSet scaled_filters(const DualityProblem& problem, const Eigen::VectorXd& gamma_sq) {
    DlFilterSet set;
    set.transmit_variance = problem.transmit_variance;
    set.filters.reserve(problem.ul.size());
    for (std::size_t i = 0; i < problem.ul.size(); ++i) {
        const double gamma = std::sqrt(gamma_sq(static_cast<Eigen::Index>(i)));
        const auto& ul = problem.ul[i];
        DlFilter dl;
        dl.k = ul.k;
        dl.ff = gamma * ul.ff;
        dl.fb = ul.fb;
        dl.rx_gain = 1.0 / gamma;
        dl.scaling = gamma;
        dl.latency = ul.latency;
        set.filters.push_back(std::move(dl));
    }
    evaluate_downlink(set, problem);
    return set;
}

}  // namespace

void evaluate_downlink(DlFilterSet& set, const DualityProblem& problem) {
    const std::size_t count = set.filters.size();
    set.transmit_power = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const DlFilter* prev = i > 0 ? &set.filters[i - 1] : nullptr;
        const DlFilter* next = i + 1 < count ? &set.filters[i + 1] : nullptr;
        set.filters[i].mse = dl_mse(problem.sets[i], prev, set.filters[i], next, problem.transmit_variance,
                                    problem.noise_variance, problem.prototype_energy);
        set.transmit_power += set.filters[i].ff.squaredNorm();
    }
    set.power_within_budget = set.transmit_power <= static_cast<double>(count) * (1.0 + 1e-9);
}

double sum_mse_delta(const DualityProblem& problem) {
    check_problem(problem);
    const double sx = problem.signal_variance;
    const double sv = problem.transmit_variance;
    const std::size_t count = problem.sets.size();
    double delta = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& set = problem.sets[i];
        const auto& model = *set.model;
        const auto& f = problem.ul[i].ff;
        delta += f.dot((sx * model.signal_gram + 0.5 * problem.noise_variance * model.noise_gram) * f);
        double dl_leak = leak(model.h_own, f);
        if (i > 0) dl_leak += leak(model.h_prev, problem.ul[i - 1].ff);
        if (i + 1 < count) dl_leak += leak(model.h_next, problem.ul[i + 1].ff);
        delta -= sv * dl_leak;
        delta += (sx - sv) * target_term(set, problem.ul[i]);
    }
    return delta;
}

DlFilterSet sum_mse_duality(const DualityProblem& problem) {
    const double delta = sum_mse_delta(problem);
    if (!(delta > 0.0)) {
        throw DualityInfeasibleError("sum-MSE duality: delta = " + std::to_string(delta) + " is not positive");
    }
    const auto count = static_cast<double>(problem.sets.size());
    const double gamma_sq = count * 0.5 * problem.noise_variance * problem.prototype_energy / delta;
    if (!(gamma_sq > 0.0) || !std::isfinite(gamma_sq)) {
        throw DualityInfeasibleError("sum-MSE duality: gamma^2 = " + std::to_string(gamma_sq));
    }
    return scaled_filters(problem, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(problem.sets.size()), gamma_sq));
}

Eigen::MatrixXd sc_mse_system(const DualityProblem& problem) {
    check_problem(problem);
    const double sx = problem.signal_variance;
    const double sv = problem.transmit_variance;
    const auto count = static_cast<Eigen::Index>(problem.sets.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(count, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto& set = problem.sets[static_cast<std::size_t>(i)];
        const auto& model = *set.model;
        const auto& f = problem.ul[static_cast<std::size_t>(i)].ff;
        const double ici = leak(model.h_prev, f) + leak(model.h_next, f);
        t(i, i) = sx * ici + 0.5 * problem.noise_variance * f.dot(model.noise_gram * f) +
                  (sx - sv) * (leak(model.h_own, f) + target_term(set, problem.ul[static_cast<std::size_t>(i)]));
        if (i > 0) t(i, i - 1) = -sv * leak(model.h_prev, problem.ul[static_cast<std::size_t>(i - 1)].ff);
        if (i + 1 < count) t(i, i + 1) = -sv * leak(model.h_next, problem.ul[static_cast<std::size_t>(i + 1)].ff);
    }
    return t;
}

Eigen::VectorXd solve_tridiagonal(const Eigen::MatrixXd& t, const Eigen::VectorXd& rhs) {
    const Eigen::Index n = t.rows();
    if (t.cols() != n || rhs.size() != n) throw std::invalid_argument("tridiagonal solve: shape mismatch");
    Eigen::VectorXd c_prime(n);
    Eigen::VectorXd d_prime(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sub = i > 0 ? t(i, i - 1) : 0.0;
        const double denom = t(i, i) - (i > 0 ? sub * c_prime(i - 1) : 0.0);
        if (std::abs(denom) < 1e-300 || !std::isfinite(denom)) {
            throw DualityInfeasibleError("tridiagonal system is singular at row " + std::to_string(i));
        }
        c_prime(i) = i + 1 < n ? t(i, i + 1) / denom : 0.0;
        d_prime(i) = (rhs(i) - (i > 0 ? sub * d_prime(i - 1) : 0.0)) / denom;
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) x(i) = d_prime(i) - (i + 1 < n ? c_prime(i) * x(i + 1) : 0.0);
    return x;
}

DlFilterSet sc_mse_duality(const DualityProblem& problem) {
    const Eigen::MatrixXd t = sc_mse_system(problem);
    const Eigen::VectorXd rhs =
        Eigen::VectorXd::Constant(t.rows(), 0.5 * problem.noise_variance * problem.prototype_energy);
    const Eigen::VectorXd gamma_sq = solve_tridiagonal(t, rhs);
    for (Eigen::Index i = 0; i < gamma_sq.size(); ++i) {
        if (!(gamma_sq(i) > 0.0) || !std::isfinite(gamma_sq(i))) {
            throw DualityInfeasibleError("SC-MSE duality: gamma_k^2 = " + std::to_string(gamma_sq(i)) +
                                         " for subcarrier " + std::to_string(problem.sets[static_cast<std::size_t>(i)].k()));
        }
    }
    return scaled_filters(problem, gamma_sq);
}

}  // namespace fbmc
