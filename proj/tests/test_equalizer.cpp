#include <doctest.h>

#include <random>

#include "fbmc/equalizer.hpp"
#include "fbmc/simulation.hpp"
#include "test_support.hpp"

using namespace fbmc;

namespace {

std::shared_ptr<const SubcarrierModel> scalar_model(std::size_t k, cplx h) {
    SubchannelResponse own{{h}, k, k};
    const std::vector<cplx> unit{1.0};
    return std::make_shared<const SubcarrierModel>(
        make_subcarrier_model(k, 1, own, nullptr, nullptr, noise_filter_matrix(unit, 1, 8)));
}

struct Bench {
    PrototypeFilter proto = PrototypeFilter::root_raised_cosine(32, 4, 1.0);
    UsedBand band{4, 24};
    ChannelRealization channel;

    explicit Bench(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        channel = generate_bu_channel(rng, 1.92e6, 14);
    }
    SubchannelMatrixSet set(std::size_t k, std::size_t lf, std::size_t lb, std::size_t nu) const {
        return assemble(std::make_shared<const SubcarrierModel>(build_subcarrier_model(proto, channel, band, k, lf)), lb,
                        nu, 0.5);
    }
};

}  // namespace

TEST_CASE("scalar Wiener toy") {
    const double sx = 0.5;
    for (cplx h : {cplx{0.8, 0.0}, cplx{0.3, -0.6}, cplx{0.0, 1.2}}) {
        for (std::size_t k : {4u, 5u}) {
            for (double s2 : {0.01, 0.5, 3.0}) {
                const auto set = assemble(scalar_model(k, h), 0, 0, sx);
                const auto f = design_dfe(set, s2);
                const Eigen::Vector2d col = set.h_own().col(0);
                CHECK(col.squaredNorm() == doctest::Approx(std::norm(h)).epsilon(1e-12));
                const double den = sx * col.squaredNorm() + 0.5 * s2;
                CHECK((f.ff - sx * col / den).norm() < 1e-12);
                CHECK(f.mse == doctest::Approx(sx * 0.5 * s2 / den).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("MMSE solution satisfies the normal equations") {
    const Bench b(1);
    for (std::size_t k : {4u, 5u, 15u, 27u}) {
        for (double s2 : {1e-4, 0.02, 0.5}) {
            const auto set = b.set(k, 7, 4, 9);
            const auto eq = normal_equations(set, s2);
            const auto f = design_dfe(set, s2);
            const Eigen::VectorXd w = f.stacked();
            CHECK((eq.matrix * w - eq.rhs).norm() / eq.rhs.norm() < 1e-8);
            CHECK(f.mse > 0.0);
            CHECK(f.mse < 0.5);
        }
    }
}

TEST_CASE("MSE forms agree and the MMSE is a minimum") {
    const Bench b(2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (std::size_t k : {6u, 13u}) {
        const double s2 = 0.05;
        const auto set = b.set(k, 7, 4, 10);
        const auto f = design_dfe(set, s2);
        CHECK(ul_mse(set, f.ff, f.fb, s2) == doctest::Approx(ul_mse_quadratic(set, f.stacked(), s2)).epsilon(1e-10));
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd w = f.stacked();
            for (auto& v : w) v += 0.05 * g(rng);
            const Eigen::VectorXd ff = w.head(f.ff.size());
            const Eigen::VectorXd fb = w.tail(f.fb.size());
            const double q = ul_mse_quadratic(set, w, s2);
            CHECK(ul_mse(set, ff, fb, s2) == doctest::Approx(q).epsilon(1e-10));
            CHECK(q >= f.mse);
        }
    }
}

TEST_CASE("zero filter leaves the signal variance as error") {
    const Bench b(3);
    const auto set = b.set(8, 5, 3, 6);
    const Eigen::VectorXd ff = Eigen::VectorXd::Zero(10);
    const Eigen::VectorXd fb = Eigen::VectorXd::Zero(3);
    CHECK(ul_mse(set, ff, fb, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("large noise drives the filter to zero") {
    const Bench b(4);
    const auto set = b.set(8, 5, 3, 6);
    const auto quiet = design_dfe(set, 1e-2);
    const auto loud = design_dfe(set, 1e6);
    CHECK(loud.ff.norm() < 1e-4 * quiet.ff.norm());
    CHECK(loud.mse == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("linear design is the DFE without feedback") {
    const Bench b(5);
    const auto lin = b.set(9, 9, 0, 8);
    const auto f = design_linear(lin, 0.03);
    const auto d = design_dfe(lin, 0.03);
    CHECK((f.ff - d.ff).norm() == 0.0);
    CHECK(f.fb.size() == 0);
    CHECK_THROWS_AS(design_linear(b.set(9, 9, 2, 8), 0.03), std::invalid_argument);
    CHECK_THROWS_AS(design_dfe(lin, -1.0), std::invalid_argument);
}

TEST_CASE("target vector layout") {
    EqualizerDims d{2, 3, 3, 1};
    Eigen::VectorXd fb(3);
    fb << 0.5, -0.25, 0.125;
    const auto r = target_vector(d, fb);
    Eigen::VectorXd expect(5);
    expect << 0, 1, 0.5, -0.25, 0.125;
    CHECK(r == expect);
}

TEST_CASE("latency selection") {
    CHECK(select_latency([](std::size_t nu) { return (nu - 4.0) * (nu - 4.0); }, 0, 10) == 4);
    CHECK(select_latency([](std::size_t) { return 1.0; }, 3, 9) == 3);
    CHECK(select_latency([](std::size_t nu) { return -double(nu); }, 2, 2) == 2);
    CHECK_THROWS_AS(select_latency([](std::size_t) { return 0.0; }, 5, 4), std::invalid_argument);

    // ideal channel: the overall response peaks at the centre of its span
    const PrototypeFilter proto = PrototypeFilter::root_raised_cosine(32, 4, 1.0);
    const UsedBand band{4, 24};
    const auto model = std::make_shared<const SubcarrierModel>(
        build_subcarrier_model(proto, ChannelRealization::identity(), band, 10, 7));
    const std::size_t n = model->response_taps;
    const std::size_t last = n + 7 - 2;
    const auto cost = [&](std::size_t nu) { return design_dfe(assemble(model, 0, nu, 0.5), 1e-3).mse; };
    // the cost is symmetric about the window centre and flat across the
    // feed-forward span around it
    for (std::size_t nu = 0; nu <= last; ++nu) CHECK(cost(nu) == doctest::Approx(cost(last - nu)).epsilon(1e-4));
    const auto best = select_latency(cost, 0, last);
    const double centre = last / 2.0;
    CHECK(std::abs(static_cast<double>(best) - centre) <= (7 - 1) / 2.0);
    CHECK(cost(static_cast<std::size_t>(centre)) == doctest::Approx(cost(best)).epsilon(1e-3));
}

TEST_CASE("dfe_run: zero feedback is plain linear filtering") {
    std::mt19937_64 rng(12);
    const auto y = fbmc::testing::random_complex(rng, 60);
    UlFilter f;
    f.k = 7;
    f.latency = 3;
    f.ff = Eigen::VectorXd::Random(8);
    f.fb = Eigen::VectorXd::Zero(2);
    const Constellation c(16);
    const auto out = dfe_run(y, f, 50, c, FeedbackMode::decision);
    const auto taps = f.taps();
    for (std::size_t m = 0; m < 50; ++m) {
        const auto n = static_cast<std::ptrdiff_t>(m + 3);
        cplx z{};
        for (std::size_t i = 0; i < taps.size(); ++i)
            if (n - static_cast<std::ptrdiff_t>(i) >= 0) z += taps[i] * y[static_cast<std::size_t>(n) - i];
        const double expect = is_real_slot(7, n) ? z.real() : (f.latency % 2 ? -1.0 : 1.0) * z.imag();
        CHECK(out.soft[m] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(out.decisions[m] == c.slice_axis(out.soft[m]));
    }
    CHECK_THROWS_AS(dfe_run(y, f, 50, c, FeedbackMode::genie), std::invalid_argument);
}

TEST_CASE("end-to-end: noiseless link, genie and decision agree") {
    auto cfg = fbmc::testing::small_config();
    cfg.designs = {Design::dfe_ul, Design::linear_ul};
    const LinkSimulator sim(cfg);
    for (std::size_t ch = 0; ch < 2; ++ch) {
        const auto dec = sim.run_cell(Design::dfe_ul, 200.0, ch);
        const auto gen = sim.run_cell(Design::dfe_ul, 200.0, ch, {FeedbackMode::genie});
        CHECK(dec.bit_errors == 0);
        CHECK(gen.bit_errors == 0);
        CHECK(dec.bits > 0);
        CHECK(dec.mse_empirical == doctest::Approx(gen.mse_empirical).epsilon(1e-9));
    }
}

TEST_CASE("end-to-end: genie-aided empirical MSE matches the analytic MSE") {
    auto cfg = fbmc::testing::small_config();
    cfg.block_length = 2000;
    const LinkSimulator sim(cfg);
    for (std::size_t ch = 0; ch < 2; ++ch) {
        const auto r = sim.run_cell(Design::dfe_ul, 15.0, ch, {FeedbackMode::genie});
        CHECK(r.mse_samples > 20000);
        CHECK(r.mse_empirical == doctest::Approx(r.mse_analytic).epsilon(0.02));
        const auto lin = sim.run_cell(Design::linear_ul, 15.0, ch);
        CHECK(lin.mse_empirical == doctest::Approx(lin.mse_analytic).epsilon(0.02));
    }
}

TEST_CASE("DFE beats the linear equalizer analytically") {
    auto cfg = fbmc::testing::small_config();
    const LinkSimulator sim(cfg);
    int wins = 0, total = 0;
    for (double ebn0 : {10.0, 20.0, 30.0}) {
        const double s2 = noise_variance_from_ebn0(ebn0, 16, 1.0, cfg.subcarriers, cfg.used_subcarriers);
        for (std::size_t ch = 0; ch < 10; ++ch) {
            const auto c = sim.channel(ch);
            double dfe = 0.0, lin = 0.0;
            for (const auto& f : sim.design(Design::dfe_ul, c, s2).ul) dfe += f.mse;
            for (const auto& f : sim.design(Design::linear_ul, c, s2).ul) lin += f.mse;
            wins += dfe <= lin;
            ++total;
        }
    }
    CHECK(wins >= 0.9 * total);
}
