#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>

#include "oqs/bath.hpp"

using namespace oqs;

namespace {

// independent quadrature: composite Simpson on [0, b]
cplx simpson(const std::function<cplx(double)>& f, double b, int panels) {
    const double h = b / panels;
    cplx sum = f(0.0) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace

TEST_CASE("exponential correlation has the stated closed form") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    for (double t : {0.0, 0.3, 1.5}) {
        CHECK(std::abs(correlation(bath, Sign::plus, t) - 0.8 * std::exp(-t / 0.7)) <
              1e-14);
        CHECK(std::abs(correlation(bath, Sign::minus, t) -
                       std::conj(correlation(bath, Sign::plus, t))) < 1e-14);
    }
}

TEST_CASE("exponential half transform matches quadrature") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    for (double omega : {-2.0, 0.0, 1.3}) {
        const cplx closed = half_fourier(bath, Sign::plus, omega);
        const cplx numeric = simpson(
            [&](double t) {
                return std::exp(cplx(0.0, -omega * t)) * correlation(bath, Sign::plus, t);
            },
            30.0, 6000);
        CHECK(std::abs(closed - numeric) < 1e-8);
        // analytic: a / (1/tau + i omega)
        CHECK(std::abs(closed - 0.8 / cplx(1.0 / 0.7, omega)) < 1e-12);
    }
}

TEST_CASE("finite half transform converges to the infinite-horizon one") {
    const BathModel bath = BathModel::exponential(1.0, 0.5, 1.0);
    const double omega = 0.9;
    const cplx limit = half_fourier(bath, Sign::plus, omega);
    CHECK(std::abs(finite_half_fourier(bath, Sign::plus, omega, 20.0) - limit) < 1e-12);
    CHECK(std::abs(finite_half_fourier(bath, Sign::plus, omega, 0.0)) < 1e-14);
    // and matches quadrature at intermediate times
    const cplx numeric = simpson(
        [&](double t) {
            return std::exp(cplx(0.0, -omega * t)) * correlation(bath, Sign::plus, t);
        },
        1.3, 2000);
    CHECK(std::abs(finite_half_fourier(bath, Sign::plus, omega, 1.3) - numeric) < 1e-8);
}

TEST_CASE("ohmic spectral function obeys detailed balance") {
    const BathModel bath = BathModel::ohmic(0.1, 2.0, 2.0);
    for (double omega : {0.3, 1.0, 2.5}) {
        const double forward = spectral_function(bath, omega);
        const double backward = spectral_function(bath, -omega);
        CHECK(forward > 0.0);
        CHECK(backward == doctest::Approx(std::exp(-bath.beta * omega) * forward)
                              .epsilon(1e-6));
    }
}

TEST_CASE("ohmic correlation decays and starts real-positive") {
    const BathModel bath = BathModel::ohmic(0.1, 2.0, 2.0);
    const cplx c0 = correlation(bath, Sign::plus, 0.0);
    CHECK(c0.real() > 0.0);
    CHECK(std::abs(c0.imag()) < 1e-10);
    CHECK(std::abs(correlation(bath, Sign::plus, 30.0)) < 1e-3 * std::abs(c0));
}

TEST_CASE("tabulated bath reproduces the sampled model") {
    const BathModel exact = BathModel::exponential(0.8, 0.7, 2.0);
    std::vector<double> ts;
    std::vector<cplx> cs;
    for (int i = 0; i <= 400; ++i) {
        ts.push_back(i * 0.05);
        cs.push_back(correlation(exact, Sign::plus, ts.back()) *
                     std::exp(cplx(0.0, -0.4 * ts.back())));  // add an oscillation
    }
    const BathModel tab = BathModel::tabulated(ts, cs, 2.0);
    // interpolation at off-grid points
    for (double t : {0.512, 3.033, 9.975}) {
        const cplx expected =
            correlation(exact, Sign::plus, t) * std::exp(cplx(0.0, -0.4 * t));
        CHECK(std::abs(correlation(tab, Sign::plus, t) - expected) < 1e-5);
    }
    // half transform against the shifted analytic answer
    const cplx closed = 0.8 / cplx(1.0 / 0.7, 1.0 + 0.4);
    CHECK(std::abs(half_fourier(tab, Sign::plus, 1.0) - closed) < 1e-4);
}

TEST_CASE("csv loader round-trips a table") {
    const std::string path = "/tmp/oqs_test_bath_table.csv";
    {
        std::ofstream out(path);
        for (int i = 0; i <= 200; ++i) {
            const double t = i * 0.05;
            out << t << "," << std::exp(-t) << "," << -0.1 * std::exp(-t) << "\n";
        }
    }
    const BathModel tab = BathModel::tabulated_from_csv(path, 1.0);
    CHECK(std::abs(correlation(tab, Sign::plus, 1.0) - cplx(std::exp(-1.0), -0.1 * std::exp(-1.0))) < 1e-6);
}

TEST_CASE("cross-correlation policy scales cross-subsystem entries only") {
    const BathModel bath = BathModel::exponential(1.0, 0.5, 1.0);
    const CouplingLabel first{0, 0}, second{1, 0};
    const CrossCorrelationPolicy half = CrossCorrelationPolicy::scaled(0.5);
    const cplx same = correlation(bath, first, first, Sign::plus, 0.3, half);
    const cplx cross = correlation(bath, first, second, Sign::plus, 0.3, half);
    CHECK(std::abs(same - correlation(bath, Sign::plus, 0.3)) < 1e-14);
    CHECK(std::abs(cross - 0.5 * same) < 1e-14);
    CHECK(std::abs(correlation(bath, first, second, Sign::plus, 0.3,
                               CrossCorrelationPolicy::zero())) == 0.0);
}

TEST_CASE("fourth-order kernel p=1 is the stated product") {
    const BathModel bath = BathModel::exponential(0.9, 0.6, 1.0);
    const std::array<CouplingLabel, 4> labels{CouplingLabel{0, 0}, CouplingLabel{0, 0},
                                              CouplingLabel{0, 0}, CouplingLabel{0, 0}};
    const std::array<double, 3> tvec{0.4, 0.2, 0.7};
    const cplx expected = correlation(bath, Sign::plus, 0.4 + 0.2) *
                          correlation(bath, Sign::plus, 0.2 + 0.7);
    CHECK(std::abs(fourth_order_kernel(bath, 1, labels, tvec) - expected) < 1e-13);
    CHECK(fourth_order_term_registered(1));
    CHECK_FALSE(fourth_order_term_registered(99));
    CHECK_THROWS_AS(fourth_order_kernel(bath, 99, labels, tvec), UnregisteredTerm);
}

TEST_CASE("triple transform closed form matches nested quadrature") {
    const BathModel bath = BathModel::exponential(0.9, 0.6, 1.0);
    const std::array<CouplingLabel, 4> labels{CouplingLabel{0, 0}, CouplingLabel{0, 0},
                                              CouplingLabel{0, 0}, CouplingLabel{0, 0}};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 3; ++trial) {
        const std::array<double, 3> delta{u(rng), u(rng), u(rng)};
        const cplx closed = triple_transform(bath, 1, labels, delta);
        // the finite-domain triangular integral converges to the full one
        const cplx finite = finite_triple_transform(bath, 1, labels, delta, 18.0);
        CHECK(std::abs(closed - finite) / std::abs(closed) < 1e-4);
    }
}

TEST_CASE("bath factories validate their inputs") {
    CHECK_THROWS(BathModel::exponential(1.0, -0.5, 1.0));
    CHECK_THROWS(BathModel::ohmic(0.1, 2.0, -1.0));
    CHECK_THROWS(BathModel::tabulated({0.0, 1.0}, {cplx(1.0, 0.0)}, 1.0));
}
