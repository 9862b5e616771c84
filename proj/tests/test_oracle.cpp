#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oqs/oracle.hpp"

using namespace oqs;

namespace {

Mat two_level_h() { return (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished(); }
Mat sigma_x() { return (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished(); }

SystemSpec two_level() { return SystemSpec{two_level_h(), {sigma_x()}}; }

DensityMatrix excited() {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    return DensityMatrix::checked(m);
}

// tabulate the finite bath's correlation function on a uniform grid
BathModel tabulate(const FiniteBath& bath, double t_max, int points) {
    std::vector<double> ts;
    std::vector<cplx> cs;
    for (int i = 0; i <= points; ++i) {
        ts.push_back(t_max * i / points);
        cs.push_back(bath.correlation(ts.back()));
    }
    return BathModel::tabulated(ts, cs, bath.beta);
}

}  // namespace

TEST_CASE("finite bath correlation matches the mode sum") {
    const FiniteBath bath{{BathMode{1.0, 0.3, 4}, BathMode{2.2, 0.2, 3}}, 2.0};
    for (double t : {0.0, 0.7, 3.1}) {
        cplx expected = 0.0;
        for (const BathMode& m : bath.modes) {
            const double n = 1.0 / (std::exp(bath.beta * m.omega) - 1.0);
            expected += m.coupling * m.coupling *
                        ((n + 1.0) * std::exp(cplx(0.0, -m.omega * t)) +
                         n * std::exp(cplx(0.0, m.omega * t)));
        }
        CHECK(std::abs(bath.correlation(t) - expected) < 1e-13);
    }
    CHECK(bath.dim() == 5 * 4);
}

TEST_CASE("validation rejects undersized Fock cutoffs") {
    // beta omega (n_max + 1) must push the Gibbs tail below 1e-6
    const FiniteBath hot{{BathMode{1.0, 0.1, 2}}, 0.5};
    CHECK_THROWS(hot.validate());
    const FiniteBath cold{{BathMode{1.0, 0.1, 2}}, 30.0};
    CHECK_NOTHROW(cold.validate());
    const FiniteBath empty{{}, 1.0};
    CHECK_THROWS(empty.validate());
}

TEST_CASE("recurrence time is set by the smallest spectral gap") {
    const FiniteBath bath{{BathMode{1.0, 0.1, 3}, BathMode{1.3, 0.1, 3}}, 5.0};
    CHECK(bath.recurrence_time() ==
          doctest::Approx(2.0 * M_PI / 0.3).epsilon(1e-12));
}

TEST_CASE("zero coupling reduces to free system evolution") {
    const FiniteBath bath{{BathMode{1.0, 0.2, 7}}, 2.0};
    Mat rho0 = Mat::Zero(2, 2);
    rho0(0, 0) = 0.7;
    rho0(1, 1) = 0.3;
    rho0(0, 1) = rho0(1, 0) = 0.2;
    const std::vector<double> times{0.0, 0.9, 2.4};
    const ExactReducedResult run =
        exact_reduced(two_level(), bath, 0.0, DensityMatrix::checked(rho0), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Mat u = expm(cplx(0.0, -times[i]) * two_level_h());
        CHECK((run.states[i] - u * rho0 * u.adjoint()).norm() < 1e-10);
    }
    CHECK_FALSE(run.truncation_warning);
}

TEST_CASE("resonant single-excitation exchange follows the Rabi law") {
    // one resonant mode, one-photon cutoff: the excited state couples only to
    // |ground, one photon>, so its population is exactly cos^2(g t)
    const double g = 0.15;
    const FiniteBath bath{{BathMode{1.0, g, 1}}, 30.0};
    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(0.4 * i);
    const ExactReducedResult run =
        exact_reduced(two_level(), bath, 1.0, excited(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double population = run.states[i](0, 0).real();
        CHECK(population == doctest::Approx(std::pow(std::cos(g * times[i]), 2))
                                .epsilon(1e-6));
    }
}

TEST_CASE("exact evolution preserves trace and positivity") {
    const FiniteBath bath{{BathMode{1.0, 0.25, 7}}, 2.0};
    const ExactReducedResult run =
        exact_reduced(two_level(), bath, 0.4, excited(), {0.0, 1.0, 4.0});
    for (const Mat& state : run.states) {
        CHECK(std::abs(state.trace() - 1.0) < 1e-10);
        Eigen::SelfAdjointEigenSolver<Mat> es(state);
        CHECK(es.eigenvalues()(0) > -1e-10);
    }
}

TEST_CASE("second-order Dyson block equals the dressed finite-time generator") {
    const FiniteBath fb{{BathMode{1.0, 0.3, 7}, BathMode{1.7, 0.2, 4}}, 2.0};
    const BathModel table = tabulate(fb, 12.0, 2400);
    const EigenoperatorSet es = eigenoperators(two_level_h(), {sigma_x()});
    const double t = 1.1;
    const DysonTerm d2 = dyson_term(two_level(), fb, 2, t);
    // interaction picture vs Schroedinger picture differ by free dressing
    const Mat u = expm(cplx(0.0, -t) * two_level_h());
    const Mat w = sandwich_superop(u, u.adjoint());
    const Mat w_inv = sandwich_superop(u.adjoint(), u);
    const Mat dressed = w * d2.value.matrix * w_inv;
    const Mat k2 = k2_finite_time(es, table, t).matrix;
    CHECK((dressed - k2).norm() / k2.norm() < 1e-4);
}

TEST_CASE("fourth-order Dyson term vanishes at t = 0 and with no coupling") {
    const FiniteBath fb{{BathMode{1.0, 0.3, 7}}, 2.0};
    CHECK(dyson_term(two_level(), fb, 4, 0.0).value.matrix.norm() < 1e-12);
    const FiniteBath silent{{BathMode{1.0, 0.0, 7}}, 2.0};
    CHECK(dyson_term(two_level(), silent, 2, 1.0).value.matrix.norm() < 1e-12);
}

TEST_CASE("nonnegative least squares fits the ohmic correlation") {
    const BathModel model = BathModel::ohmic(0.01, 2.0, 2.0);
    const std::vector<double> freqs{0.739, 2.43, 4.288, 6.276, 8.355, 10.453};
    const double t_max = 5.0 * model.correlation_time();
    const FiniteBath fit = fit_finite_bath(model, freqs, t_max);
    CHECK(!fit.modes.empty());
    for (const BathMode& m : fit.modes) CHECK(m.coupling >= 0.0);
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = t_max * i / 200.0;
        const cplx target = correlation(model, Sign::plus, t);
        num += std::norm(fit.correlation(t) - target);
        den += std::norm(target);
    }
    CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("markov_error rejects baths whose correlation does not fit") {
    // a single far-off-resonance mode cannot represent the model correlation
    const BathModel model = BathModel::exponential(0.5, 0.8, 2.0);
    const FiniteBath bad{{BathMode{6.0, 0.1, 1}}, 2.0};
    Mat rho0 = Mat::Zero(2, 2);
    rho0(0, 0) = 1.0;
    CHECK_THROWS_AS(markov_error(two_level(), bad, model, 0.1,
                                 DensityMatrix::checked(rho0), 0.2, 3, 0.05),
                    FitFailure);
}

TEST_CASE("dimension cap aborts oversized baths") {
    const FiniteBath big{{BathMode{0.2, 0.1, 40}, BathMode{0.25, 0.1, 40},
                          BathMode{0.3, 0.1, 40}},
                         10.0};
    CHECK_THROWS_AS(
        exact_reduced(two_level(), big, 0.1, excited(), {0.0, 1.0}, 1000),
        DimensionCap);
}
