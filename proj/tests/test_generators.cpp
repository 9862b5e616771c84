#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <optional>
#include <random>

#include "oqs/generators.hpp"

using namespace oqs;

namespace {

std::mt19937_64 rng(2024);

Mat random_hermitian(int d) {
    std::normal_distribution<double> n;
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
    return (m + m.adjoint()) / 2.0;
}

// test-side eigenoperator decomposition, built directly from the spectrum
struct TestMode {
    Mat op;
    double omega;
    cplx weight;
};

std::vector<TestMode> test_modes(const Mat& h, const Mat& coupling) {
    const int d = int(h.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    std::vector<TestMode> modes;
    for (int r = 0; r < d; ++r) {
        for (int s = 0; s < d; ++s) {
            TestMode m;
            m.op = es.eigenvectors().col(r) * es.eigenvectors().col(s).adjoint();
            m.omega = es.eigenvalues()(r) - es.eigenvalues()(s);
            m.weight = (es.eigenvectors().col(r).adjoint() * coupling *
                        es.eigenvectors().col(s))(0, 0);
            modes.push_back(m);
        }
    }
    return modes;
}

// independent second-order assembly: apply the defining double-commutator sum
// to every basis element with plain matrix arithmetic
Mat k2_oracle(const Mat& h, const Mat& coupling, const BathModel& bath,
              std::optional<double> time = std::nullopt) {
    const int d = int(h.rows());
    const std::vector<TestMode> modes = test_modes(h, coupling);
    Mat k = Mat::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            Mat e = Mat::Zero(d, d);
            e(a, b) = 1.0;
            Mat out = Mat::Zero(d, d);
            for (const TestMode& mj : modes) {
                const cplx cp = time
                                    ? finite_half_fourier(bath, Sign::plus, mj.omega, *time)
                                    : half_fourier(bath, Sign::plus, mj.omega);
                const cplx cm = time
                                    ? finite_half_fourier(bath, Sign::minus, mj.omega, *time)
                                    : half_fourier(bath, Sign::minus, mj.omega);
                for (const TestMode& mk : modes) {
                    const cplx ww = mj.weight * mk.weight;
                    out += ww * cp * (mj.op * e * mk.op - mk.op * mj.op * e);
                    out += ww * cm * (mk.op * e * mj.op - e * mj.op * mk.op);
                }
            }
            k.col(b * d + a) = vectorize(out);
        }
    }
    return k;
}

// independent fourth-order assembly: brute-force sum over all index tuples,
// plus the conjugate companion applied column by column
Mat k4_oracle(const Mat& h, const Mat& coupling, const BathModel& bath) {
    const int d = int(h.rows());
    const std::vector<TestMode> modes = test_modes(h, coupling);
    const std::array<CouplingLabel, 4> labels{CouplingLabel{0, 0}, CouplingLabel{0, 0},
                                              CouplingLabel{0, 0}, CouplingLabel{0, 0}};
    Mat raw = Mat::Zero(d * d, d * d);
    for (const TestMode& mj : modes) {
        for (const TestMode& mk : modes) {
            for (const TestMode& ml : modes) {
                for (const TestMode& mm : modes) {
                    const cplx ww = mj.weight * mk.weight * ml.weight * mm.weight;
                    if (std::abs(ww) < 1e-15) continue;
                    const std::array<double, 3> delta{
                        mk.omega + ml.omega + mm.omega, ml.omega + mm.omega, mm.omega};
                    const cplx coeff = ww * triple_transform(bath, 1, labels, delta);
                    const Mat y = (mk.op * ml.op - ml.op * mk.op) * mm.op;
                    for (int a = 0; a < d; ++a) {
                        for (int b = 0; b < d; ++b) {
                            Mat e = Mat::Zero(d, d);
                            e(a, b) = 1.0;
                            const Mat out = coeff * (mj.op * y * e - y * e * mj.op);
                            raw.col(b * d + a) += vectorize(out);
                        }
                    }
                }
            }
        }
    }
    // companion: X -> (raw[X^dag])^dag, evaluated directly
    Mat companion = Mat::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            Mat e = Mat::Zero(d, d);
            e(a, b) = 1.0;
            const Mat image = unvectorize(raw * vectorize(e.adjoint().eval()), d);
            companion.col(b * d + a) = vectorize(image.adjoint().eval());
        }
    }
    return raw + companion;
}

bool preserves_hermiticity(const Mat& k, int d) {
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 4; ++trial) {
        const Mat x = random_hermitian(d);
        const Mat out = unvectorize(k * vectorize(x), d);
        if ((out - out.adjoint()).norm() > 1e-10 * (1.0 + out.norm())) return false;
    }
    return true;
}

bool annihilates_trace(const Mat& k, int d) {
    for (int trial = 0; trial < 4; ++trial) {
        const Mat x = random_hermitian(d);
        const Mat out = unvectorize(k * vectorize(x), d);
        if (std::abs(out.trace()) > 1e-10 * (1.0 + out.norm())) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("eigenoperators reconstruct the coupling and count d^2") {
    const Mat h = random_hermitian(3);
    const Mat a = random_hermitian(3);
    const EigenoperatorSet es = eigenoperators(h, {a});
    CHECK(int(es.ops.size()) == 9);
    CHECK((es.coupling_sum() - a).norm() < 1e-12);
    Mat rebuilt = Mat::Zero(3, 3);
    for (const Eigenoperator& op : es.ops) rebuilt += op.weight * op.op;
    CHECK((rebuilt - a).norm() < 1e-12);
}

TEST_CASE("degenerate spectra are rejected") {
    Mat h = Mat::Zero(2, 2);  // fully degenerate
    CHECK_THROWS_AS(eigenoperators(h, {random_hermitian(2)}), DegenerateSpectrum);
}

TEST_CASE("k2_markov matches the hand-assembled oracle") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    for (int d : {2, 3}) {
        const Mat h = random_hermitian(d);
        const Mat a = random_hermitian(d);
        const EigenoperatorSet es = eigenoperators(h, {a});
        const Superoperator k2 = k2_markov(es, bath);
        const Mat oracle = k2_oracle(h, a, bath);
        CHECK((k2.matrix - oracle).norm() < 1e-10 * (1.0 + oracle.norm()));
    }
}

TEST_CASE("k2_finite_time matches the hand-assembled oracle") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const Mat h = random_hermitian(2);
    const Mat a = random_hermitian(2);
    const EigenoperatorSet es = eigenoperators(h, {a});
    for (double t : {0.0, 0.4, 2.5}) {
        const Superoperator k2 = k2_finite_time(es, bath, t);
        const Mat oracle = k2_oracle(h, a, bath, t);
        CHECK((k2.matrix - oracle).norm() < 1e-10 * (1.0 + oracle.norm()));
    }
}

TEST_CASE("k4_markov matches the brute-force tuple oracle") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    for (int d : {2, 3}) {
        const Mat h = random_hermitian(d);
        const Mat a = random_hermitian(d);
        const EigenoperatorSet es = eigenoperators(h, {a});
        const Superoperator k4 = k4_markov(es, bath);
        const Mat oracle = k4_oracle(h, a, bath);
        CHECK((k4.matrix - oracle).norm() < 1e-9 * (1.0 + oracle.norm()));
    }
}

TEST_CASE("generator invariants hold for random systems") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 2;
        const Mat h = random_hermitian(d);
        const Mat a = random_hermitian(d);
        const EigenoperatorSet es = eigenoperators(h, {a});
        for (const Mat& k :
             {k2_markov(es, bath).matrix, k4_markov(es, bath).matrix,
              k2_finite_time(es, bath, 0.7).matrix, k4_finite_time(es, bath, 0.7).matrix}) {
            CHECK(annihilates_trace(k, d));
            CHECK(preserves_hermiticity(k, d));
        }
    }
}

TEST_CASE("finite-time generator converges to the Markov limit") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const Mat h = random_hermitian(2);
    const Mat a = random_hermitian(2);
    const EigenoperatorSet es = eigenoperators(h, {a});
    const double horizon = 40.0 * bath.correlation_time();
    CHECK((k2_finite_time(es, bath, horizon).matrix - k2_markov(es, bath).matrix).norm() <
          1e-6);
    CHECK((k4_finite_time(es, bath, horizon).matrix - k4_markov(es, bath).matrix).norm() <
          1e-6);
}

TEST_CASE("time-dependent forms equal the finite-time matrices") {
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const Mat h = random_hermitian(2);
    const Mat a = random_hermitian(2);
    const EigenoperatorSet es = eigenoperators(h, {a});
    const TimeDependentGenerator k2_t = k2_time_dependent(es, bath);
    const TimeDependentGenerator k4_t = k4_time_dependent(es, bath);
    for (double t : {0.1, 1.0, 3.7}) {
        CHECK((k2_t.at(t) - k2_finite_time(es, bath, t).matrix).norm() < 1e-12);
        CHECK((k4_t.at(t) - k4_finite_time(es, bath, t).matrix).norm() < 1e-10);
    }
}

TEST_CASE("hermitian companion implements X -> (S[X^dag])^dag") {
    std::normal_distribution<double> n;
    Mat s(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s(i, j) = cplx(n(rng), n(rng));
    const Mat comp = hermitian_companion(s, 2);
    Mat x(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) x(i, j) = cplx(n(rng), n(rng));
    const Mat direct = unvectorize(s * vectorize(x.adjoint().eval()), 2).adjoint();
    const Mat via = unvectorize(comp * vectorize(x), 2);
    CHECK((via - direct).norm() < 1e-12);
}

TEST_CASE("secular generator commutes with the free evolution") {
    const Mat h = (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished();
    const Mat sx = (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const BathModel bath = BathModel::ohmic(0.1, 2.0, 2.0);
    const EigenoperatorSet es = eigenoperators(h, {sx});
    const Superoperator sec = secularize(k2_markov(es, bath), es);
    const Mat l0 = hamiltonian_superop(h);
    CHECK((l0 * sec.matrix - sec.matrix * l0).norm() < 1e-10);
    // idempotent
    CHECK((secularize(sec, es).matrix - sec.matrix).norm() < 1e-12);
}

TEST_CASE("secular generator fixes the thermal state and is CP") {
    const Mat h = (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished();
    const Mat sx = (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const BathModel bath = BathModel::ohmic(0.1, 2.0, 2.0);
    const EigenoperatorSet es = eigenoperators(h, {sx});
    const Superoperator sec = secularize(k2_markov(es, bath), es);
    Mat gibbs = expm(-bath.beta * h);
    gibbs /= gibbs.trace();
    CHECK(unvectorize(sec.matrix * vectorize(gibbs), 2).norm() < 1e-6);
    for (double t : {0.1, 1.0, 10.0}) {
        const Superoperator map{2, expm(t * (hamiltonian_superop(h) + 0.01 * sec.matrix))};
        CHECK(is_completely_positive(map).witness_eigenvalue > -1e-9);
    }
}

TEST_CASE("assemble composes the pieces and records provenance") {
    const Mat h = (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished();
    const Mat sx = (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const EigenoperatorSet es = eigenoperators(h, {sx});
    const GeneratorReport report = assemble(h, es, bath, 0.1, 4, Flavor::redfield,
                                            MarkovKind::infinite_limit);
    CHECK(report.provenance.size() >= 2);
    const Mat expected = report.l0 + 0.01 * report.k2 + 1e-4 * report.k4;
    CHECK((report.total() - expected).norm() < 1e-14);
    CHECK((report.k2 - k2_markov(es, bath).matrix).norm() < 1e-12);
    CHECK((report.k4 - k4_markov(es, bath).matrix).norm() < 1e-12);
}

TEST_CASE("static and adaptive integrators agree") {
    const Mat h = (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished();
    const Mat sx = (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const EigenoperatorSet es = eigenoperators(h, {sx});
    const GeneratorReport report =
        assemble(h, es, bath, 0.3, 2, Flavor::redfield, MarkovKind::infinite_limit);
    Mat rho0 = Mat::Zero(2, 2);
    rho0(0, 0) = 0.9;
    rho0(1, 1) = 0.1;
    rho0(0, 1) = rho0(1, 0) = 0.2;
    const std::vector<double> times{0.0, 1.0, 5.0, 15.0};
    const EvolutionResult fixed =
        evolve_static(report.total(), DensityMatrix::checked(rho0), times);
    const Mat l = report.total();
    const EvolutionResult adaptive = evolve_ode([&](double) { return l; },
                                                DensityMatrix::checked(rho0), times, 1e-11);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK((fixed.states[i] - adaptive.states[i]).norm() < 1e-8);
        CHECK(fixed.traces[i] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("finite-time evolution uses the time-dependent generator") {
    const Mat h = (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished();
    const Mat sx = (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const EigenoperatorSet es = eigenoperators(h, {sx});
    const GeneratorReport report =
        assemble(h, es, bath, 0.3, 2, Flavor::redfield, MarkovKind::finite_time, 1.0);
    REQUIRE(report.k2_t != nullptr);
    CHECK((report.total_at(1.0) - report.total()).norm() < 1e-10);
    Mat rho0 = Mat::Zero(2, 2);
    rho0(0, 0) = 1.0;
    const EvolutionResult run =
        evolve(report, DensityMatrix::checked(rho0), {0.0, 0.5, 2.0});
    for (double tr : run.traces) CHECK(tr == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("negative evaluation times are rejected") {
    const Mat h = (Mat(2, 2) << 0.5, 0.0, 0.0, -0.5).finished();
    const Mat sx = (Mat(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const BathModel bath = BathModel::exponential(0.8, 0.7, 2.0);
    const EigenoperatorSet es = eigenoperators(h, {sx});
    CHECK_THROWS(k2_finite_time(es, bath, -1.0));
}
