#include "oqs/bipartite.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "oqs/detail/assembly.hpp"

namespace oqs {

namespace {

std::vector<detail::Mode> joint_modes(const JointSystem& sys) {
    const int d1 = int(sys.h1.rows());
    const int d2 = int(sys.h2.rows());
    const Mat id1 = Mat::Identity(d1, d1);
    const Mat id2 = Mat::Identity(d2, d2);
    const EigenoperatorSet es1 = eigenoperators(sys.h1, sys.couplings1);
    const EigenoperatorSet es2 = eigenoperators(sys.h2, sys.couplings2);
    std::vector<detail::Mode> modes;
    modes.reserve(es1.ops.size() + es2.ops.size());
    for (const Eigenoperator& e : es1.ops) {
        modes.push_back(detail::Mode{kron(e.op, id2), e.omega, e.weight,
                                     CouplingLabel{0, 0}});
    }
    for (const Eigenoperator& e : es2.ops) {
        modes.push_back(detail::Mode{kron(id1, e.op), e.omega, e.weight,
                                     CouplingLabel{1, 0}});
    }
    return modes;
}

std::optional<double> markov_time(MarkovKind markov, double time) {
    if (markov == MarkovKind::infinite_limit) return std::nullopt;
    if (time < 0) throw NegativeTime("joint generator: t must be >= 0");
    return time;
}

}  // namespace

Mat JointSystem::joint_hamiltonian() const {
    const Mat id1 = Mat::Identity(h1.rows(), h1.cols());
    const Mat id2 = Mat::Identity(h2.rows(), h2.cols());
    return kron(h1, id2) + kron(id1, h2);
}

DensityMatrix singlet_state() {
    Vec psi = Vec::Zero(4);
    psi(1) = 1.0 / std::sqrt(2.0);
    psi(2) = -1.0 / std::sqrt(2.0);
    return DensityMatrix{psi * psi.adjoint()};
}

TranspositionDemo transposition_demo() {
    TranspositionDemo demo;
    demo.input = singlet_state();
    const Superoperator t_one_sided =
        tensor_product_map(Superoperator::transposition(2), Superoperator::identity(2));
    demo.output = t_one_sided.apply(demo.input.op);
    demo.input_spectrum = eig_hermitian(demo.input.op).eigenvalues;
    demo.output_spectrum = eig_hermitian(demo.output).eigenvalues;
    return demo;
}

Superoperator joint_k2(const JointSystem& sys, MarkovKind markov, double time) {
    return Superoperator{sys.dim(),
                         detail::k2_matrix(joint_modes(sys), sys.dim(), sys.bath,
                                           sys.policy, markov_time(markov, time))};
}

Superoperator joint_k4(const JointSystem& sys, const std::vector<int>& terms,
                       MarkovKind markov, double time) {
    return Superoperator{sys.dim(),
                         detail::k4_matrix(joint_modes(sys), sys.dim(), sys.bath,
                                           sys.policy, terms,
                                           markov_time(markov, time))};
}

FactorizationReport factorization_check(const JointSystem& sys, int order,
                                        MarkovKind markov, double time,
                                        const std::vector<int>& k4_terms) {
    if (order != 2 && order != 4) {
        throw std::invalid_argument("factorization_check: order must be 2 or 4");
    }
    const int d1 = int(sys.h1.rows());
    const int d2 = int(sys.h2.rows());
    const EigenoperatorSet es1 = eigenoperators(sys.h1, sys.couplings1);
    const EigenoperatorSet es2 = eigenoperators(sys.h2, sys.couplings2);
    const auto t = markov_time(markov, time);

    auto single = [&](const EigenoperatorSet& es) {
        if (order == 2) {
            return detail::k2_matrix(detail::single_system_modes(es), es.dim, sys.bath,
                                     {}, t);
        }
        return detail::k4_matrix(detail::single_system_modes(es), es.dim, sys.bath, {},
                                 k4_terms, t);
    };
    const Mat lift =
        tensor_product_map(Superoperator{d1, single(es1)}, Superoperator::identity(d2))
            .matrix +
        tensor_product_map(Superoperator::identity(d1), Superoperator{d2, single(es2)})
            .matrix;

    const auto modes = joint_modes(sys);
    Mat joint, cross;
    if (order == 2) {
        joint = detail::k2_matrix(modes, sys.dim(), sys.bath, sys.policy, t);
        cross = detail::k2_matrix(modes, sys.dim(), sys.bath, sys.policy, t,
                                  detail::PairFilter::cross_subsystem);
    } else {
        joint = detail::k4_matrix(modes, sys.dim(), sys.bath, sys.policy, k4_terms, t);
        cross = detail::k4_matrix(modes, sys.dim(), sys.bath, sys.policy, k4_terms, t,
                                  detail::PairFilter::cross_subsystem);
    }

    FactorizationReport rep;
    rep.k_joint = Superoperator{sys.dim(), joint};
    rep.k_direct_sum = Superoperator{sys.dim(), lift};
    rep.residual = (joint - lift).norm();
    rep.coupling_block_norm = cross.norm();
    return rep;
}

GeneratorReport assemble_joint(const JointSystem& sys, int order, MarkovKind markov,
                               double time, const std::vector<int>& k4_terms) {
    if (order != 2 && order != 4) {
        throw std::invalid_argument("assemble_joint: order must be 2 or 4");
    }
    GeneratorReport rep;
    rep.dim = sys.dim();
    rep.lambda = sys.lambda;
    rep.order = order;
    rep.flavor = Flavor::redfield;
    rep.markov = markov;
    rep.time = time;
    rep.k4_terms = k4_terms;
    rep.l0 = hamiltonian_superop(sys.joint_hamiltonian());
    rep.provenance.push_back("l0: -i[H1 x id + id x H2, .]");

    std::ostringstream tag;
    tag << "k2: joint second-order dissipator, kappa=" << sys.policy.kappa;
    rep.k2 = joint_k2(sys, markov, time).matrix;
    if (markov == MarkovKind::finite_time) {
        rep.k2_t = std::make_shared<TimeDependentGenerator>(
            detail::k2_terms(joint_modes(sys), sys.dim(), sys.bath, sys.policy));
        tag << ", at t=" << time;
    }
    rep.provenance.push_back(tag.str());

    if (order == 4) {
        std::ostringstream tag4;
        tag4 << "k4: joint fourth-order dissipator, kappa=" << sys.policy.kappa;
        rep.k4 = joint_k4(sys, k4_terms, markov, time).matrix;
        if (markov == MarkovKind::finite_time) {
            rep.k4_t = std::make_shared<TimeDependentGenerator>(detail::k4_terms(
                joint_modes(sys), sys.dim(), sys.bath, sys.policy, k4_terms));
            tag4 << ", at t=" << time;
        }
        rep.provenance.push_back(tag4.str());
    } else {
        rep.k4 = Mat::Zero(rep.l0.rows(), rep.l0.cols());
    }
    return rep;
}

MapFamily MapFamily::transposition_mixture() {
    MapFamily fam;
    fam.dim = 2;
    fam.at = [](double t) {
        const double p = (1.0 - std::exp(-t)) / 2.0;
        Mat m = (1.0 - p) * Superoperator::identity(2).matrix +
                p * Superoperator::transposition(2).matrix;
        return Superoperator{2, std::move(m)};
    };
    return fam;
}

MapFamily MapFamily::semigroup(Mat generator) {
    const Superoperator gen = Superoperator::from_matrix(std::move(generator));
    MapFamily fam;
    fam.dim = gen.dim;
    fam.at = [gen](double t) { return Superoperator{gen.dim, expm(t * gen.matrix)}; };
    return fam;
}

PairDynamicsReport pair_dynamics_experiment(const MapFamily& family,
                                            const DensityMatrix& probe,
                                            const std::vector<double>& times,
                                            double tolerance) {
    const int d = family.dim;
    if (probe.op.rows() != Eigen::Index(d) * d) {
        throw DimensionMismatch(
            "pair_dynamics_experiment: probe must live on the doubled space");
    }
    PairDynamicsReport rep;
    rep.tolerance = tolerance;
    for (double t : times) {
        if (t < 0) throw NegativeTime("pair_dynamics_experiment: negative time");
        const Superoperator lam = family.at(t);
        const Mat one = tensor_product_map(lam, Superoperator::identity(d))
                            .apply(probe.op);
        const Mat two = tensor_product_map(lam, lam).apply(probe.op);
        auto spectrum = [](const Mat& m) {
            Eigen::SelfAdjointEigenSolver<Mat> es((m + m.adjoint()) / 2.0,
                                                  Eigen::EigenvaluesOnly);
            return RealVec(es.eigenvalues());
        };
        rep.times.push_back(t);
        rep.spectra_one_sided.push_back(spectrum(one));
        rep.spectra_two_sided.push_back(spectrum(two));
        rep.min_one_sided.push_back(rep.spectra_one_sided.back()(0));
        rep.min_two_sided.push_back(rep.spectra_two_sided.back()(0));
        if (!rep.first_negative_time && rep.min_one_sided.back() < -tolerance) {
            rep.first_negative_time = t;
        }
    }
    return rep;
}

}  // namespace oqs
