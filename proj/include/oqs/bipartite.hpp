// Two non-interacting subsystems immersed in a common bath: joint dissipative
// generators, factorization of the joint dynamics into a direct-sum lift, and
// the entanglement positivity experiments (transposition witness, pair
// dynamics of one-sided and two-sided map extensions).

#pragma once

#include <optional>

#include "oqs/generators.hpp"

namespace oqs {

// H = H1 x id + id x H2, both subsystems coupled to one bath with the same
// coupling constant; cross-subsystem bath correlations scale with the policy.
struct JointSystem {
    Mat h1, h2;
    std::vector<Mat> couplings1, couplings2;
    BathModel bath;
    CrossCorrelationPolicy policy;
    double lambda = 0.1;

    Mat joint_hamiltonian() const;
    int dim() const { return int(h1.rows() * h2.rows()); }
};

// Projector onto the maximally entangled two-qubit state (id - SWAP)/2 range.
DensityMatrix singlet_state();

struct TranspositionDemo {
    DensityMatrix input;       // the singlet projector
    Mat output;                // (T x id)[input]
    RealVec input_spectrum;    // (0, 0, 0, 1)
    RealVec output_spectrum;   // (-1/2, 1/2, 1/2, 1/2)
};

// One-sided transposition applied to the singlet: positive map, non-positive
// extension; the canonical witness that positivity alone does not compose.
TranspositionDemo transposition_demo();

Superoperator joint_k2(const JointSystem& sys,
                       MarkovKind markov = MarkovKind::infinite_limit,
                       double time = 0.0);

Superoperator joint_k4(const JointSystem& sys, const std::vector<int>& terms = {1},
                       MarkovKind markov = MarkovKind::infinite_limit,
                       double time = 0.0);

struct FactorizationReport {
    Superoperator k_joint;
    Superoperator k_direct_sum;     // K1 x id-lift + id-lift x K2
    double residual = 0.0;          // Frobenius norm of the difference
    double coupling_block_norm = 0.0;  // cross-subsystem contribution alone
};

FactorizationReport factorization_check(const JointSystem& sys, int order,
                                        MarkovKind markov = MarkovKind::infinite_limit,
                                        double time = 0.0,
                                        const std::vector<int>& k4_terms = {1});

// Full joint right-hand side L0 + lambda^2 K2 (+ lambda^4 K4); non-secular
// only, since the joint Hamiltonian is generically degenerate.
GeneratorReport assemble_joint(const JointSystem& sys, int order,
                               MarkovKind markov = MarkovKind::infinite_limit,
                               double time = 0.0,
                               const std::vector<int>& k4_terms = {1});

// One-parameter family of single-system dynamical maps t -> Lambda_t.
struct MapFamily {
    int dim = 0;
    std::function<Superoperator(double)> at;

    // (1+e^-t)/2 id + (1-e^-t)/2 T on qubits: positive at every t, but the
    // one-sided extension loses positivity past a finite threshold.
    static MapFamily transposition_mixture();
    // Lambda_t = exp(t L) for a fixed generator matrix.
    static MapFamily semigroup(Mat generator);
};

struct PairDynamicsReport {
    std::vector<double> times;
    std::vector<RealVec> spectra_one_sided;  // (Lambda_t x id)[probe]
    std::vector<RealVec> spectra_two_sided;  // (Lambda_t x Lambda_t)[probe]
    std::vector<double> min_one_sided;
    std::vector<double> min_two_sided;
    // first grid time where the one-sided extension dips below -tolerance
    std::optional<double> first_negative_time;
    double tolerance = 1e-9;
};

PairDynamicsReport pair_dynamics_experiment(const MapFamily& family,
                                            const DensityMatrix& probe,
                                            const std::vector<double>& times,
                                            double tolerance = 1e-9);

}  // namespace oqs
