// Reduced-dynamics generators: eigenoperator decomposition of the coupling,
// second- and fourth-order dissipative operators (finite-time and Markov
// limit), the secular (Davies) projection, and master-equation integration.
//
// Everything here lives in the Schroedinger picture: the assembled right-hand
// side is L_{H_S} + lambda^2 K2 (+ lambda^4 K4).

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "oqs/bath.hpp"
#include "oqs/channels.hpp"
#include "oqs/operator_core.hpp"

namespace oqs {

struct Eigenoperator {
    int r = 0, s = 0;        // |r><s| in the H_S eigenbasis
    double omega = 0.0;      // Bohr frequency eps_r - eps_s
    Mat op;                  // the operator in the original basis
    std::vector<cplx> bath_weights;  // Tr(V^dag A_a) per coupling operator
    cplx weight = 0.0;       // sum over couplings (flat-bath effective weight)
};

struct EigenoperatorSet {
    int dim = 0;
    Spectrum spectrum;
    std::vector<Eigenoperator> ops;  // d^2 entries
    std::vector<Mat> couplings;      // the A^S_a

    // sum_j weight_j V_j; equals sum_a A_a by construction
    Mat coupling_sum() const;
};

// Rejects spectra with gaps below `degeneracy_tol` (non-degenerate H_S only).
EigenoperatorSet eigenoperators(const Mat& h_s, const std::vector<Mat>& couplings,
                                double degeneracy_tol = 1e-10);

// Generator with explicit time dependence, kept as fixed superoperator
// templates weighted by scalar coefficient functions of t.
struct TimeDependentGenerator {
    int dim = 0;
    struct Term {
        Mat matrix;
        std::function<cplx(double)> coefficient;
    };
    std::vector<Term> terms;

    Mat at(double t) const;
};

Superoperator k2_markov(const EigenoperatorSet& es, const BathModel& bath);
Superoperator k2_finite_time(const EigenoperatorSet& es, const BathModel& bath, double t);
TimeDependentGenerator k2_time_dependent(const EigenoperatorSet& es, const BathModel& bath);

Superoperator k4_markov(const EigenoperatorSet& es, const BathModel& bath,
                        const std::vector<int>& terms = {1});
Superoperator k4_finite_time(const EigenoperatorSet& es, const BathModel& bath, double t,
                             const std::vector<int>& terms = {1});
TimeDependentGenerator k4_time_dependent(const EigenoperatorSet& es, const BathModel& bath,
                                         const std::vector<int>& terms = {1});

// Matrix of X -> (S[X^dag])^dag, the Hermitian-conjugate companion of a map.
// Each fourth-order term enters together with its companion so that the
// truncated sum stays hermiticity-preserving.
Mat hermitian_companion(const Mat& s, int dim);

// Davies averaging: keeps only the part of the generator that commutes with
// the free evolution (Bohr-frequency-diagonal in the H_S eigenbasis).
Superoperator secularize(const Superoperator& k, const EigenoperatorSet& es,
                         double freq_tol = 1e-10);

enum class Flavor { redfield, davies_secular };
enum class MarkovKind { finite_time, infinite_limit };

struct GeneratorReport {
    int dim = 0;
    Mat l0;      // -i[H_S, .]
    Mat k2;      // second-order dissipator (at `time` for finite_time kind)
    Mat k4;      // fourth-order dissipator; zero when order == 2
    double lambda = 0.0;
    int order = 2;  // 2 or 4
    Flavor flavor = Flavor::redfield;
    MarkovKind markov = MarkovKind::infinite_limit;
    double time = 0.0;  // evaluation time for the finite_time kind
    std::vector<int> k4_terms;
    std::vector<std::string> provenance;  // one line per assembled component

    // time-dependent dissipative parts, set for the finite_time kind
    std::shared_ptr<const TimeDependentGenerator> k2_t;
    std::shared_ptr<const TimeDependentGenerator> k4_t;

    Mat total() const;          // L0 + lambda^2 K2 + lambda^4 K4
    Mat total_at(double t) const;
};

GeneratorReport assemble(const Mat& h_s, const EigenoperatorSet& es, const BathModel& bath,
                         double lambda, int order, Flavor flavor, MarkovKind markov,
                         double time = 0.0, const std::vector<int>& k4_terms = {1});

struct EvolutionResult {
    std::vector<double> times;
    std::vector<Mat> states;
    std::vector<RealVec> eigenvalues;  // state spectra, ascending (may go negative)
    std::vector<double> traces;
};

EvolutionResult evolve(const GeneratorReport& report, const DensityMatrix& rho0,
                       const std::vector<double>& times);

// Direct integration of a fixed superoperator matrix (expm path).
EvolutionResult evolve_static(const Mat& generator, const DensityMatrix& rho0,
                              const std::vector<double>& times);

// Adaptive embedded Runge-Kutta for d vec(rho)/dt = L(t) vec(rho).
EvolutionResult evolve_ode(const std::function<Mat(double)>& generator_at,
                           const DensityMatrix& rho0, const std::vector<double>& times,
                           double local_error = 1e-9);

}  // namespace oqs
