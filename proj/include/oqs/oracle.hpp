// Exact finite-bath reference dynamics: unitary evolution of the system plus
// a truncated bosonic bath, reduced dynamics by partial trace, perturbative
// term evaluation by projected nested quadrature, and comparison of the exact
// reduced dynamics against the weak-coupling generators.

#pragma once

#include <vector>

#include "oqs/bath.hpp"
#include "oqs/channels.hpp"
#include "oqs/generators.hpp"

namespace oqs {

struct SystemSpec {
    Mat h;                       // system Hamiltonian
    std::vector<Mat> couplings;  // Hermitian interaction operators
};

struct BathMode {
    double omega = 1.0;     // mode frequency
    double coupling = 0.0;  // g_m, couples g_m (a + a^dag)
    int fock_cutoff = 3;    // highest retained Fock level n_max
};

// Truncated bosonic bath; every system coupling operator couples to the one
// collective bath coordinate sum_m g_m (a_m + a_m^dag).
struct FiniteBath {
    std::vector<BathMode> modes;
    double beta = 1.0;

    int dim() const;  // product of (n_max + 1)
    // two-point function sum_m g_m^2 ((n_m+1) e^{-i w t} + n_m e^{i w t})
    cplx correlation(double t) const;
    // throws when a mode's Gibbs weight beyond its cutoff exceeds 1e-6
    void validate() const;
    // 2 pi over the smallest spectral gap of the mode frequencies
    double recurrence_time() const;
};

inline constexpr int default_dimension_cap = 4096;

struct ExactReducedResult {
    std::vector<double> times;
    std::vector<Mat> states;         // reduced system states
    double top_population = 0.0;     // worst top-Fock-level population seen
    bool truncation_warning = false; // top_population > 1e-4
};

// Full unitary evolution of rho0 x gibbs(bath) under
// H_S + H_R + lambda * (sum_a A_a) x B, reduced to the system.
ExactReducedResult exact_reduced(const SystemSpec& sys, const FiniteBath& bath,
                                 double lambda, const DensityMatrix& rho0,
                                 const std::vector<double>& times,
                                 int dimension_cap = default_dimension_cap);

struct DysonTerm {
    int order = 2;
    double time = 0.0;
    Superoperator value;  // projected interaction-picture superoperator
};

// Projected Dyson coefficients (coupling constant excluded): n=2 is the
// once-integrated double-commutator block, n=4 the ordered product of two
// such blocks.
DysonTerm dyson_term(const SystemSpec& sys, const FiniteBath& bath, int n, double t);

struct MarkovErrorReport {
    std::vector<double> tau;       // rescaled time grid tau = lambda^2 t
    std::vector<double> distance;  // trace distance exact vs generator
    double max_distance = 0.0;
    double fit_residual = 0.0;     // relative correlation mismatch of the fit
    double recurrence_time = 0.0;
};

// Trace-distance curve between the exact reduced dynamics and the
// second-order Markov semigroup built from `model`, over tau in [0, tau_max].
// Throws FitFailure when the finite bath's correlation deviates from the
// model by more than fit_tol (relative, on t in [0, 5 correlation times]).
MarkovErrorReport markov_error(const SystemSpec& sys, const FiniteBath& bath,
                               const BathModel& model, double lambda,
                               const DensityMatrix& rho0, double tau_max,
                               int grid = 21, double fit_tol = 0.05);

// Least-squares fit of mode weights g_m^2 >= 0 at the given frequencies so the
// finite bath's correlation matches the model's on t in [0, t_max]; cutoffs
// sized from the Gibbs tail bound.
FiniteBath fit_finite_bath(const BathModel& model, const std::vector<double>& freqs,
                           double t_max, int grid = 200);
FiniteBath fit_finite_bath(const BathModel& model, int n_modes, double t_max);

}  // namespace oqs
