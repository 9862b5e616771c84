// Thermal-bath models: two-point correlation functions Omega^{+/-}(t), their
// half-Fourier transforms, fourth-order kernel products and triple transforms,
// and the cross-correlation policy for two subsystems in a common bath.
//
// All coupling channels share one bath operator, so the per-label correlation
// matrix is flat: Omega_{jk}(t) equals the kind's correlation for every (j,k)
// within one subsystem. Cross-subsystem entries are scaled by the policy
// factor kappa (kappa = 0 reproduces the vanishing-cross-correlation
// hypothesis; kappa = 1 is a fully common bath).
//
// Sign convention: Omega^+(t) is the forward two-point function, Omega^-(t)
// its complex conjugate, and hat Omega^{+/-}(w) = int_0^inf e^{-i w t}
// Omega^{+/-}(t) dt. The thermal spectral function obeying detailed balance
// gamma(-w) = e^{-beta w} gamma(w) is gamma(w) = 2 Re hat Omega^-(w).

#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "oqs/types.hpp"

namespace oqs {

enum class BathKind { analytic_exponential, ohmic, custom_tabulated };
enum class Sign { plus, minus };

struct BathModel {
    BathKind kind = BathKind::analytic_exponential;
    double beta = 1.0;

    // analytic-exponential: Omega^+(t) = amplitude * exp(-t / tau)
    double amplitude = 1.0;
    double tau = 1.0;

    // ohmic: J(w) = eta * w * exp(-w / omega_c)
    double eta = 1.0;
    double omega_c = 1.0;

    // custom-tabulated: uniform t-grid, cubic interpolation
    std::vector<double> table_t;
    std::vector<cplx> table_omega;

    static BathModel exponential(double amplitude, double tau, double beta);
    static BathModel ohmic(double eta, double omega_c, double beta);
    static BathModel tabulated(std::vector<double> t, std::vector<cplx> omega, double beta);
    // two-column-complex CSV: t, Re Omega, Im Omega; uniform t-grid
    static BathModel tabulated_from_csv(const std::string& path, double beta);

    // decay time scale of the correlation (used to pick quadrature horizons)
    double correlation_time() const;
};

// Scaling of correlations between coupling operators of different subsystems.
struct CrossCorrelationPolicy {
    double kappa = 0.0;

    static CrossCorrelationPolicy zero() { return {0.0}; }
    static CrossCorrelationPolicy full() { return {1.0}; }
    static CrossCorrelationPolicy scaled(double k);
};

// Coupling label: subsystem tag (0-based) plus channel index within it.
struct CouplingLabel {
    int subsystem = 0;
    int channel = 0;
};

// Kind correlation Omega^{+/-}(t); label-independent within one subsystem.
cplx correlation(const BathModel& bath, Sign sign, double t);

// Labeled entry Omega^{+/-}_{aj;bk}(t); cross-subsystem entries scale by kappa.
cplx correlation(const BathModel& bath, CouplingLabel a, CouplingLabel b, Sign sign,
                 double t, const CrossCorrelationPolicy& policy = {});

// hat Omega^{+/-}(w) = int_0^inf e^{-iwt} Omega^{+/-}(t) dt.
cplx half_fourier(const BathModel& bath, Sign sign, double omega);
cplx half_fourier(const BathModel& bath, CouplingLabel a, CouplingLabel b, Sign sign,
                  double omega, const CrossCorrelationPolicy& policy = {});

// int_0^t e^{-iwt'} Omega^{+/-}(t') dt' (the finite-time generator coefficient).
cplx finite_half_fourier(const BathModel& bath, Sign sign, double omega, double t);

// Thermal spectral function gamma(w) = 2 Re hat Omega^-(w).
double spectral_function(const BathModel& bath, double omega);

// A fourth-order kernel is a product of two-point functions. Each factor
// Omega^+_{label[u], label[v]}(c . tvec) is described by its slot pair (u, v)
// into the index tuple and integer combination c of (t1, t2, t3).
struct KernelFactor {
    int u = 0, v = 0;
    std::array<int, 3> time_combo{};
};
struct FourthOrderTerm {
    std::vector<KernelFactor> factors;
};

// Registered terms; p = 1 ships (Omega^+(t1+t2) * Omega^+(t2+t3)).
const FourthOrderTerm& fourth_order_term(int p);
bool fourth_order_term_registered(int p);
void register_fourth_order_term(int p, FourthOrderTerm term);

// Omega^(p)(tvec) for the labeled index tuple.
cplx fourth_order_kernel(const BathModel& bath, int p,
                         const std::array<CouplingLabel, 4>& labels,
                         const std::array<double, 3>& tvec,
                         const CrossCorrelationPolicy& policy = {});

// hat Omega^(p)(Delta) = int_0^inf^3 e^{-i Delta . t} Omega^(p)(t) d^3t.
// Closed form for the exponential kind, nested quadrature otherwise.
cplx triple_transform(const BathModel& bath, int p,
                      const std::array<CouplingLabel, 4>& labels,
                      const std::array<double, 3>& delta,
                      const CrossCorrelationPolicy& policy = {});

// Finite-domain variant over 0 <= t1 <= t, t2 <= t - t1, t3 <= t - t1 - t2.
cplx finite_triple_transform(const BathModel& bath, int p,
                             const std::array<CouplingLabel, 4>& labels,
                             const std::array<double, 3>& delta, double t,
                             const CrossCorrelationPolicy& policy = {});

}  // namespace oqs
