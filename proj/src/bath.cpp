#include "oqs/bath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oqs {

namespace {

using boost::math::quadrature::gauss_kronrod;

double quad(const std::function<double(double)>& f, double a, double b,
            double tol = 1e-12) {
    return gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol);
}

cplx quad_c(const std::function<cplx(double)>& f, double a, double b,
            double tol = 1e-12) {
    const double re = quad([&](double x) { return f(x).real(); }, a, b, tol);
    const double im = quad([&](double x) { return f(x).imag(); }, a, b, tol);
    return {re, im};
}

// Trigamma for complex argument: shift until |z| is large, then the
// asymptotic series psi1(z) ~ 1/z + 1/(2 z^2) + sum B_2n / z^(2n+1).
cplx trigamma(cplx z) {
    cplx acc = 0.0;
    while (z.real() < 12.0) {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    const cplx iz = 1.0 / z;
    const cplx iz2 = iz * iz;
    // Bernoulli coefficients B2/2!, ... for the psi' expansion
    cplx series = iz + 0.5 * iz2 +
                  iz * iz2 * (1.0 / 6.0 +
                              iz2 * (-1.0 / 30.0 +
                                     iz2 * (1.0 / 42.0 +
                                            iz2 * (-1.0 / 30.0 + iz2 * (5.0 / 66.0)))));
    return acc + series;
}

double bose(double beta, double omega) { return 1.0 / std::expm1(beta * omega); }

// Natural cubic spline on a uniform grid (for the tabulated kind).
struct Spline {
    std::vector<double> x;
    std::vector<cplx> y, m;  // second derivatives

    Spline() = default;
    Spline(std::vector<double> xs, std::vector<cplx> ys)
        : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        m.assign(n, 0.0);
        if (n < 3) return;
        const double h = x[1] - x[0];
        std::vector<cplx> rhs(n, 0.0);
        std::vector<double> diag(n, 2.0), sub(n, 0.5);
        for (std::size_t i = 1; i + 1 < n; ++i)
            rhs[i] = 3.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        // Thomas solve with natural boundary m[0] = m[n-1] = 0
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = sub[i] / diag[i - 1];
            diag[i] -= w * sub[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m[i] = (rhs[i] - sub[i] * m[i + 1]) / diag[i];
            if (i == 1) break;
        }
    }

    cplx eval(double t) const {
        if (x.empty()) throw NonIntegrable("tabulated bath: empty table");
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return 0.0;  // decayed beyond the table
        const double h = x[1] - x[0];
        const auto i = std::min<std::size_t>(
            static_cast<std::size_t>((t - x.front()) / h), x.size() - 2);
        const double a = (x[i + 1] - t) / h, b = (t - x[i]) / h;
        return a * y[i] + b * y[i + 1] +
               ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * (h * h) / 6.0;
    }
};

Spline make_table_spline(const BathModel& bath) {
    return Spline(bath.table_t, bath.table_omega);
}

const Spline& table_spline(const BathModel& bath) {
    // keyed by the table buffer, which is shared for copies of one model
    static std::map<const void*, Spline> cache;
    const void* key = static_cast<const void*>(bath.table_t.data());
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, make_table_spline(bath)).first;
    }
    return it->second;
}

cplx ohmic_correlation(const BathModel& b, double t) {
    const cplx a(1.0 / b.omega_c, t);
    const cplx ac(1.0 / b.omega_c, -t);
    const cplx zero_temp = 1.0 / (a * a);
    const cplx thermal =
        (trigamma(a / b.beta + 1.0) + trigamma(ac / b.beta + 1.0)) / (b.beta * b.beta);
    return b.eta * (zero_temp + thermal);
}

double ohmic_J(const BathModel& b, double w) {
    return b.eta * w * std::exp(-w / b.omega_c);
}

// hat Omega^+(w0) evaluated in the frequency domain: the delta part gives the
// real component, the principal value gives the imaginary one.
cplx ohmic_half_fourier_plus(const BathModel& b, double w0) {
    const double wc = b.omega_c, beta = b.beta;
    const double W = 50.0 * wc + 20.0 / beta + 2.0 * std::abs(w0);  // decayed tail
    auto f_up = [&](double w) { return ohmic_J(b, w) * (bose(beta, w) + 1.0); };
    auto f_dn = [&](double w) { return ohmic_J(b, w) * bose(beta, w); };

    if (std::abs(w0) < 1e-12) {
        // combined integrand -J(w)/w stays finite; Re part is the w->0 limit
        const double re = M_PI * b.eta / beta;
        const double im = -b.eta * wc;
        return {re, im};
    }

    double re, im;
    if (w0 > 0) {
        re = M_PI * f_dn(w0);
        const double i_up = quad([&](double w) { return f_up(w) / (w + w0); }, 0.0, W);
        // PV around the pole of f_dn / (w - w0)
        const double f0 = f_dn(w0);
        double i_dn = quad(
            [&](double w) {
                const double d = w - w0;
                return std::abs(d) < 1e-14 ? 0.0 : (f_dn(w) - f0) / d;
            },
            0.0, 2.0 * w0);
        i_dn += quad([&](double w) { return f_dn(w) / (w - w0); }, 2.0 * w0, W);
        im = -i_up + i_dn;
    } else {
        const double wa = -w0;
        re = M_PI * f_up(wa);
        const double f0 = f_up(wa);
        // pole of f_up / (w + w0) at w = -w0
        double i_up = quad(
            [&](double w) {
                const double d = w - wa;
                return std::abs(d) < 1e-14 ? 0.0 : (f_up(w) - f0) / d;
            },
            0.0, 2.0 * wa);
        i_up += quad([&](double w) { return f_up(w) / (w - wa); }, 2.0 * wa, W);
        const double i_dn = quad([&](double w) { return f_dn(w) / (w - w0); }, 0.0, W);
        im = -i_up + i_dn;
    }
    return {re, im};
}

void check_table_decay(const BathModel& bath) {
    if (bath.table_t.size() < 4) {
        throw NonIntegrable("tabulated bath: table too short");
    }
    const double head = std::abs(bath.table_omega.front());
    const double tail = std::abs(bath.table_omega.back());
    if (head == 0.0 || tail > 1e-3 * head) {
        throw NonIntegrable("tabulated bath: correlation fails the decay probe");
    }
}

}  // namespace

BathModel BathModel::exponential(double amplitude, double tau, double beta) {
    if (tau <= 0 || beta <= 0) {
        throw std::invalid_argument("exponential bath: tau and beta must be positive");
    }
    BathModel b;
    b.kind = BathKind::analytic_exponential;
    b.amplitude = amplitude;
    b.tau = tau;
    b.beta = beta;
    return b;
}

BathModel BathModel::ohmic(double eta, double omega_c, double beta) {
    if (omega_c <= 0 || beta <= 0) {
        throw std::invalid_argument("ohmic bath: omega_c and beta must be positive");
    }
    BathModel b;
    b.kind = BathKind::ohmic;
    b.eta = eta;
    b.omega_c = omega_c;
    b.beta = beta;
    return b;
}

BathModel BathModel::tabulated(std::vector<double> t, std::vector<cplx> omega,
                               double beta) {
    if (beta <= 0) throw std::invalid_argument("tabulated bath: beta must be positive");
    if (t.size() != omega.size()) {
        throw std::invalid_argument("tabulated bath: grid/value size mismatch");
    }
    BathModel b;
    b.kind = BathKind::custom_tabulated;
    b.beta = beta;
    b.table_t = std::move(t);
    b.table_omega = std::move(omega);
    if (b.table_t.size() < 4) {
        throw NonIntegrable("tabulated bath: table too short");
    }
    // decay is only checked where an infinite-horizon transform needs it, so
    // finite-time generators can run on non-decaying (e.g. few-mode) tables
    return b;
}

BathModel BathModel::tabulated_from_csv(const std::string& path, double beta) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bath table: " + path);
    std::vector<double> t;
    std::vector<cplx> om;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double ti, re, im;
        if (row >> ti >> re >> im) {
            t.push_back(ti);
            om.push_back({re, im});
        }
    }
    return tabulated(std::move(t), std::move(om), beta);
}

double BathModel::correlation_time() const {
    switch (kind) {
        case BathKind::analytic_exponential:
            return tau;
        case BathKind::ohmic:
            return std::max(1.0 / omega_c, beta / (2.0 * M_PI));
        case BathKind::custom_tabulated:
            return table_t.empty() ? 1.0 : table_t.back() / 10.0;
    }
    return 1.0;
}

CrossCorrelationPolicy CrossCorrelationPolicy::scaled(double k) {
    if (k < 0.0 || k > 1.0) {
        throw std::invalid_argument("cross-correlation factor must lie in [0, 1]");
    }
    return {k};
}

cplx correlation(const BathModel& bath, Sign sign, double t) {
    if (t < 0) throw NegativeTime("correlation: t must be >= 0");
    cplx plus;
    switch (bath.kind) {
        case BathKind::analytic_exponential:
            plus = bath.amplitude * std::exp(-t / bath.tau);
            break;
        case BathKind::ohmic:
            plus = ohmic_correlation(bath, t);
            break;
        case BathKind::custom_tabulated:
            plus = table_spline(bath).eval(t);
            break;
    }
    return sign == Sign::plus ? plus : std::conj(plus);
}

cplx correlation(const BathModel& bath, CouplingLabel a, CouplingLabel b, Sign sign,
                 double t, const CrossCorrelationPolicy& policy) {
    const double scale = (a.subsystem == b.subsystem) ? 1.0 : policy.kappa;
    if (scale == 0.0) return 0.0;
    return scale * correlation(bath, sign, t);
}

cplx half_fourier(const BathModel& bath, Sign sign, double omega) {
    if (sign == Sign::minus) {
        // hat Omega^-(w) = conj(hat Omega^+(-w))
        return std::conj(half_fourier(bath, Sign::plus, -omega));
    }
    switch (bath.kind) {
        case BathKind::analytic_exponential:
            return bath.amplitude / cplx(1.0 / bath.tau, omega);
        case BathKind::ohmic:
            return ohmic_half_fourier_plus(bath, omega);
        case BathKind::custom_tabulated: {
            check_table_decay(bath);
            const auto& sp = table_spline(bath);
            return quad_c(
                [&](double t) {
                    return sp.eval(t) * std::exp(cplx(0.0, -omega * t));
                },
                bath.table_t.front(), bath.table_t.back(), 1e-10);
        }
    }
    throw std::logic_error("unknown bath kind");
}

cplx half_fourier(const BathModel& bath, CouplingLabel a, CouplingLabel b, Sign sign,
                  double omega, const CrossCorrelationPolicy& policy) {
    const double scale = (a.subsystem == b.subsystem) ? 1.0 : policy.kappa;
    if (scale == 0.0) return 0.0;
    return scale * half_fourier(bath, sign, omega);
}

cplx finite_half_fourier(const BathModel& bath, Sign sign, double omega, double t) {
    if (t < 0) throw NegativeTime("finite_half_fourier: t must be >= 0");
    if (t == 0) return 0.0;
    if (bath.kind == BathKind::analytic_exponential) {
        // Omega is real for this kind, so both signs share the formula
        const cplx a(1.0 / bath.tau, omega);
        return bath.amplitude * (1.0 - std::exp(-a * t)) / a;
    }
    return quad_c(
        [&](double s) {
            return correlation(bath, sign, s) * std::exp(cplx(0.0, -omega * s));
        },
        0.0, t, 1e-11);
}

double spectral_function(const BathModel& bath, double omega) {
    return 2.0 * half_fourier(bath, Sign::minus, omega).real();
}

namespace {

std::map<int, FourthOrderTerm>& term_registry() {
    static std::map<int, FourthOrderTerm> reg = {
        // p = 1: Omega^+_{j l}(t1 + t2) * Omega^+_{k m}(t2 + t3)
        {1, FourthOrderTerm{{KernelFactor{0, 2, {1, 1, 0}},
                             KernelFactor{1, 3, {0, 1, 1}}}}},
    };
    return reg;
}

}  // namespace

const FourthOrderTerm& fourth_order_term(int p) {
    auto& reg = term_registry();
    auto it = reg.find(p);
    if (it == reg.end()) {
        throw UnregisteredTerm("fourth-order term p=" + std::to_string(p) +
                               " is not registered");
    }
    return it->second;
}

bool fourth_order_term_registered(int p) { return term_registry().count(p) != 0; }

void register_fourth_order_term(int p, FourthOrderTerm term) {
    term_registry()[p] = std::move(term);
}

cplx fourth_order_kernel(const BathModel& bath, int p,
                         const std::array<CouplingLabel, 4>& labels,
                         const std::array<double, 3>& tvec,
                         const CrossCorrelationPolicy& policy) {
    for (double t : tvec) {
        if (t < 0) throw NegativeTime("fourth_order_kernel: time components must be >= 0");
    }
    const FourthOrderTerm& term = fourth_order_term(p);
    cplx out = 1.0;
    for (const KernelFactor& f : term.factors) {
        const double arg = f.time_combo[0] * tvec[0] + f.time_combo[1] * tvec[1] +
                           f.time_combo[2] * tvec[2];
        out *= correlation(bath, labels[f.u], labels[f.v], Sign::plus, arg, policy);
    }
    return out;
}

namespace {

// Exponential-polynomial terms c * s^p * exp(-r s); closed under the nested
// integrals int_0^s exp(-beta u) f(u) du that build the finite-time triple
// transform over the ordered simplex.
struct ExpTerm {
    cplx c;
    cplx r;
    int p;
};
using ExpPoly = std::vector<ExpTerm>;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

ExpPoly integrate_from_zero(const ExpPoly& f, cplx beta, double t_scale) {
    ExpPoly out;
    for (const ExpTerm& term : f) {
        const cplx a = beta + term.r;
        if (std::abs(a) * t_scale < 1e-4) {
            // near-degenerate exponent: series in a
            cplx an = 1.0;
            for (int n = 0; n <= 6; ++n) {
                out.push_back({term.c * an / (factorial(n) * (term.p + n + 1)),
                               cplx(0.0), term.p + n + 1});
                an *= -a;
            }
        } else {
            const double pf = factorial(term.p);
            out.push_back({term.c * pf / std::pow(a, term.p + 1), cplx(0.0), 0});
            for (int q = 0; q <= term.p; ++q) {
                out.push_back({-term.c * pf / (factorial(q) * std::pow(a, term.p + 1 - q)),
                               a, q});
            }
        }
    }
    return out;
}

cplx evaluate(const ExpPoly& f, double s) {
    cplx out = 0.0;
    for (const ExpTerm& term : f) {
        const cplx expo = -term.r * s;
        if (expo.real() > 700.0) throw NonIntegrable("finite triple transform overflow");
        out += term.c * std::pow(s, term.p) * std::exp(expo);
    }
    return out;
}

// decay rate of each time variable plus the policy/amplitude prefactor
struct KernelRates {
    std::array<double, 3> rate{};
    cplx prefactor = 1.0;
};

KernelRates exponential_kernel_rates(const BathModel& bath, const FourthOrderTerm& term,
                                     const std::array<CouplingLabel, 4>& labels,
                                     const CrossCorrelationPolicy& policy) {
    KernelRates kr;
    for (const KernelFactor& f : term.factors) {
        const double scale =
            (labels[f.u].subsystem == labels[f.v].subsystem) ? 1.0 : policy.kappa;
        kr.prefactor *= scale * bath.amplitude;
        for (int i = 0; i < 3; ++i) kr.rate[i] += f.time_combo[i] / bath.tau;
    }
    return kr;
}

cplx generic_triple_quadrature(const BathModel& bath, int p,
                               const std::array<CouplingLabel, 4>& labels,
                               const std::array<double, 3>& delta,
                               const CrossCorrelationPolicy& policy, double horizon) {
    // iterated complex quadrature; adequate for moderate |delta| only
    auto inner = [&](double t1, double t2) {
        return quad_c(
            [&](double t3) {
                return fourth_order_kernel(bath, p, labels, {t1, t2, t3}, policy) *
                       std::exp(cplx(0.0, -(delta[0] * t1 + delta[1] * t2 + delta[2] * t3)));
            },
            0.0, horizon, 1e-9);
    };
    auto middle = [&](double t1) {
        return quad_c([&](double t2) { return inner(t1, t2); }, 0.0, horizon, 1e-8);
    };
    return quad_c([&](double t1) { return middle(t1); }, 0.0, horizon, 1e-7);
}

}  // namespace

cplx triple_transform(const BathModel& bath, int p,
                      const std::array<CouplingLabel, 4>& labels,
                      const std::array<double, 3>& delta,
                      const CrossCorrelationPolicy& policy) {
    const FourthOrderTerm& term = fourth_order_term(p);
    if (bath.kind == BathKind::analytic_exponential) {
        const KernelRates kr = exponential_kernel_rates(bath, term, labels, policy);
        cplx out = kr.prefactor;
        for (int i = 0; i < 3; ++i) {
            const cplx a(kr.rate[i], delta[i]);
            if (std::abs(a) < 1e-14) {
                throw NonIntegrable("triple_transform: non-decaying time variable");
            }
            out /= a;
        }
        return out;
    }
    const double horizon = 40.0 * bath.correlation_time();
    return generic_triple_quadrature(bath, p, labels, delta, policy, horizon);
}

cplx finite_triple_transform(const BathModel& bath, int p,
                             const std::array<CouplingLabel, 4>& labels,
                             const std::array<double, 3>& delta, double t,
                             const CrossCorrelationPolicy& policy) {
    if (t < 0) throw NegativeTime("finite_triple_transform: t must be >= 0");
    if (t == 0) return 0.0;
    const FourthOrderTerm& term = fourth_order_term(p);
    if (bath.kind == BathKind::analytic_exponential) {
        const KernelRates kr = exponential_kernel_rates(bath, term, labels, policy);
        // ordered-simplex substitution s_i = t_1 + ... + t_i turns the nested
        // triangular domain into 0 <= s1 <= s2 <= s3 <= t
        const cplx a1(kr.rate[0], delta[0]);
        const cplx a2(kr.rate[1], delta[1]);
        const cplx a3(kr.rate[2], delta[2]);
        const ExpPoly base{{cplx(1.0), cplx(0.0), 0}};
        const ExpPoly i1 = integrate_from_zero(base, a1 - a2, t);
        const ExpPoly i2 = integrate_from_zero(i1, a2 - a3, t);
        const ExpPoly i3 = integrate_from_zero(i2, a3, t);
        return kr.prefactor * evaluate(i3, t);
    }
    // nested finite-domain quadrature
    auto inner = [&](double t1, double t2) {
        return quad_c(
            [&](double t3) {
                return fourth_order_kernel(bath, p, labels, {t1, t2, t3}, policy) *
                       std::exp(cplx(0.0, -(delta[0] * t1 + delta[1] * t2 + delta[2] * t3)));
            },
            0.0, t - t1 - t2, 1e-9);
    };
    auto middle = [&](double t1) {
        return quad_c([&](double t2) { return inner(t1, t2); }, 0.0, t - t1, 1e-8);
    };
    return quad_c([&](double t1) { return middle(t1); }, 0.0, t, 1e-7);
}

}  // namespace oqs
