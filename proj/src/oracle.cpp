#include "oqs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace oqs {

namespace {

double bose(double beta, double omega) { return 1.0 / std::expm1(beta * omega); }

constexpr double gibbs_tail_bound = 1e-6;
constexpr double top_population_bound = 1e-4;

// smallest cutoff with Gibbs tail e^{-beta w (n_max+1)} <= bound
int cutoff_for(double beta, double omega) {
    const int n = int(std::ceil(-std::log(gibbs_tail_bound) / (beta * omega))) - 1;
    return std::max(1, n);
}

struct BathSpace {
    int dim = 1;
    RealVec energies;   // diagonal of H_R
    RealVec gibbs;      // diagonal of rho_R, normalized
    Mat b;              // collective coordinate sum_m g_m (a_m + a_m^dag)
    std::vector<Mat> top_projectors;  // per-mode top-Fock-level projector
};

BathSpace build_bath_space(const FiniteBath& bath) {
    bath.validate();
    BathSpace bs;
    for (const BathMode& m : bath.modes) bs.dim *= m.fock_cutoff + 1;
    bs.energies = RealVec::Zero(bs.dim);
    bs.b = Mat::Zero(bs.dim, bs.dim);
    Mat left = Mat::Identity(1, 1);
    int right_dim = bs.dim;
    for (std::size_t mi = 0; mi < bath.modes.size(); ++mi) {
        const BathMode& m = bath.modes[mi];
        const int f = m.fock_cutoff + 1;
        right_dim /= f;
        Mat x = Mat::Zero(f, f);  // a + a^dag
        for (int n = 1; n < f; ++n) {
            x(n - 1, n) = std::sqrt(double(n));
            x(n, n - 1) = std::sqrt(double(n));
        }
        const Mat right = Mat::Identity(right_dim, right_dim);
        bs.b += m.coupling * kron(kron(left, x), right);
        Mat top = Mat::Zero(f, f);
        top(f - 1, f - 1) = 1.0;
        bs.top_projectors.push_back(kron(kron(left, top), right));
        // accumulate mode energies on the running index layout
        RealVec e = RealVec::Zero(bs.dim);
        const int left_dim = int(left.rows());
        for (int l = 0; l < left_dim; ++l)
            for (int n = 0; n < f; ++n)
                for (int r = 0; r < right_dim; ++r)
                    e((Eigen::Index(l) * f + n) * right_dim + r) = m.omega * n;
        bs.energies += e;
        left = kron(left, Mat::Identity(f, f));
    }
    bs.gibbs = (-bath.beta * bs.energies.array()).exp();
    bs.gibbs /= bs.gibbs.sum();
    return bs;
}

// interaction-picture coupling operator e^{i H_S u} A e^{-i H_S u}
Mat dressed(const Spectrum& sp, const Mat& a_eigenbasis, double u) {
    const int d = int(sp.eigenvalues.size());
    Mat m(d, d);
    for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s)
            m(r, s) = a_eigenbasis(r, s) *
                      std::exp(cplx(0.0, (sp.eigenvalues(r) - sp.eigenvalues(s)) * u));
    return sp.eigenvectors * m * sp.eigenvectors.adjoint();
}

// projected double-commutator block Tr_R(L(u) L(v) [X x rho_R])
Mat projected_block(const Spectrum& sp, const Mat& a_eigenbasis, const FiniteBath& bath,
                    double u, double v) {
    const Mat au = dressed(sp, a_eigenbasis, u);
    const Mat av = dressed(sp, a_eigenbasis, v);
    const cplx fwd = bath.correlation(u - v);
    return fwd * commutator_left_superop(av, au) +
           std::conj(fwd) * commutator_right_superop(au, av);
}

template <typename F>
Mat simpson(F&& f, double a, double b, int panels) {
    Mat acc = f(a) + f(b);
    const double h = (b - a) / (2 * panels);
    for (int i = 1; i < 2 * panels; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    }
    return (h / 3.0) * acc;
}

}  // namespace

int FiniteBath::dim() const {
    int d = 1;
    for (const BathMode& m : modes) d *= m.fock_cutoff + 1;
    return d;
}

cplx FiniteBath::correlation(double t) const {
    cplx c = 0.0;
    for (const BathMode& m : modes) {
        const double n = bose(beta, m.omega);
        const cplx phase = std::exp(cplx(0.0, -m.omega * t));
        c += m.coupling * m.coupling * ((n + 1.0) * phase + n * std::conj(phase));
    }
    return c;
}

void FiniteBath::validate() const {
    if (modes.empty()) throw std::invalid_argument("FiniteBath: no modes");
    if (beta <= 0) throw std::invalid_argument("FiniteBath: beta must be positive");
    for (const BathMode& m : modes) {
        if (m.omega <= 0) throw std::invalid_argument("FiniteBath: mode frequency <= 0");
        if (m.fock_cutoff < 1) throw std::invalid_argument("FiniteBath: cutoff < 1");
        const double tail = std::exp(-beta * m.omega * (m.fock_cutoff + 1));
        if (tail > gibbs_tail_bound) {
            throw std::invalid_argument(
                "FiniteBath: Gibbs weight beyond the Fock cutoff exceeds 1e-6");
        }
    }
}

double FiniteBath::recurrence_time() const {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        gap = std::min(gap, modes[i].omega);
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
            gap = std::min(gap, std::abs(modes[i].omega - modes[j].omega));
        }
    }
    return 2.0 * M_PI / gap;
}

ExactReducedResult exact_reduced(const SystemSpec& sys, const FiniteBath& bath,
                                 double lambda, const DensityMatrix& rho0,
                                 const std::vector<double>& times, int dimension_cap) {
    require_hermitian(sys.h);
    const int ds = int(sys.h.rows());
    if (long(ds) * bath.dim() > dimension_cap) {
        throw DimensionCap("exact_reduced: total dimension exceeds the cap");
    }
    const BathSpace bs = build_bath_space(bath);

    Mat a_tot = Mat::Zero(ds, ds);
    for (const Mat& a : sys.couplings) {
        require_hermitian(a);
        a_tot += a;
    }
    const Mat id_s = Mat::Identity(ds, ds);
    const Mat id_r = Mat::Identity(bs.dim, bs.dim);
    Mat h = kron(sys.h, id_r);
    h += kron(id_s, Mat(bs.energies.cast<cplx>().asDiagonal()));
    h += lambda * kron(a_tot, bs.b);

    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Mat& u = es.eigenvectors();
    const RealVec& ev = es.eigenvalues();

    Mat rho_full = kron(rho0.op, Mat(bs.gibbs.cast<cplx>().asDiagonal()));
    const Mat r0 = u.adjoint() * rho_full * u;

    ExactReducedResult out;
    for (double t : times) {
        if (t < 0) throw NegativeTime("exact_reduced: negative time");
        Vec phases(ev.size());
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            phases(i) = std::exp(cplx(0.0, -ev(i) * t));
        }
        const Mat rt_eig = phases.asDiagonal() * r0 * phases.conjugate().asDiagonal();
        const Mat rt = u * rt_eig * u.adjoint();
        out.times.push_back(t);
        out.states.push_back(partial_trace(rt, ds, bs.dim, 1));
        for (const Mat& top : bs.top_projectors) {
            const double pop = (rt * kron(id_s, top)).trace().real();
            out.top_population = std::max(out.top_population, pop);
        }
    }
    out.truncation_warning = out.top_population > top_population_bound;
    return out;
}

DysonTerm dyson_term(const SystemSpec& sys, const FiniteBath& bath, int n, double t) {
    if (n != 2 && n != 4) {
        throw std::invalid_argument("dyson_term: order must be 2 or 4");
    }
    if (t < 0) throw NegativeTime("dyson_term: t must be >= 0");
    require_hermitian(sys.h);
    bath.validate();
    const int ds = int(sys.h.rows());
    const Eigen::Index nn = Eigen::Index(ds) * ds;
    DysonTerm term;
    term.order = n;
    term.time = t;
    if (t == 0) {
        term.value = Superoperator{ds, Mat::Zero(nn, nn)};
        return term;
    }
    const Spectrum sp = eig_hermitian(sys.h);
    Mat a_tot = Mat::Zero(ds, ds);
    for (const Mat& a : sys.couplings) a_tot += a;
    const Mat ae = sp.eigenvectors.adjoint() * a_tot * sp.eigenvectors;

    auto block = [&](double u, double v) {
        return projected_block(sp, ae, bath, u, v);
    };
    const Mat d2 = simpson([&](double t1) { return block(t, t1); }, 0.0, t, 200);
    if (n == 2) {
        term.value = Superoperator{ds, d2};
        return term;
    }
    const Mat inner = simpson(
        [&](double t2) {
            if (t2 == 0) return Mat(Mat::Zero(nn, nn));
            const int panels = std::max(8, int(std::ceil(50.0 * t2 / t)));
            return simpson([&](double t3) { return block(t2, t3); }, 0.0, t2, panels);
        },
        0.0, t, 100);
    term.value = Superoperator{ds, Mat(d2 * inner)};
    return term;
}

MarkovErrorReport markov_error(const SystemSpec& sys, const FiniteBath& bath,
                               const BathModel& model, double lambda,
                               const DensityMatrix& rho0, double tau_max, int grid,
                               double fit_tol) {
    if (grid < 2) throw std::invalid_argument("markov_error: grid too small");
    MarkovErrorReport rep;
    rep.recurrence_time = bath.recurrence_time();

    // correlation-fit quality on t in [0, 5 correlation times]
    const double t_probe = 5.0 * model.correlation_time();
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = t_probe * i / 200.0;
        const cplx target = correlation(model, Sign::plus, t);
        num += std::norm(bath.correlation(t) - target);
        den += std::norm(target);
    }
    rep.fit_residual = std::sqrt(num / den);
    if (rep.fit_residual > fit_tol) {
        throw FitFailure("markov_error: finite bath does not match the model correlation");
    }

    std::vector<double> times;
    for (int i = 0; i < grid; ++i) {
        const double tau = tau_max * i / (grid - 1);
        rep.tau.push_back(tau);
        times.push_back(lambda == 0.0 ? tau : tau / (lambda * lambda));
    }

    const ExactReducedResult exact =
        exact_reduced(sys, bath, lambda, rho0, times);
    const EigenoperatorSet es = eigenoperators(sys.h, sys.couplings);
    const GeneratorReport gen = assemble(sys.h, es, model, lambda, 2, Flavor::redfield,
                                         MarkovKind::infinite_limit);
    const EvolutionResult markov = evolve_static(gen.total(), rho0, times);

    for (std::size_t i = 0; i < times.size(); ++i) {
        const double d = trace_distance(exact.states[i], markov.states[i]);
        rep.distance.push_back(d);
        rep.max_distance = std::max(rep.max_distance, d);
    }
    return rep;
}

FiniteBath fit_finite_bath(const BathModel& model, const std::vector<double>& freqs,
                           double t_max, int grid) {
    if (freqs.empty()) throw std::invalid_argument("fit_finite_bath: no frequencies");
    const int n = int(freqs.size());
    // rows: Re and Im of the correlation on the t-grid; unknowns: g_m^2 >= 0
    Eigen::MatrixXd a(2 * (grid + 1), n);
    Eigen::VectorXd b(2 * (grid + 1));
    for (int i = 0; i <= grid; ++i) {
        const double t = t_max * i / grid;
        const cplx target = correlation(model, Sign::plus, t);
        b(2 * i) = target.real();
        b(2 * i + 1) = target.imag();
        for (int m = 0; m < n; ++m) {
            const double occ = bose(model.beta, freqs[m]);
            const cplx basis = (occ + 1.0) * std::exp(cplx(0.0, -freqs[m] * t)) +
                               occ * std::exp(cplx(0.0, freqs[m] * t));
            a(2 * i, m) = basis.real();
            a(2 * i + 1, m) = basis.imag();
        }
    }
    // nonnegative least squares: restricted re-solves with negative weights
    // clamped out until the active set is feasible
    std::vector<bool> active(n, true);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int pass = 0; pass < n + 1; ++pass) {
        std::vector<int> idx;
        for (int m = 0; m < n; ++m) {
            if (active[m]) idx.push_back(m);
        }
        if (idx.empty()) break;
        Eigen::MatrixXd sub(a.rows(), idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) sub.col(k) = a.col(idx[k]);
        const Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(b);
        bool feasible = true;
        x.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (sol(k) < 0) {
                active[idx[k]] = false;
                feasible = false;
            } else {
                x(idx[k]) = sol(k);
            }
        }
        if (feasible) break;
    }
    if (x.maxCoeff() <= 0) {
        throw FitFailure("fit_finite_bath: no mode carries positive weight");
    }

    FiniteBath bath;
    bath.beta = model.beta;
    for (int m = 0; m < n; ++m) {
        if (x(m) <= 1e-14) continue;  // zero-weight modes only inflate the dimension
        BathMode mode;
        mode.omega = freqs[m];
        mode.coupling = std::sqrt(x(m));
        mode.fock_cutoff = cutoff_for(model.beta, freqs[m]);
        bath.modes.push_back(mode);
    }
    bath.validate();
    return bath;
}

namespace {

double fit_residual_for(const BathModel& model, const std::vector<double>& freqs,
                        double t_max) {
    FiniteBath bath;
    try {
        bath = fit_finite_bath(model, freqs, t_max);
    } catch (const FitFailure&) {
        return std::numeric_limits<double>::infinity();
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = t_max * i / 200.0;
        const cplx target = correlation(model, Sign::plus, t);
        num += std::norm(bath.correlation(t) - target);
        den += std::norm(target);
    }
    return std::sqrt(num / den);
}

}  // namespace

FiniteBath fit_finite_bath(const BathModel& model, int n_modes, double t_max) {
    if (n_modes < 1) throw std::invalid_argument("fit_finite_bath: n_modes < 1");
    if (t_max <= 0) throw std::invalid_argument("fit_finite_bath: t_max <= 0");
    // frequency placement: scan the bandwidth of an equispaced comb, then
    // refine each frequency by local search with the weight fit re-solved
    std::vector<double> best;
    double best_res = std::numeric_limits<double>::infinity();
    for (int ds = 4; ds <= 28; ++ds) {
        const double spacing = 0.1 * ds * M_PI / t_max;
        for (int fo = 1; fo <= 7; ++fo) {
            for (int st = 0; st <= 3; ++st) {  // allow a mildly stretched comb
                std::vector<double> freqs;
                for (int m = 0; m < n_modes; ++m) {
                    freqs.push_back(spacing * (m + 0.1 * fo) * (1.0 + 0.025 * st * m));
                }
                const double res = fit_residual_for(model, freqs, t_max);
                if (res < best_res) {
                    best_res = res;
                    best = freqs;
                }
            }
        }
    }
    if (best.empty()) throw FitFailure("fit_finite_bath: no feasible frequency comb");
    for (int sweep = 0; sweep < 5; ++sweep) {
        for (int m = 0; m < n_modes; ++m) {
            std::vector<double> trial = best;
            for (int step = -8; step <= 8; ++step) {
                if (step == 0) continue;
                trial[m] = best[m] * (1.0 + 0.05 * step);
                if (trial[m] <= 0) continue;
                const double res = fit_residual_for(model, trial, t_max);
                if (res < best_res) {
                    best_res = res;
                    best = trial;
                }
            }
        }
    }
    return fit_finite_bath(model, best, t_max);
}

}  // namespace oqs
