#include "oqs/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "oqs/detail/assembly.hpp"

namespace oqs {

namespace detail {

namespace {

bool pair_allowed(PairFilter filter, const CouplingLabel& a, const CouplingLabel& b) {
    switch (filter) {
        case PairFilter::all: return true;
        case PairFilter::same_subsystem: return a.subsystem == b.subsystem;
        case PairFilter::cross_subsystem: return a.subsystem != b.subsystem;
    }
    return true;
}

bool tuple_allowed(PairFilter filter, const std::array<CouplingLabel, 4>& labels) {
    const bool same = labels[0].subsystem == labels[1].subsystem &&
                      labels[0].subsystem == labels[2].subsystem &&
                      labels[0].subsystem == labels[3].subsystem;
    switch (filter) {
        case PairFilter::all: return true;
        case PairFilter::same_subsystem: return same;
        case PairFilter::cross_subsystem: return !same;
    }
    return true;
}

constexpr double weight_cutoff = 1e-15;

}  // namespace

Mat k2_matrix(const std::vector<Mode>& modes, int dim, const BathModel& bath,
              const CrossCorrelationPolicy& policy, std::optional<double> t,
              PairFilter filter) {
    const Eigen::Index n = Eigen::Index(dim) * dim;
    Mat m = Mat::Zero(n, n);
    for (const Mode& mj : modes) {
        for (const Mode& mk : modes) {
            if (!pair_allowed(filter, mj.label, mk.label)) continue;
            const cplx ww = mj.weight * mk.weight;
            if (std::abs(ww) < weight_cutoff) continue;
            cplx cp, cm;
            if (t) {
                cp = finite_half_fourier(bath, Sign::plus, mj.omega, *t);
                cm = finite_half_fourier(bath, Sign::minus, mj.omega, *t);
                const double scale =
                    mj.label.subsystem == mk.label.subsystem ? 1.0 : policy.kappa;
                cp *= scale;
                cm *= scale;
            } else {
                cp = half_fourier(bath, mk.label, mj.label, Sign::plus, mj.omega, policy);
                cm = half_fourier(bath, mj.label, mk.label, Sign::minus, mj.omega, policy);
            }
            m += (ww * cp) * commutator_left_superop(mj.op, mk.op);
            m += (ww * cm) * commutator_right_superop(mk.op, mj.op);
        }
    }
    return m;
}

TimeDependentGenerator k2_terms(const std::vector<Mode>& modes, int dim,
                                const BathModel& bath,
                                const CrossCorrelationPolicy& policy) {
    const Eigen::Index n = Eigen::Index(dim) * dim;
    TimeDependentGenerator gen;
    gen.dim = dim;
    // coefficient closures own one shared copy of the bath model
    auto owned = std::make_shared<const BathModel>(bath);
    // group by the j mode: its frequency fixes the coefficient function
    for (const Mode& mj : modes) {
        if (std::abs(mj.weight) < weight_cutoff) continue;
        Mat plus_part = Mat::Zero(n, n);
        Mat minus_part = Mat::Zero(n, n);
        bool any = false;
        for (const Mode& mk : modes) {
            const cplx ww = mj.weight * mk.weight;
            if (std::abs(ww) < weight_cutoff) continue;
            const double scale =
                mj.label.subsystem == mk.label.subsystem ? 1.0 : policy.kappa;
            if (scale == 0.0) continue;
            any = true;
            plus_part += (ww * scale) * commutator_left_superop(mj.op, mk.op);
            minus_part += (ww * scale) * commutator_right_superop(mk.op, mj.op);
        }
        if (!any) continue;
        const double omega = mj.omega;
        gen.terms.push_back({std::move(plus_part), [owned, omega](double t) {
                                 return finite_half_fourier(*owned, Sign::plus, omega, t);
                             }});
        gen.terms.push_back({std::move(minus_part), [owned, omega](double t) {
                                 return finite_half_fourier(*owned, Sign::minus, omega, t);
                             }});
    }
    return gen;
}

namespace {

// superoperator matrix of rho -> [V_j, Y rho] with Y = [V_k, V_l] V_m
Mat quartic_structure(const Mat& vj, const Mat& y, int dim) {
    const Mat id = Mat::Identity(dim, dim);
    return sandwich_superop(vj * y, id) - sandwich_superop(y, vj);
}

double tuple_kernel_scale(const FourthOrderTerm& term,
                          const std::array<CouplingLabel, 4>& labels,
                          const CrossCorrelationPolicy& policy) {
    double scale = 1.0;
    for (const KernelFactor& f : term.factors) {
        if (labels[f.u].subsystem != labels[f.v].subsystem) scale *= policy.kappa;
    }
    return scale;
}

}  // namespace

Mat k4_matrix(const std::vector<Mode>& modes, int dim, const BathModel& bath,
              const CrossCorrelationPolicy& policy, const std::vector<int>& terms,
              std::optional<double> t, PairFilter filter) {
    const Eigen::Index n = Eigen::Index(dim) * dim;
    Mat raw = Mat::Zero(n, n);
    for (int p : terms) {
        const FourthOrderTerm& term = fourth_order_term(p);
        for (const Mode& mj : modes) {
            if (std::abs(mj.weight) < weight_cutoff) continue;
            for (const Mode& mk : modes) {
                for (const Mode& ml : modes) {
                    const cplx wkl = mk.weight * ml.weight;
                    if (std::abs(wkl) < weight_cutoff) continue;
                    const Mat inner = mk.op * ml.op - ml.op * mk.op;
                    if (inner.cwiseAbs().maxCoeff() < 1e-14) continue;
                    for (const Mode& mm : modes) {
                        const std::array<CouplingLabel, 4> labels{mj.label, mk.label,
                                                                  ml.label, mm.label};
                        if (!tuple_allowed(filter, labels)) continue;
                        const cplx ww = mj.weight * wkl * mm.weight;
                        if (std::abs(ww) < weight_cutoff) continue;
                        if (tuple_kernel_scale(term, labels, policy) == 0.0) continue;
                        const std::array<double, 3> delta{
                            mk.omega + ml.omega + mm.omega, ml.omega + mm.omega,
                            mm.omega};
                        const cplx coeff =
                            ww * (t ? finite_triple_transform(bath, p, labels, delta,
                                                              *t, policy)
                                    : triple_transform(bath, p, labels, delta, policy));
                        if (std::abs(coeff) < weight_cutoff) continue;
                        const Mat y = inner * mm.op;
                        raw += coeff * quartic_structure(mj.op, y, dim);
                    }
                }
            }
        }
    }
    return raw + hermitian_companion(raw, dim);
}

TimeDependentGenerator k4_terms(const std::vector<Mode>& modes, int dim,
                                const BathModel& bath,
                                const CrossCorrelationPolicy& policy,
                                const std::vector<int>& term_ids) {
    const Eigen::Index n = Eigen::Index(dim) * dim;
    // tuples sharing (p, frequency triple, cross scale) share one coefficient
    // function; group their structure matrices to keep the term list short
    using Key = std::tuple<int, long long, long long, long long, long long>;
    struct Group {
        Mat matrix;
        std::array<CouplingLabel, 4> labels;
        std::array<double, 3> delta;
        int p = 0;
    };
    std::map<Key, Group> groups;
    for (int p : term_ids) {
        const FourthOrderTerm& term = fourth_order_term(p);
        for (const Mode& mj : modes) {
            if (std::abs(mj.weight) < weight_cutoff) continue;
            for (const Mode& mk : modes) {
                for (const Mode& ml : modes) {
                    const cplx wkl = mk.weight * ml.weight;
                    if (std::abs(wkl) < weight_cutoff) continue;
                    const Mat inner = mk.op * ml.op - ml.op * mk.op;
                    if (inner.cwiseAbs().maxCoeff() < 1e-14) continue;
                    for (const Mode& mm : modes) {
                        const std::array<CouplingLabel, 4> labels{mj.label, mk.label,
                                                                  ml.label, mm.label};
                        const cplx ww = mj.weight * wkl * mm.weight;
                        if (std::abs(ww) < weight_cutoff) continue;
                        const double scale = tuple_kernel_scale(term, labels, policy);
                        if (scale == 0.0) continue;
                        const std::array<double, 3> delta{
                            mk.omega + ml.omega + mm.omega, ml.omega + mm.omega,
                            mm.omega};
                        const Key key{p, llround(delta[0] * 1e10),
                                      llround(delta[1] * 1e10), llround(delta[2] * 1e10),
                                      llround(scale * 1e10)};
                        const Mat y = inner * mm.op;
                        auto it = groups.find(key);
                        if (it == groups.end()) {
                            Group g;
                            g.matrix = ww * quartic_structure(mj.op, y, dim);
                            g.labels = labels;
                            g.delta = delta;
                            g.p = p;
                            groups.emplace(key, std::move(g));
                        } else {
                            it->second.matrix += ww * quartic_structure(mj.op, y, dim);
                        }
                    }
                }
            }
        }
    }
    TimeDependentGenerator gen;
    gen.dim = dim;
    auto owned = std::make_shared<const BathModel>(bath);
    const Mat pmat = Superoperator::transposition(dim).matrix;
    for (auto& [key, g] : groups) {
        if (g.matrix.cwiseAbs().maxCoeff() < weight_cutoff) continue;
        const auto labels = g.labels;
        const auto delta = g.delta;
        const int p = g.p;
        gen.terms.push_back({g.matrix, [owned, p, labels, delta, policy](double t) {
                                 return finite_triple_transform(*owned, p, labels, delta,
                                                                t, policy);
                             }});
        // hermitian companion: matrix P conj(M) P, conjugated coefficient
        gen.terms.push_back(
            {pmat * g.matrix.conjugate() * pmat,
             [owned, p, labels, delta, policy](double t) {
                 return std::conj(
                     finite_triple_transform(*owned, p, labels, delta, t, policy));
             }});
    }
    return gen;
}

std::vector<Mode> single_system_modes(const EigenoperatorSet& es, int subsystem) {
    std::vector<Mode> modes;
    modes.reserve(es.ops.size());
    for (const Eigenoperator& e : es.ops) {
        modes.push_back(Mode{e.op, e.omega, e.weight, CouplingLabel{subsystem, 0}});
    }
    return modes;
}

}  // namespace detail

Mat EigenoperatorSet::coupling_sum() const {
    Mat out = Mat::Zero(dim, dim);
    for (const Eigenoperator& e : ops) out += e.weight * e.op;
    return out;
}

EigenoperatorSet eigenoperators(const Mat& h_s, const std::vector<Mat>& couplings,
                                double degeneracy_tol) {
    require_hermitian(h_s);
    for (const Mat& a : couplings) {
        require_hermitian(a);
        if (a.rows() != h_s.rows()) {
            throw DimensionMismatch("eigenoperators: coupling dimension mismatch");
        }
    }
    EigenoperatorSet es;
    es.dim = int(h_s.rows());
    es.spectrum = eig_hermitian(h_s);
    es.couplings = couplings;
    const RealVec& eps = es.spectrum.eigenvalues;
    for (int r = 0; r < es.dim; ++r) {
        for (int s = r + 1; s < es.dim; ++s) {
            if (std::abs(eps(r) - eps(s)) < degeneracy_tol) {
                throw DegenerateSpectrum(
                    "eigenoperators: degenerate system Hamiltonian");
            }
        }
    }
    const Mat& u = es.spectrum.eigenvectors;
    for (int r = 0; r < es.dim; ++r) {
        for (int s = 0; s < es.dim; ++s) {
            Eigenoperator e;
            e.r = r;
            e.s = s;
            e.omega = eps(r) - eps(s);
            e.op = u.col(r) * u.col(s).adjoint();
            for (const Mat& a : couplings) {
                // Tr(V^dag A) = <r| A |s> for V = |r><s|
                e.bath_weights.push_back((u.col(r).adjoint() * a * u.col(s))(0, 0));
            }
            for (const cplx& c : e.bath_weights) e.weight += c;
            es.ops.push_back(std::move(e));
        }
    }
    return es;
}

Mat TimeDependentGenerator::at(double t) const {
    const Eigen::Index n = Eigen::Index(dim) * dim;
    Mat m = Mat::Zero(n, n);
    for (const Term& term : terms) m += term.coefficient(t) * term.matrix;
    return m;
}

Superoperator k2_markov(const EigenoperatorSet& es, const BathModel& bath) {
    return Superoperator{
        es.dim, detail::k2_matrix(detail::single_system_modes(es), es.dim, bath, {},
                                  std::nullopt)};
}

Superoperator k2_finite_time(const EigenoperatorSet& es, const BathModel& bath,
                             double t) {
    if (t < 0) throw NegativeTime("k2_finite_time: t must be >= 0");
    return Superoperator{
        es.dim, detail::k2_matrix(detail::single_system_modes(es), es.dim, bath, {}, t)};
}

TimeDependentGenerator k2_time_dependent(const EigenoperatorSet& es,
                                         const BathModel& bath) {
    return detail::k2_terms(detail::single_system_modes(es), es.dim, bath, {});
}

Superoperator k4_markov(const EigenoperatorSet& es, const BathModel& bath,
                        const std::vector<int>& terms) {
    return Superoperator{
        es.dim, detail::k4_matrix(detail::single_system_modes(es), es.dim, bath, {},
                                  terms, std::nullopt)};
}

Superoperator k4_finite_time(const EigenoperatorSet& es, const BathModel& bath, double t,
                             const std::vector<int>& terms) {
    if (t < 0) throw NegativeTime("k4_finite_time: t must be >= 0");
    return Superoperator{
        es.dim, detail::k4_matrix(detail::single_system_modes(es), es.dim, bath, {},
                                  terms, t)};
}

TimeDependentGenerator k4_time_dependent(const EigenoperatorSet& es,
                                         const BathModel& bath,
                                         const std::vector<int>& terms) {
    return detail::k4_terms(detail::single_system_modes(es), es.dim, bath, {}, terms);
}

Mat hermitian_companion(const Mat& s, int dim) {
    const Mat p = Superoperator::transposition(dim).matrix;
    return p * s.conjugate() * p;
}

Superoperator secularize(const Superoperator& k, const EigenoperatorSet& es,
                         double freq_tol) {
    const int d = k.dim;
    if (d != es.dim) throw DimensionMismatch("secularize: dimension mismatch");
    const Mat& u = es.spectrum.eigenvectors;
    const RealVec& eps = es.spectrum.eigenvalues;
    // vec(U X U^dag) = (conj(U) kron U) vec(X): W rotates into the eigenbasis
    const Mat w = kron(u.conjugate(), u);
    Mat keig = w.adjoint() * k.matrix * w;
    const double spread = eps(d - 1) - eps(0);
    const double tol = freq_tol * std::max(1.0, spread);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            const Eigen::Index row = Eigen::Index(b) * d + a;
            const double fr = eps(a) - eps(b);
            for (int c = 0; c < d; ++c) {
                for (int e = 0; e < d; ++e) {
                    const Eigen::Index col = Eigen::Index(e) * d + c;
                    if (std::abs(fr - (eps(c) - eps(e))) > tol) keig(row, col) = 0.0;
                }
            }
        }
    }
    return Superoperator{d, w * keig * w.adjoint()};
}

Mat GeneratorReport::total() const {
    Mat m = l0 + (lambda * lambda) * k2;
    if (order >= 4) m += std::pow(lambda, 4) * k4;
    return m;
}

Mat GeneratorReport::total_at(double t) const {
    Mat m = l0;
    m += (lambda * lambda) * (k2_t ? k2_t->at(t) : k2);
    if (order >= 4) m += std::pow(lambda, 4) * (k4_t ? k4_t->at(t) : k4);
    return m;
}

GeneratorReport assemble(const Mat& h_s, const EigenoperatorSet& es, const BathModel& bath,
                         double lambda, int order, Flavor flavor, MarkovKind markov,
                         double time, const std::vector<int>& k4_terms) {
    if (order != 2 && order != 4) {
        throw std::invalid_argument("assemble: order must be 2 or 4");
    }
    if (markov == MarkovKind::finite_time && time < 0) {
        throw NegativeTime("assemble: evaluation time must be >= 0");
    }
    GeneratorReport rep;
    rep.dim = es.dim;
    rep.lambda = lambda;
    rep.order = order;
    rep.flavor = flavor;
    rep.markov = markov;
    rep.time = time;
    rep.k4_terms = k4_terms;
    rep.l0 = hamiltonian_superop(h_s);
    rep.provenance.push_back("l0: -i[H_S, .]");

    const char* bath_name = bath.kind == BathKind::analytic_exponential ? "exponential"
                            : bath.kind == BathKind::ohmic              ? "ohmic"
                                                                        : "tabulated";
    auto maybe_secular = [&](Superoperator s) {
        if (flavor == Flavor::davies_secular) s = secularize(s, es);
        return s;
    };
    std::ostringstream tag;
    if (markov == MarkovKind::infinite_limit) {
        rep.k2 = maybe_secular(k2_markov(es, bath)).matrix;
        tag << "k2: second-order dissipator, infinite-time limit, bath=" << bath_name;
    } else {
        rep.k2 = maybe_secular(k2_finite_time(es, bath, time)).matrix;
        auto td = std::make_shared<TimeDependentGenerator>(k2_time_dependent(es, bath));
        if (flavor == Flavor::davies_secular) {
            for (auto& term : td->terms) {
                term.matrix =
                    secularize(Superoperator{es.dim, term.matrix}, es).matrix;
            }
        }
        rep.k2_t = td;
        tag << "k2: second-order dissipator at t=" << time << ", bath=" << bath_name;
    }
    if (flavor == Flavor::davies_secular) tag << ", secular";
    rep.provenance.push_back(tag.str());

    if (order == 4) {
        std::ostringstream tag4;
        if (markov == MarkovKind::infinite_limit) {
            rep.k4 = maybe_secular(k4_markov(es, bath, k4_terms)).matrix;
            tag4 << "k4: fourth-order dissipator, infinite-time limit, terms={";
        } else {
            rep.k4 = maybe_secular(k4_finite_time(es, bath, time, k4_terms)).matrix;
            auto td =
                std::make_shared<TimeDependentGenerator>(k4_time_dependent(es, bath, k4_terms));
            if (flavor == Flavor::davies_secular) {
                for (auto& term : td->terms) {
                    term.matrix =
                        secularize(Superoperator{es.dim, term.matrix}, es).matrix;
                }
            }
            rep.k4_t = td;
            tag4 << "k4: fourth-order dissipator at t=" << time << ", terms={";
        }
        for (std::size_t i = 0; i < k4_terms.size(); ++i) {
            tag4 << (i ? "," : "") << k4_terms[i];
        }
        tag4 << "}";
        if (flavor == Flavor::davies_secular) tag4 << ", secular";
        rep.provenance.push_back(tag4.str());
    } else {
        rep.k4 = Mat::Zero(rep.l0.rows(), rep.l0.cols());
    }
    return rep;
}

namespace {

void record_state(EvolutionResult& out, double t, const Mat& rho) {
    const Mat sym = (rho + rho.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    out.times.push_back(t);
    out.states.push_back(rho);
    out.eigenvalues.push_back(es.eigenvalues());
    out.traces.push_back(rho.trace().real());
}

void check_times(const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("evolve: empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0) throw NegativeTime("evolve: negative time");
        if (i > 0 && times[i] <= times[i - 1]) {
            throw std::invalid_argument("evolve: times must be strictly increasing");
        }
    }
}

}  // namespace

EvolutionResult evolve_static(const Mat& generator, const DensityMatrix& rho0,
                              const std::vector<double>& times) {
    check_times(times);
    const int d = int(rho0.op.rows());
    if (generator.rows() != Eigen::Index(d) * d) {
        throw DimensionMismatch("evolve_static: generator/state dimension mismatch");
    }
    EvolutionResult out;
    const Vec v0 = vectorize(rho0.op);
    for (double t : times) {
        const Vec vt = expm(t * generator) * v0;
        record_state(out, t, unvectorize(vt, d));
    }
    return out;
}

EvolutionResult evolve_ode(const std::function<Mat(double)>& generator_at,
                           const DensityMatrix& rho0, const std::vector<double>& times,
                           double local_error) {
    check_times(times);
    const int d = int(rho0.op.rows());
    EvolutionResult out;

    // Dormand-Prince 5(4) embedded pair, FSAL
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double e[7] = {35.0 / 384 - 5179.0 / 57600,
                                0.0,
                                500.0 / 1113 - 7571.0 / 16695,
                                125.0 / 192 - 393.0 / 640,
                                -2187.0 / 6784 + 92097.0 / 339200,
                                11.0 / 84 - 187.0 / 2100,
                                -1.0 / 40};

    Vec y = vectorize(rho0.op);
    double t = 0.0;
    const double t_end = times.back();
    double h = std::max(1e-6, (t_end > 0 ? t_end : 1.0) / 1000.0);
    std::size_t next_out = 0;
    if (times[next_out] == 0.0) {
        record_state(out, 0.0, rho0.op);
        ++next_out;
    }
    std::array<Vec, 7> k;
    k[0] = generator_at(t) * y;
    long steps = 0;
    while (next_out < times.size()) {
        const double target = times[next_out];
        if (t >= target - 1e-14 * std::max(1.0, target)) {
            record_state(out, target, unvectorize(y, d));
            ++next_out;
            continue;
        }
        bool hit = false;
        if (t + h >= target) {
            h = target - t;
            hit = true;
        }
        for (int i = 1; i < 7; ++i) {
            Vec yi = y;
            for (int j = 0; j < i; ++j) yi += (h * a[i][j]) * k[j];
            k[i] = generator_at(t + c[i] * h) * yi;
        }
        Vec y5 = y;
        for (int j = 0; j < 6; ++j) {
            if (a[6][j] != 0.0) y5 += (h * a[6][j]) * k[j];
        }
        Vec err = Vec::Zero(y.size());
        for (int j = 0; j < 7; ++j) {
            if (e[j] != 0.0) err += (h * e[j]) * k[j];
        }
        const double scale = local_error * (1.0 + y.cwiseAbs().maxCoeff());
        const double errnorm = err.cwiseAbs().maxCoeff() / scale;
        if (errnorm <= 1.0) {
            t = hit ? target : t + h;
            y = std::move(y5);
            k[0] = k[6];  // FSAL
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(errnorm, 1e-12), -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-13 * std::max(1.0, t_end)) {
            throw IntegratorFailure("evolve_ode: step size underflow");
        }
        if (++steps > 5'000'000) {
            throw IntegratorFailure("evolve_ode: step budget exhausted");
        }
    }
    return out;
}

EvolutionResult evolve(const GeneratorReport& report, const DensityMatrix& rho0,
                       const std::vector<double>& times) {
    if (report.markov == MarkovKind::finite_time && (report.k2_t || report.k4_t)) {
        return evolve_ode([&report](double t) { return report.total_at(t); }, rho0,
                          times);
    }
    return evolve_static(report.total(), rho0, times);
}

}  // namespace oqs
