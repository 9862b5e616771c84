// Python bindings for the main operations: bath models, eigenoperator
// decomposition, generator assembly and evolution, CP certification, the
// bipartite factorization and pair-dynamics experiments, and the finite-bath
// reference oracle.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oqs/bipartite.hpp"
#include "oqs/oracle.hpp"

namespace py = pybind11;
using namespace oqs;

namespace {

Flavor flavor_from(const std::string& s) {
    if (s == "redfield") return Flavor::redfield;
    if (s == "davies-secular") return Flavor::davies_secular;
    throw std::invalid_argument("flavor must be 'redfield' or 'davies-secular'");
}

MarkovKind markov_from(const std::string& s) {
    if (s == "infinite-limit") return MarkovKind::infinite_limit;
    if (s == "finite-time") return MarkovKind::finite_time;
    throw std::invalid_argument("markov must be 'infinite-limit' or 'finite-time'");
}

}  // namespace

PYBIND11_MODULE(_oqscp, m) {
    m.doc() = "weak-coupling reduced-dynamics laboratory";

    py::register_exception<NotHermitian>(m, "NotHermitian");
    py::register_exception<DegenerateSpectrum>(m, "DegenerateSpectrum");
    py::register_exception<NotCP>(m, "NotCP");
    py::register_exception<FitFailure>(m, "FitFailure");
    py::register_exception<DimensionCap>(m, "DimensionCap");

    // operator core
    m.def("expm", &expm, py::arg("a"));
    m.def("kron", &kron, py::arg("a"), py::arg("b"));
    m.def("partial_trace", &partial_trace, py::arg("a"), py::arg("d1"), py::arg("d2"),
          py::arg("keep"));
    m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));

    // channels
    py::class_<Superoperator>(m, "Superoperator")
        .def_readonly("dim", &Superoperator::dim)
        .def_readonly("matrix", &Superoperator::matrix)
        .def("apply", &Superoperator::apply, py::arg("x"))
        .def_static("identity", &Superoperator::identity, py::arg("dim"))
        .def_static("transposition", &Superoperator::transposition, py::arg("dim"))
        .def_static("from_matrix", &Superoperator::from_matrix, py::arg("matrix"));

    py::class_<CpVerdict>(m, "CpVerdict")
        .def_readonly("completely_positive", &CpVerdict::completely_positive)
        .def_readonly("witness_eigenvalue", &CpVerdict::witness_eigenvalue)
        .def_readonly("witness_state", &CpVerdict::witness_state);

    m.def("to_choi", [](const Superoperator& s) { return to_choi(s).matrix; },
          py::arg("superoperator"));
    m.def("is_completely_positive", &is_completely_positive, py::arg("superoperator"),
          py::arg("tol") = default_policy().psd_slack);
    m.def(
        "kraus_decompose",
        [](const Superoperator& s, double tol) { return kraus_decompose(s, tol).operators; },
        py::arg("superoperator"), py::arg("tol") = default_policy().psd_slack);
    m.def("tensor_with_identity", &tensor_with_identity, py::arg("superoperator"),
          py::arg("n"));
    m.def("tensor_product_map", &tensor_product_map, py::arg("s1"), py::arg("s2"));

    // bath
    py::class_<BathModel>(m, "BathModel")
        .def_static("exponential", &BathModel::exponential, py::arg("amplitude"),
                    py::arg("tau"), py::arg("beta"))
        .def_static("ohmic", &BathModel::ohmic, py::arg("eta"), py::arg("omega_c"),
                    py::arg("beta"))
        .def_static("tabulated", &BathModel::tabulated, py::arg("t"), py::arg("omega"),
                    py::arg("beta"))
        .def_readonly("beta", &BathModel::beta)
        .def("correlation_time", &BathModel::correlation_time)
        .def(
            "correlation",
            [](const BathModel& b, double t) { return correlation(b, Sign::plus, t); },
            py::arg("t"))
        .def(
            "half_fourier",
            [](const BathModel& b, double omega) {
                return half_fourier(b, Sign::plus, omega);
            },
            py::arg("omega"))
        .def("spectral_function",
             [](const BathModel& b, double omega) { return spectral_function(b, omega); },
             py::arg("omega"));

    // generators
    py::class_<EigenoperatorSet>(m, "EigenoperatorSet")
        .def_readonly("dim", &EigenoperatorSet::dim)
        .def("coupling_sum", &EigenoperatorSet::coupling_sum)
        .def_property_readonly("frequencies", [](const EigenoperatorSet& es) {
            std::vector<double> out;
            for (const Eigenoperator& op : es.ops) out.push_back(op.omega);
            return out;
        });

    m.def("eigenoperators", &eigenoperators, py::arg("h"), py::arg("couplings"),
          py::arg("degeneracy_tol") = 1e-10);

    py::class_<GeneratorReport>(m, "GeneratorReport")
        .def_readonly("dim", &GeneratorReport::dim)
        .def_readonly("l0", &GeneratorReport::l0)
        .def_readonly("k2", &GeneratorReport::k2)
        .def_readonly("k4", &GeneratorReport::k4)
        .def_readonly("lambda_", &GeneratorReport::lambda)
        .def_readonly("order", &GeneratorReport::order)
        .def_readonly("provenance", &GeneratorReport::provenance)
        .def("total", &GeneratorReport::total)
        .def("total_at", &GeneratorReport::total_at, py::arg("t"));

    m.def(
        "assemble",
        [](const Mat& h, const BathModel& bath, double lam, int order,
           const std::string& flavor, const std::string& markov, double time,
           const std::vector<int>& k4_terms, const std::vector<Mat>& couplings) {
            const EigenoperatorSet es = eigenoperators(h, couplings);
            return assemble(h, es, bath, lam, order, flavor_from(flavor),
                            markov_from(markov), time, k4_terms);
        },
        py::arg("h"), py::arg("bath"), py::arg("lambda_"), py::arg("order"),
        py::arg("flavor"), py::arg("markov"), py::arg("time"), py::arg("k4_terms"),
        py::arg("couplings"));

    m.def(
        "k2_markov",
        [](const Mat& h, const std::vector<Mat>& couplings, const BathModel& bath) {
            return k2_markov(eigenoperators(h, couplings), bath);
        },
        py::arg("h"), py::arg("couplings"), py::arg("bath"));
    m.def(
        "k4_markov",
        [](const Mat& h, const std::vector<Mat>& couplings, const BathModel& bath,
           const std::vector<int>& terms) {
            return k4_markov(eigenoperators(h, couplings), bath, terms);
        },
        py::arg("h"), py::arg("couplings"), py::arg("bath"),
        py::arg("terms") = std::vector<int>{1});
    m.def(
        "secularize",
        [](const Superoperator& k, const Mat& h, const std::vector<Mat>& couplings) {
            return secularize(k, eigenoperators(h, couplings));
        },
        py::arg("k"), py::arg("h"), py::arg("couplings"));

    py::class_<EvolutionResult>(m, "EvolutionResult")
        .def_readonly("times", &EvolutionResult::times)
        .def_readonly("states", &EvolutionResult::states)
        .def_readonly("eigenvalues", &EvolutionResult::eigenvalues)
        .def_readonly("traces", &EvolutionResult::traces);

    m.def(
        "evolve",
        [](const GeneratorReport& report, const Mat& rho0,
           const std::vector<double>& times) {
            return evolve(report, DensityMatrix::checked(rho0), times);
        },
        py::arg("report"), py::arg("rho0"), py::arg("times"));
    m.def(
        "evolve_static",
        [](const Mat& generator, const Mat& rho0, const std::vector<double>& times) {
            return evolve_static(generator, DensityMatrix::checked(rho0), times);
        },
        py::arg("generator"), py::arg("rho0"), py::arg("times"));

    // bipartite
    py::class_<TranspositionDemo>(m, "TranspositionDemo")
        .def_property_readonly("input",
                               [](const TranspositionDemo& d) { return d.input.op; })
        .def_readonly("output", &TranspositionDemo::output)
        .def_readonly("input_spectrum", &TranspositionDemo::input_spectrum)
        .def_readonly("output_spectrum", &TranspositionDemo::output_spectrum);

    m.def("singlet_state", [] { return singlet_state().op; });
    m.def("transposition_demo", &transposition_demo);

    py::class_<JointSystem>(m, "JointSystem")
        .def(py::init([](const Mat& h1, const Mat& h2, const std::vector<Mat>& c1,
                         const std::vector<Mat>& c2, const BathModel& bath, double kappa,
                         double lam) {
                 return JointSystem{h1, h2, c1, c2, bath,
                                    CrossCorrelationPolicy::scaled(kappa), lam};
             }),
             py::arg("h1"), py::arg("h2"), py::arg("couplings1"), py::arg("couplings2"),
             py::arg("bath"), py::arg("kappa"), py::arg("lambda_"))
        .def("joint_hamiltonian", &JointSystem::joint_hamiltonian)
        .def("dim", &JointSystem::dim);

    py::class_<FactorizationReport>(m, "FactorizationReport")
        .def_readonly("residual", &FactorizationReport::residual)
        .def_readonly("coupling_block_norm", &FactorizationReport::coupling_block_norm);

    m.def(
        "factorization_check",
        [](const JointSystem& sys, int order) { return factorization_check(sys, order); },
        py::arg("system"), py::arg("order"));

    py::class_<MapFamily>(m, "MapFamily")
        .def_static("transposition_mixture", &MapFamily::transposition_mixture)
        .def_static("semigroup", &MapFamily::semigroup, py::arg("generator"))
        .def("at", [](const MapFamily& f, double t) { return f.at(t); }, py::arg("t"));

    py::class_<PairDynamicsReport>(m, "PairDynamicsReport")
        .def_readonly("times", &PairDynamicsReport::times)
        .def_readonly("min_one_sided", &PairDynamicsReport::min_one_sided)
        .def_readonly("min_two_sided", &PairDynamicsReport::min_two_sided)
        .def_readonly("first_negative_time", &PairDynamicsReport::first_negative_time);

    m.def(
        "pair_dynamics_experiment",
        [](const MapFamily& family, const Mat& probe, const std::vector<double>& times,
           double tol) {
            return pair_dynamics_experiment(family, DensityMatrix::checked(probe), times,
                                            tol);
        },
        py::arg("family"), py::arg("probe"), py::arg("times"),
        py::arg("tolerance") = 1e-9);

    // oracle
    py::class_<BathMode>(m, "BathMode")
        .def(py::init([](double omega, double coupling, int fock_cutoff) {
                 return BathMode{omega, coupling, fock_cutoff};
             }),
             py::arg("omega"), py::arg("coupling"), py::arg("fock_cutoff"))
        .def_readonly("omega", &BathMode::omega)
        .def_readonly("coupling", &BathMode::coupling)
        .def_readonly("fock_cutoff", &BathMode::fock_cutoff);

    py::class_<FiniteBath>(m, "FiniteBath")
        .def(py::init([](const std::vector<BathMode>& modes, double beta) {
                 return FiniteBath{modes, beta};
             }),
             py::arg("modes"), py::arg("beta"))
        .def_readonly("modes", &FiniteBath::modes)
        .def_readonly("beta", &FiniteBath::beta)
        .def("dim", &FiniteBath::dim)
        .def("correlation", &FiniteBath::correlation, py::arg("t"))
        .def("recurrence_time", &FiniteBath::recurrence_time);

    py::class_<ExactReducedResult>(m, "ExactReducedResult")
        .def_readonly("times", &ExactReducedResult::times)
        .def_readonly("states", &ExactReducedResult::states)
        .def_readonly("top_population", &ExactReducedResult::top_population)
        .def_readonly("truncation_warning", &ExactReducedResult::truncation_warning);

    m.def(
        "exact_reduced",
        [](const Mat& h, const std::vector<Mat>& couplings, const FiniteBath& bath,
           double lam, const Mat& rho0, const std::vector<double>& times, int cap) {
            return exact_reduced(SystemSpec{h, couplings}, bath, lam,
                                 DensityMatrix::checked(rho0), times, cap);
        },
        py::arg("h"), py::arg("couplings"), py::arg("bath"), py::arg("lambda_"),
        py::arg("rho0"), py::arg("times"), py::arg("cap") = default_dimension_cap);

    py::class_<MarkovErrorReport>(m, "MarkovErrorReport")
        .def_readonly("tau", &MarkovErrorReport::tau)
        .def_readonly("distance", &MarkovErrorReport::distance)
        .def_readonly("max_distance", &MarkovErrorReport::max_distance)
        .def_readonly("fit_residual", &MarkovErrorReport::fit_residual)
        .def_readonly("recurrence_time", &MarkovErrorReport::recurrence_time);

    m.def(
        "markov_error",
        [](const Mat& h, const std::vector<Mat>& couplings, const FiniteBath& bath,
           const BathModel& model, double lam, const Mat& rho0, double tau_max, int grid,
           double fit_tol) {
            return markov_error(SystemSpec{h, couplings}, bath, model, lam,
                                DensityMatrix::checked(rho0), tau_max, grid, fit_tol);
        },
        py::arg("h"), py::arg("couplings"), py::arg("bath"), py::arg("model"),
        py::arg("lambda_"), py::arg("rho0"), py::arg("tau_max"), py::arg("grid") = 21,
        py::arg("fit_tol") = 0.05);

    m.def(
        "fit_finite_bath",
        [](const BathModel& model, const std::vector<double>& freqs, double t_max,
           int grid) { return fit_finite_bath(model, freqs, t_max, grid); },
        py::arg("model"), py::arg("frequencies"), py::arg("t_max"), py::arg("grid") = 200);
    m.def(
        "fit_finite_bath_auto",
        [](const BathModel& model, int n_modes, double t_max) {
            return fit_finite_bath(model, n_modes, t_max);
        },
        py::arg("model"), py::arg("n_modes"), py::arg("t_max"));
}
