#include "oqs/cli/experiments.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "oqs/bipartite.hpp"
#include "oqs/oracle.hpp"

namespace oqs::cli {

using json = nlohmann::ordered_json;

int worker_count(const RunOptions& opts) {
    int n = opts.jobs;
    if (n <= 0) {
        if (const char* env = std::getenv("OQSCP_NUM_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) n = int(std::thread::hardware_concurrency());
    return std::max(1, n);
}

std::string format_double(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

namespace {

// runs f(0..n-1) on a bounded pool; deterministic result ordering is the
// caller's job (each f(i) writes slot i)
template <typename F>
void parallel_for(int n, int jobs, F&& f) {
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct Artifacts {
    json result;
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;
};

json real_vector(const RealVec& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Mat default_state(int dim) {
    Mat m = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) m(i, i) = (i == 0) ? 0.8 : 0.2 / (dim - 1);
    if (dim >= 2) {
        m(0, 1) = cplx(0.1, 0.05);
        m(1, 0) = cplx(0.1, -0.05);
    }
    return m;
}

std::string flavor_name(Flavor f) {
    return f == Flavor::davies_secular ? "davies-secular" : "redfield";
}

std::string markov_name(MarkovKind m) {
    return m == MarkovKind::finite_time ? "finite-time" : "infinite-limit";
}

json generator_metadata(const GeneratorReport& report) {
    json g;
    g["dim"] = report.dim;
    g["lambda"] = report.lambda;
    g["order"] = report.order;
    g["flavor"] = flavor_name(report.flavor);
    g["markov"] = markov_name(report.markov);
    if (report.markov == MarkovKind::finite_time) g["time"] = report.time;
    g["provenance"] = report.provenance;
    g["l0_norm"] = report.l0.norm();
    g["k2_norm"] = report.k2.norm();
    g["k4_norm"] = report.k4.norm();
    return g;
}

// slowest nonzero relaxation rate of lambda^2 K2 (+ lambda^4 K4); the
// characteristic dissipation time readout
double dissipation_time(const GeneratorReport& report) {
    const Mat dissipative = report.lambda * report.lambda * report.k2 +
                            std::pow(report.lambda, 4) * report.k4;
    Eigen::ComplexEigenSolver<Mat> solver(dissipative);
    double slowest = 0.0;
    for (int i = 0; i < solver.eigenvalues().size(); ++i) {
        const double rate = -solver.eigenvalues()(i).real();
        if (rate > 1e-12 && (slowest == 0.0 || rate < slowest)) slowest = rate;
    }
    return slowest > 0.0 ? 1.0 / slowest : 0.0;
}

Artifacts run_transpose_demo(const ExperimentConfig&) {
    const TranspositionDemo demo = transposition_demo();
    Artifacts a;
    a.result["input_spectrum"] = real_vector(demo.input_spectrum);
    a.result["output_spectrum"] = real_vector(demo.output_spectrum);
    a.csv_header = {"index", "input_eigenvalue", "output_eigenvalue"};
    for (int i = 0; i < demo.input_spectrum.size(); ++i) {
        a.csv_rows.push_back({double(i), demo.input_spectrum(i), demo.output_spectrum(i)});
    }
    return a;
}

Artifacts run_build_generator(const ExperimentConfig& cfg) {
    const EigenoperatorSet es = eigenoperators(cfg.system.h, cfg.system.couplings);
    const GeneratorReport report =
        assemble(cfg.system.h, es, cfg.bath, cfg.generator.lambda, cfg.generator.order,
                 cfg.generator.flavor, cfg.generator.markov, cfg.generator.time,
                 cfg.generator.k4_terms);
    Artifacts a;
    a.result["generator"] = generator_metadata(report);
    const Superoperator k2{report.dim, report.k2};
    a.result["checks"]["k2_trace_annihilating"] = is_trace_annihilating(k2);
    a.result["checks"]["k2_hermiticity_preserving"] = is_hermiticity_preserving(k2);
    if (cfg.generator.order >= 4) {
        const Superoperator k4{report.dim, report.k4};
        a.result["checks"]["k4_trace_annihilating"] = is_trace_annihilating(k4);
        a.result["checks"]["k4_hermiticity_preserving"] = is_hermiticity_preserving(k4);
    }
    a.result["derived"]["bath_correlation_time"] = cfg.bath.correlation_time();
    a.result["derived"]["dissipation_time"] = dissipation_time(report);
    a.csv_header = {"omega", "weight_re", "weight_im"};
    for (const Eigenoperator& op : es.ops) {
        a.csv_rows.push_back({op.omega, op.weight.real(), op.weight.imag()});
    }
    return a;
}

Artifacts run_evolve(const ExperimentConfig& cfg) {
    const EigenoperatorSet es = eigenoperators(cfg.system.h, cfg.system.couplings);
    const GeneratorReport report =
        assemble(cfg.system.h, es, cfg.bath, cfg.generator.lambda, cfg.generator.order,
                 cfg.generator.flavor, cfg.generator.markov, cfg.generator.time,
                 cfg.generator.k4_terms);
    const std::vector<double> times = cfg.grid.times();
    const EvolutionResult run = evolve(report, DensityMatrix::checked(cfg.rho0), times);

    Artifacts a;
    a.result["generator"] = generator_metadata(report);
    double min_eig = run.eigenvalues.front().minCoeff();
    for (const RealVec& spec : run.eigenvalues) min_eig = std::min(min_eig, spec.minCoeff());
    a.result["min_eigenvalue"] = min_eig;
    a.result["final_trace"] = run.traces.back();
    a.result["final_spectrum"] = real_vector(run.eigenvalues.back());
    const double lam2 = cfg.generator.lambda * cfg.generator.lambda;
    a.result["derived"]["tau_final"] = lam2 * times.back();

    const int dim = report.dim;
    a.csv_header = {"t", "tau"};
    for (int i = 0; i < dim; ++i) a.csv_header.push_back("eigenvalue_" + std::to_string(i));
    a.csv_header.push_back("trace");
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> row{times[k], lam2 * times[k]};
        for (int i = 0; i < dim; ++i) row.push_back(run.eigenvalues[k](i));
        row.push_back(run.traces[k]);
        a.csv_rows.push_back(row);
    }
    return a;
}

Artifacts run_cp_check(const ExperimentConfig& cfg, const RunOptions& opts) {
    const EigenoperatorSet es = eigenoperators(cfg.system.h, cfg.system.couplings);
    const GeneratorReport report =
        assemble(cfg.system.h, es, cfg.bath, cfg.generator.lambda, cfg.generator.order,
                 cfg.generator.flavor, cfg.generator.markov, cfg.generator.time,
                 cfg.generator.k4_terms);
    const Mat l_total = report.total();
    const std::vector<double> times = cfg.grid.times();

    std::vector<double> min_choi(times.size(), 0.0);
    parallel_for(int(times.size()), worker_count(opts), [&](int i) {
        const Superoperator map{report.dim, expm(times[i] * l_total)};
        min_choi[i] = is_completely_positive(map).witness_eigenvalue;
    });

    Artifacts a;
    a.result["generator"] = generator_metadata(report);
    double overall = min_choi.front();
    for (double v : min_choi) overall = std::min(overall, v);
    a.result["min_choi_eigenvalue"] = overall;
    a.result["completely_positive"] = overall >= -default_policy().psd_slack;

    // stationarity of the thermal state under the dissipative part
    const Mat h = cfg.system.h;
    Mat gibbs = expm(-cfg.bath.beta * h);
    gibbs /= gibbs.trace();
    const Mat residual = unvectorize(report.k2 * vectorize(gibbs), report.dim);
    a.result["gibbs_residual"] = residual.norm();

    a.csv_header = {"t", "min_choi_eigenvalue"};
    for (std::size_t i = 0; i < times.size(); ++i) {
        a.csv_rows.push_back({times[i], min_choi[i]});
    }
    return a;
}

Artifacts run_factorize(const ExperimentConfig& cfg, const RunOptions& opts) {
    const SystemConfig& s2 = cfg.system2 ? *cfg.system2 : cfg.system;
    std::vector<double> kappas =
        cfg.kappa_sweep.empty() ? std::vector<double>{cfg.kappa} : cfg.kappa_sweep;

    auto joint_for = [&](double kappa) {
        return JointSystem{cfg.system.h,
                           s2.h,
                           cfg.system.couplings,
                           s2.couplings,
                           cfg.bath,
                           CrossCorrelationPolicy::scaled(kappa),
                           cfg.generator.lambda};
    };

    std::vector<double> residuals(kappas.size()), cross_norms(kappas.size());
    parallel_for(int(kappas.size()), worker_count(opts), [&](int i) {
        const FactorizationReport fr =
            factorization_check(joint_for(kappas[i]), cfg.generator.order,
                                cfg.generator.markov, cfg.generator.time,
                                cfg.generator.k4_terms);
        residuals[i] = fr.residual;
        cross_norms[i] = fr.coupling_block_norm;
    });

    // product-dynamics check at kappa = 0: joint evolution of a product state
    // against the tensor product of the single-subsystem evolutions
    const JointSystem zero = joint_for(0.0);
    const GeneratorReport joint =
        assemble_joint(zero, cfg.generator.order, cfg.generator.markov,
                       cfg.generator.time, cfg.generator.k4_terms);
    const int d1 = int(cfg.system.h.rows());
    const int d2 = int(s2.h.rows());
    const Mat rho1 = default_state(d1);
    const Mat rho2 = default_state(d2);
    const EigenoperatorSet es1 = eigenoperators(cfg.system.h, cfg.system.couplings);
    const EigenoperatorSet es2 = eigenoperators(s2.h, s2.couplings);
    const GeneratorReport g1 =
        assemble(cfg.system.h, es1, cfg.bath, cfg.generator.lambda, cfg.generator.order,
                 Flavor::redfield, cfg.generator.markov, cfg.generator.time,
                 cfg.generator.k4_terms);
    const GeneratorReport g2 =
        assemble(s2.h, es2, cfg.bath, cfg.generator.lambda, cfg.generator.order,
                 Flavor::redfield, cfg.generator.markov, cfg.generator.time,
                 cfg.generator.k4_terms);
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(cfg.grid.stop * (i + 1) / 20.0);
    const DensityMatrix joint_rho0 = DensityMatrix::checked(kron(rho1, rho2));
    const EvolutionResult joint_run = evolve_static(joint.total(), joint_rho0, grid);
    const EvolutionResult run1 = evolve_static(g1.total(), DensityMatrix::checked(rho1), grid);
    const EvolutionResult run2 = evolve_static(g2.total(), DensityMatrix::checked(rho2), grid);
    double product_distance = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        product_distance = std::max(
            product_distance,
            trace_distance(joint_run.states[i], kron(run1.states[i], run2.states[i])));
    }

    Artifacts a;
    a.result["order"] = cfg.generator.order;
    a.result["markov"] = markov_name(cfg.generator.markov);
    json rows = json::array();
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        json row;
        row["kappa"] = kappas[i];
        row["residual"] = residuals[i];
        row["coupling_block_norm"] = cross_norms[i];
        rows.push_back(row);
    }
    a.result["factorization"] = rows;
    a.result["product_dynamics_max_distance"] = product_distance;
    a.csv_header = {"kappa", "residual", "coupling_block_norm"};
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        a.csv_rows.push_back({kappas[i], residuals[i], cross_norms[i]});
    }
    return a;
}

Artifacts run_pair_dynamics(const ExperimentConfig& cfg) {
    MapFamily family;
    if (cfg.family == "mixture") {
        family = MapFamily::transposition_mixture();
    } else {
        const EigenoperatorSet es = eigenoperators(cfg.system.h, cfg.system.couplings);
        const GeneratorReport report =
            assemble(cfg.system.h, es, cfg.bath, cfg.generator.lambda,
                     cfg.generator.order, cfg.generator.flavor, cfg.generator.markov,
                     cfg.generator.time, cfg.generator.k4_terms);
        family = MapFamily::semigroup(report.total());
    }
    const PairDynamicsReport report = pair_dynamics_experiment(
        family, DensityMatrix::checked(cfg.rho0), cfg.grid.times());

    Artifacts a;
    a.result["family"] = cfg.family;
    double min1 = report.min_one_sided.front(), min2 = report.min_two_sided.front();
    for (double v : report.min_one_sided) min1 = std::min(min1, v);
    for (double v : report.min_two_sided) min2 = std::min(min2, v);
    a.result["min_one_sided"] = min1;
    a.result["min_two_sided"] = min2;
    if (report.first_negative_time) {
        a.result["first_negative_time"] = *report.first_negative_time;
    } else {
        a.result["first_negative_time"] = nullptr;
    }
    a.result["tolerance"] = report.tolerance;
    a.csv_header = {"t", "min_one_sided", "min_two_sided"};
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        a.csv_rows.push_back(
            {report.times[i], report.min_one_sided[i], report.min_two_sided[i]});
    }
    return a;
}

Artifacts run_oracle_compare(const ExperimentConfig& cfg, const OracleConfig& oc,
                             const RunOptions& opts) {
    const SystemSpec sys{cfg.system.h, cfg.system.couplings};
    const double t_max = 5.0 * cfg.bath.correlation_time();
    const FiniteBath fb = oc.frequencies.empty()
                              ? fit_finite_bath(cfg.bath, oc.n_modes, t_max)
                              : fit_finite_bath(cfg.bath, oc.frequencies, t_max);
    if (!opts.quiet) {
        std::cout << "fitted " << fb.modes.size() << " bath modes, dimension "
                  << fb.dim() << "\n";
    }
    const DensityMatrix rho0 = DensityMatrix::checked(cfg.rho0);
    const double lambda = cfg.generator.lambda;
    const MarkovErrorReport mr = markov_error(sys, fb, cfg.bath, lambda, rho0,
                                              oc.tau_max, oc.grid, oc.fit_tol);

    Artifacts a;
    json modes = json::array();
    for (const BathMode& m : fb.modes) {
        json row;
        row["omega"] = m.omega;
        row["coupling"] = m.coupling;
        row["fock_cutoff"] = m.fock_cutoff;
        modes.push_back(row);
    }
    a.result["bath_modes"] = modes;
    a.result["fit_residual"] = mr.fit_residual;
    a.result["max_distance"] = mr.max_distance;
    a.result["recurrence_time"] = mr.recurrence_time;
    a.result["lambda"] = lambda;
    a.result["tau_max"] = oc.tau_max;

    if (oc.lambda_scale_probe > 0.0) {
        // early-time error at a fixed physical time for lambda and 2 lambda;
        // rescaled horizons differ because tau = lambda^2 t
        const double t_probe = oc.lambda_scale_probe;
        const MarkovErrorReport base = markov_error(
            sys, fb, cfg.bath, lambda, rho0, lambda * lambda * t_probe, 2, oc.fit_tol);
        const MarkovErrorReport doubled =
            markov_error(sys, fb, cfg.bath, 2.0 * lambda, rho0,
                         4.0 * lambda * lambda * t_probe, 2, oc.fit_tol);
        json probe;
        probe["time"] = t_probe;
        probe["distance"] = base.max_distance;
        probe["distance_doubled"] = doubled.max_distance;
        probe["ratio"] = base.max_distance > 0.0
                             ? doubled.max_distance / base.max_distance
                             : 0.0;
        a.result["lambda_scaling"] = probe;
    }

    a.csv_header = {"tau", "trace_distance"};
    for (std::size_t i = 0; i < mr.tau.size(); ++i) {
        a.csv_rows.push_back({mr.tau[i], mr.distance[i]});
    }
    return a;
}

void write_artifacts(const ExperimentConfig& cfg, const RunOptions& opts, Artifacts a) {
    json root;
    root["experiment"] = cfg.experiment;
    if (!cfg.preset.empty()) root["preset"] = cfg.preset;
    root["seed"] = opts.seed;
    for (auto& [key, value] : a.result.items()) root[key] = value;

    namespace fs = std::filesystem;
    fs::create_directories(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "result.json");
        out << root.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(opts.out_dir) / "series.csv");
        for (std::size_t i = 0; i < a.csv_header.size(); ++i) {
            out << (i ? "," : "") << a.csv_header[i];
        }
        out << "\n";
        for (const std::vector<double>& row : a.csv_rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << (i ? "," : "") << format_double(row[i]);
            }
            out << "\n";
        }
    }
    if (!opts.quiet) {
        std::cout << cfg.experiment << ": wrote " << opts.out_dir << "/result.json and "
                  << opts.out_dir << "/series.csv\n";
    }
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const OracleConfig& oracle,
                    const RunOptions& opts) {
    Artifacts a;
    if (cfg.experiment == "transpose-demo") {
        a = run_transpose_demo(cfg);
    } else if (cfg.experiment == "build-generator") {
        a = run_build_generator(cfg);
    } else if (cfg.experiment == "evolve") {
        a = run_evolve(cfg);
    } else if (cfg.experiment == "cp-check") {
        a = run_cp_check(cfg, opts);
    } else if (cfg.experiment == "factorize") {
        a = run_factorize(cfg, opts);
    } else if (cfg.experiment == "pair-dynamics") {
        a = run_pair_dynamics(cfg);
    } else if (cfg.experiment == "oracle-compare") {
        a = run_oracle_compare(cfg, oracle, opts);
    } else {
        throw std::runtime_error("unknown experiment: " + cfg.experiment);
    }
    write_artifacts(cfg, opts, std::move(a));
}

}  // namespace oqs::cli
