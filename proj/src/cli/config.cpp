#include "oqs/cli/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace oqs::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

ConfigValue parse_scalar(const std::string& raw, int line) {
    const std::string s = trim(raw);
    if (s.empty()) throw std::runtime_error("config line " + std::to_string(line) + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') {
            throw std::runtime_error("config line " + std::to_string(line) + ": unterminated string");
        }
        return s.substr(1, s.size() - 2);
    }
    if (s == "true") return true;
    if (s == "false") return false;
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config line " + std::to_string(line) + ": bad value '" + s + "'");
    }
    if (used != s.size()) {
        throw std::runtime_error("config line " + std::to_string(line) + ": bad value '" + s + "'");
    }
    return v;
}

ConfigValue parse_value(const std::string& raw, int line) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') {
            throw std::runtime_error("config line " + std::to_string(line) + ": unterminated array");
        }
        std::vector<double> nums;
        std::vector<std::string> strs;
        bool any_str = false;
        std::string body = s.substr(1, s.size() - 2);
        std::string item;
        bool quoted = false;
        std::vector<std::string> items;
        for (char c : body) {
            if (c == '"') quoted = !quoted;
            if (c == ',' && !quoted) {
                items.push_back(item);
                item.clear();
            } else {
                item += c;
            }
        }
        if (!trim(item).empty()) items.push_back(item);
        for (const std::string& it : items) {
            ConfigValue v = parse_scalar(it, line);
            if (std::holds_alternative<double>(v)) {
                nums.push_back(std::get<double>(v));
            } else if (std::holds_alternative<std::string>(v)) {
                any_str = true;
                strs.push_back(std::get<std::string>(v));
            } else {
                throw std::runtime_error("config line " + std::to_string(line) +
                                         ": booleans not allowed in arrays");
            }
        }
        if (any_str) {
            if (!nums.empty()) {
                throw std::runtime_error("config line " + std::to_string(line) + ": mixed array");
            }
            return strs;
        }
        return nums;
    }
    return parse_scalar(s, line);
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    return it != sections.end() && it->second.count(key) > 0;
}

ConfigFile parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ConfigFile file;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": malformed section header");
            }
            section = trim(s.substr(1, s.size() - 2));
            file.sections[section];
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        }
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        }
        file.sections[section][key] = parse_value(s.substr(eq + 1), lineno);
    }
    return file;
}

std::vector<double> GridConfig::times() const {
    if (!explicit_times.empty()) return explicit_times;
    std::vector<double> out;
    for (int i = 0; i < points; ++i) {
        out.push_back(points == 1 ? start : start + (stop - start) * i / (points - 1));
    }
    return out;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "transpose-demo", "build-generator", "evolve",         "cp-check",
        "factorize",      "pair-dynamics",   "oracle-compare",
    };
    return names;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "two-level-ohmic",
        "two-level-exponential",
        "pair-identical",
        "singlet-probe",
    };
    return names;
}

namespace {

using Section = std::map<std::string, ConfigValue>;

void set_default(ConfigFile& f, const std::string& sec, const std::string& key,
                 ConfigValue v) {
    if (!f.has(sec, key)) f.sections[sec][key] = std::move(v);
}

void apply_two_level_system(ConfigFile& f, const std::string& sec) {
    set_default(f, sec, "h_real", std::vector<double>{0.5, 0.0, 0.0, -0.5});
    set_default(f, sec, "coupling_real", std::vector<double>{0.0, 1.0, 1.0, 0.0});
}

void apply_preset(ConfigFile& f, const std::string& preset) {
    if (preset == "two-level-ohmic") {
        apply_two_level_system(f, "system");
        set_default(f, "bath", "kind", std::string("ohmic"));
        set_default(f, "bath", "eta", 0.1);
        set_default(f, "bath", "omega_c", 2.0);
        set_default(f, "bath", "beta", 2.0);
        set_default(f, "generator", "lambda", 0.1);
    } else if (preset == "two-level-exponential") {
        apply_two_level_system(f, "system");
        set_default(f, "bath", "kind", std::string("exponential"));
        set_default(f, "bath", "amplitude", 0.8);
        set_default(f, "bath", "tau", 0.7);
        set_default(f, "bath", "beta", 2.0);
        set_default(f, "generator", "lambda", 0.1);
    } else if (preset == "pair-identical") {
        apply_two_level_system(f, "system");
        apply_two_level_system(f, "system2");
        set_default(f, "bath", "kind", std::string("exponential"));
        set_default(f, "bath", "amplitude", 0.8);
        set_default(f, "bath", "tau", 0.7);
        set_default(f, "bath", "beta", 2.0);
        set_default(f, "generator", "lambda", 0.1);
        set_default(f, "policy", "kappa", 0.0);
    } else if (preset == "singlet-probe") {
        set_default(f, "pair", "family", std::string("mixture"));
        set_default(f, "initial", "state", std::string("singlet"));
        set_default(f, "grid", "start", 0.0);
        set_default(f, "grid", "stop", 2.0);
        set_default(f, "grid", "points", 41.0);
    }
}

std::string preset_of(const ConfigFile& f) {
    auto it = f.sections.find("system");
    if (it != f.sections.end()) {
        auto kt = it->second.find("preset");
        if (kt != it->second.end() && std::holds_alternative<std::string>(kt->second)) {
            return std::get<std::string>(kt->second);
        }
    }
    return "";
}

template <typename T>
const T* get_as(const ConfigFile& f, const std::string& sec, const std::string& key) {
    auto it = f.sections.find(sec);
    if (it == f.sections.end()) return nullptr;
    auto kt = it->second.find(key);
    if (kt == it->second.end()) return nullptr;
    return std::get_if<T>(&kt->second);
}

double get_number(const ConfigFile& f, const std::string& sec, const std::string& key,
                  double fallback) {
    const double* v = get_as<double>(f, sec, key);
    return v ? *v : fallback;
}

std::string get_string(const ConfigFile& f, const std::string& sec,
                       const std::string& key, const std::string& fallback) {
    const std::string* v = get_as<std::string>(f, sec, key);
    return v ? *v : fallback;
}

bool square_size(std::size_t n, int& d) {
    d = int(std::lround(std::sqrt(double(n))));
    return std::size_t(d) * d == n;
}

Mat read_matrix(const ConfigFile& f, const std::string& sec, const std::string& base) {
    const auto* re = get_as<std::vector<double>>(f, sec, base + "_real");
    if (!re) throw std::runtime_error(sec + "." + base + "_real: missing");
    int d = 0;
    if (!square_size(re->size(), d)) {
        throw std::runtime_error(sec + "." + base + "_real: not a square matrix");
    }
    const auto* im = get_as<std::vector<double>>(f, sec, base + "_imag");
    if (im && im->size() != re->size()) {
        throw std::runtime_error(sec + "." + base + "_imag: size mismatch");
    }
    Mat m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            m(i, j) = cplx((*re)[i * d + j], im ? (*im)[i * d + j] : 0.0);
        }
    }
    return m;
}

SystemConfig read_system(const ConfigFile& f, const std::string& sec) {
    SystemConfig sys;
    sys.h = read_matrix(f, sec, "h");
    sys.couplings.push_back(read_matrix(f, sec, "coupling"));
    return sys;
}

BathModel read_bath(const ConfigFile& f) {
    const std::string kind = get_string(f, "bath", "kind", "exponential");
    const double beta = get_number(f, "bath", "beta", 1.0);
    if (kind == "ohmic") {
        return BathModel::ohmic(get_number(f, "bath", "eta", 0.1),
                                get_number(f, "bath", "omega_c", 1.0), beta);
    }
    if (kind == "exponential") {
        return BathModel::exponential(get_number(f, "bath", "amplitude", 1.0),
                                      get_number(f, "bath", "tau", 1.0), beta);
    }
    if (kind == "tabulated") {
        return BathModel::tabulated_from_csv(get_string(f, "bath", "table", ""), beta);
    }
    throw std::runtime_error("bath.kind: unknown kind '" + kind + "'");
}

Mat default_rho0(int dim) {
    // slightly coherent mixed state; fixed across runs for determinism
    Mat m = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) m(i, i) = (i == 0) ? 0.8 : 0.2 / (dim - 1);
    if (dim >= 2) {
        m(0, 1) = cplx(0.1, 0.05);
        m(1, 0) = cplx(0.1, -0.05);
    }
    return m;
}

Mat read_rho0(const ConfigFile& f, int dim) {
    const std::string state = get_string(f, "initial", "state", "");
    if (state == "singlet") {
        Vec psi = Vec::Zero(4);
        psi(1) = 1.0 / std::sqrt(2.0);
        psi(2) = -1.0 / std::sqrt(2.0);
        return psi * psi.adjoint();
    }
    if (state == "excited") {
        Mat m = Mat::Zero(dim, dim);
        m(0, 0) = 1.0;
        return m;
    }
    if (state == "maximally-mixed") {
        return Mat::Identity(dim, dim) / double(dim);
    }
    if (f.has("initial", "rho_real")) return read_matrix(f, "initial", "rho");
    return default_rho0(dim);
}

void check_number(const ConfigFile& f, const std::string& sec, const std::string& key,
                  bool required, bool positive, std::vector<std::string>& diags) {
    const double* v = get_as<double>(f, sec, key);
    if (!v) {
        if (required && !f.has(sec, key)) {
            diags.push_back(sec + "." + key + ": missing");
        } else if (f.has(sec, key)) {
            diags.push_back(sec + "." + key + ": must be a number");
        }
        return;
    }
    if (!std::isfinite(*v)) diags.push_back(sec + "." + key + ": not finite");
    if (positive && *v <= 0) diags.push_back(sec + "." + key + ": must be positive");
}

void check_matrix(const ConfigFile& f, const std::string& sec, const std::string& base,
                  std::vector<std::string>& diags, int* dim_out = nullptr) {
    const auto* re = get_as<std::vector<double>>(f, sec, base + "_real");
    if (!re) {
        diags.push_back(sec + "." + base + "_real: missing");
        return;
    }
    int d = 0;
    if (!square_size(re->size(), d)) {
        diags.push_back(sec + "." + base + "_real: length is not a perfect square");
        return;
    }
    const auto* im = get_as<std::vector<double>>(f, sec, base + "_imag");
    if (f.has(sec, base + "_imag") && (!im || im->size() != re->size())) {
        diags.push_back(sec + "." + base + "_imag: size mismatch");
    }
    if (dim_out) *dim_out = d;
}

}  // namespace

std::vector<std::string> validate_config(const ConfigFile& file,
                                         const std::string& experiment) {
    std::vector<std::string> diags;
    bool known_experiment = false;
    for (const std::string& n : experiment_names()) known_experiment |= (n == experiment);
    if (!known_experiment) {
        std::string allowed;
        for (const std::string& n : experiment_names()) allowed += (allowed.empty() ? "" : ", ") + n;
        diags.push_back("experiment: unknown '" + experiment + "' (allowed: " + allowed + ")");
        return diags;
    }

    ConfigFile f = file;
    const std::string preset = preset_of(f);
    if (!preset.empty()) {
        bool known = false;
        for (const std::string& n : preset_names()) known |= (n == preset);
        if (!known) {
            diags.push_back("system.preset: unknown '" + preset + "'");
            return diags;
        }
        apply_preset(f, preset);
    }
    if (experiment == "pair-dynamics" && preset.empty()) apply_preset(f, "singlet-probe");

    const bool needs_system = experiment != "transpose-demo" &&
                              !(experiment == "pair-dynamics" &&
                                get_string(f, "pair", "family", "mixture") == "mixture");
    const bool needs_bath =
        experiment == "build-generator" || experiment == "evolve" ||
        experiment == "cp-check" || experiment == "factorize" ||
        experiment == "oracle-compare" ||
        (experiment == "pair-dynamics" &&
         get_string(f, "pair", "family", "mixture") == "semigroup");

    int dim = 0;
    if (needs_system) {
        check_matrix(f, "system", "h", diags, &dim);
        check_matrix(f, "system", "coupling", diags);
    }
    if (experiment == "factorize") {
        const std::string sec2 = f.sections.count("system2") ? "system2" : "system";
        check_matrix(f, sec2, "h", diags);
        check_matrix(f, sec2, "coupling", diags);
        const double kappa = get_number(f, "policy", "kappa", 0.0);
        if (kappa < 0.0 || kappa > 1.0) {
            diags.push_back("policy.kappa: must lie in [0, 1]");
        }
        const int order = int(get_number(f, "generator", "order", 2));
        if (order != 2 && order != 4) diags.push_back("generator.order: must be 2 or 4");
    }
    if (needs_bath) {
        const std::string kind = get_string(f, "bath", "kind", "exponential");
        if (kind != "ohmic" && kind != "exponential" && kind != "tabulated") {
            diags.push_back("bath.kind: unknown '" + kind + "'");
        }
        check_number(f, "bath", "beta", false, true, diags);
        if (kind == "ohmic") {
            check_number(f, "bath", "eta", false, false, diags);
            check_number(f, "bath", "omega_c", false, true, diags);
        }
        if (kind == "exponential") check_number(f, "bath", "tau", false, true, diags);
        if (kind == "tabulated") {
            const std::string path = get_string(f, "bath", "table", "");
            std::ifstream probe(path);
            if (!probe) diags.push_back("bath.table: cannot open '" + path + "'");
        }
    }
    if (needs_bath || experiment == "evolve" || experiment == "build-generator") {
        const int order = int(get_number(f, "generator", "order", 2));
        if (order != 2 && order != 4) diags.push_back("generator.order: must be 2 or 4");
        const std::string flavor = get_string(f, "generator", "flavor", "redfield");
        if (flavor != "redfield" && flavor != "davies-secular") {
            diags.push_back("generator.flavor: must be redfield or davies-secular");
        }
        const std::string markov = get_string(f, "generator", "markov", "infinite-limit");
        if (markov != "infinite-limit" && markov != "finite-time") {
            diags.push_back("generator.markov: must be infinite-limit or finite-time");
        }
        if (get_number(f, "generator", "time", 0.0) < 0) {
            diags.push_back("generator.time: must be >= 0");
        }
    }
    if (experiment == "evolve" || experiment == "cp-check" ||
        experiment == "pair-dynamics" || experiment == "oracle-compare") {
        if (const auto* times = get_as<std::vector<double>>(f, "grid", "times")) {
            if (times->empty()) diags.push_back("grid.times: time grid is empty");
            for (std::size_t i = 0; i < times->size(); ++i) {
                if ((*times)[i] < 0) {
                    diags.push_back("grid.times: entries must be >= 0");
                    break;
                }
                if (i > 0 && (*times)[i] <= (*times)[i - 1]) {
                    diags.push_back("grid.times: must be strictly ascending");
                    break;
                }
            }
        } else {
            const int points = int(get_number(f, "grid", "points", 21));
            if (points < 1) diags.push_back("grid.points: time grid is empty");
            const double start = get_number(f, "grid", "start", 0.0);
            const double stop = get_number(f, "grid", "stop", 10.0);
            if (start < 0) diags.push_back("grid.start: must be >= 0");
            if (points > 1 && stop <= start) {
                diags.push_back("grid.stop: must exceed grid.start");
            }
        }
    }
    if (experiment == "pair-dynamics") {
        const std::string family = get_string(f, "pair", "family", "mixture");
        if (family != "mixture" && family != "semigroup") {
            diags.push_back("pair.family: must be mixture or semigroup");
        }
    }
    if (experiment == "oracle-compare") {
        check_number(f, "oracle", "tau_max", false, true, diags);
        if (get_number(f, "oracle", "n_modes", 6) < 1) {
            diags.push_back("oracle.n_modes: must be >= 1");
        }
        if (get_number(f, "oracle", "grid", 21) < 2) {
            diags.push_back("oracle.grid: must be >= 2");
        }
        check_number(f, "oracle", "fit_tol", false, true, diags);
    }
    return diags;
}

ExperimentConfig load_experiment_config(const ConfigFile& file,
                                        const std::string& experiment) {
    ConfigFile f = file;
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.preset = preset_of(f);
    if (!cfg.preset.empty()) apply_preset(f, cfg.preset);
    if (experiment == "pair-dynamics" && cfg.preset.empty()) {
        apply_preset(f, "singlet-probe");
    }

    cfg.family = get_string(f, "pair", "family", "mixture");

    const bool needs_system = experiment != "transpose-demo" &&
                              !(experiment == "pair-dynamics" && cfg.family == "mixture");
    if (needs_system) cfg.system = read_system(f, "system");
    if (experiment == "factorize") {
        cfg.system2 = f.sections.count("system2") ? read_system(f, "system2")
                                                  : read_system(f, "system");
    }

    const bool needs_bath = experiment == "build-generator" || experiment == "evolve" ||
                            experiment == "cp-check" || experiment == "factorize" ||
                            experiment == "oracle-compare" ||
                            (experiment == "pair-dynamics" && cfg.family == "semigroup");
    if (needs_bath) cfg.bath = read_bath(f);

    cfg.generator.lambda = get_number(f, "generator", "lambda", 0.1);
    cfg.generator.order = int(get_number(f, "generator", "order", 2));
    cfg.generator.flavor = get_string(f, "generator", "flavor", "redfield") == "davies-secular"
                               ? Flavor::davies_secular
                               : Flavor::redfield;
    cfg.generator.markov =
        get_string(f, "generator", "markov", "infinite-limit") == "finite-time"
            ? MarkovKind::finite_time
            : MarkovKind::infinite_limit;
    cfg.generator.time = get_number(f, "generator", "time", 0.0);
    if (const auto* terms = get_as<std::vector<double>>(f, "generator", "k4_terms")) {
        cfg.generator.k4_terms.clear();
        for (double v : *terms) cfg.generator.k4_terms.push_back(int(v));
    }

    cfg.kappa = get_number(f, "policy", "kappa", 0.0);
    if (const auto* sweep = get_as<std::vector<double>>(f, "policy", "kappa_sweep")) {
        cfg.kappa_sweep = *sweep;
    }

    cfg.grid.start = get_number(f, "grid", "start", 0.0);
    cfg.grid.stop = get_number(f, "grid", "stop", 10.0);
    cfg.grid.points = int(get_number(f, "grid", "points", 21));
    if (const auto* times = get_as<std::vector<double>>(f, "grid", "times")) {
        cfg.grid.explicit_times = *times;
        if (!times->empty()) cfg.grid.stop = times->back();
    }

    int dim = needs_system ? int(cfg.system.h.rows()) : 2;
    if (experiment == "pair-dynamics") dim = needs_system ? dim * dim : 4;
    cfg.rho0 = read_rho0(f, dim);
    return cfg;
}

OracleConfig load_oracle_config(const ConfigFile& file) {
    OracleConfig oc;
    oc.n_modes = int(get_number(file, "oracle", "n_modes", 6));
    if (const auto* fr = get_as<std::vector<double>>(file, "oracle", "frequencies")) {
        oc.frequencies = *fr;
    }
    oc.tau_max = get_number(file, "oracle", "tau_max", 1.0);
    oc.grid = int(get_number(file, "oracle", "grid", 21));
    oc.fit_tol = get_number(file, "oracle", "fit_tol", 0.05);
    oc.lambda_scale_probe = get_number(file, "oracle", "lambda_scale_probe", 0.0);
    return oc;
}

}  // namespace oqs::cli
