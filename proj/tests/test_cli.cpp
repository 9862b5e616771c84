#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oqs/cli/config.hpp"
#include "oqs/cli/experiments.hpp"

using namespace oqs::cli;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << body;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_binary(const std::string& args) {
    const int status = std::system((std::string(OQSCP_BIN) + " " + args).c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parser handles sections, types, arrays and comments") {
    const std::string path = write_temp("oqs_cli_parse.toml", R"(
# leading comment
top = 1.5
[system]
preset = "two-level-ohmic"  # trailing comment
flag = true
values = [1.0, 2.5, -3.0]
names = ["a", "b"]
)");
    const ConfigFile file = parse_config(path);
    CHECK(std::get<double>(file.sections.at("").at("top")) == 1.5);
    CHECK(std::get<std::string>(file.sections.at("system").at("preset")) ==
          "two-level-ohmic");
    CHECK(std::get<bool>(file.sections.at("system").at("flag")));
    CHECK(std::get<std::vector<double>>(file.sections.at("system").at("values")) ==
          std::vector<double>{1.0, 2.5, -3.0});
    CHECK(std::get<std::vector<std::string>>(file.sections.at("system").at("names")) ==
          std::vector<std::string>{"a", "b"});
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS(parse_config(write_temp("oqs_cli_bad1.toml", "key value\n")));
    CHECK_THROWS(parse_config(write_temp("oqs_cli_bad2.toml", "[section\n")));
    CHECK_THROWS(parse_config(write_temp("oqs_cli_bad3.toml", "k = [1, \"a\"]\n")));
    CHECK_THROWS(parse_config("/nonexistent/path.toml"));
}

TEST_CASE("shipped configs validate cleanly") {
    const std::pair<const char*, const char*> cases[] = {
        {"transpose-demo", "transpose_demo.toml"},
        {"build-generator", "build_generator.toml"},
        {"evolve", "evolve.toml"},
        {"cp-check", "cp_check.toml"},
        {"factorize", "factorize_order2.toml"},
        {"factorize", "factorize_order4.toml"},
        {"pair-dynamics", "pair_dynamics.toml"},
        {"pair-dynamics", "pair_dynamics_semigroup.toml"},
        {"oracle-compare", "oracle_compare.toml"},
        {"oracle-compare", "oracle_compare_3mode.toml"},
    };
    for (const auto& [experiment, name] : cases) {
        CAPTURE(name);
        const ConfigFile file =
            parse_config(std::string(OQSCP_CONFIG_DIR) + "/" + name);
        CHECK(validate_config(file, experiment).empty());
    }
}

TEST_CASE("validation diagnostics name the offending field") {
    const std::string path = write_temp("oqs_cli_negbeta.toml", R"(
[system]
preset = "two-level-ohmic"
[bath]
beta = -2.0
)");
    const std::vector<std::string> diags =
        validate_config(parse_config(path), "build-generator");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("bath.beta") != std::string::npos);
}

TEST_CASE("unknown experiment names list the allowed set") {
    const ConfigFile empty;
    const std::vector<std::string> diags = validate_config(empty, "frobnicate");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("transpose-demo") != std::string::npos);
    CHECK(diags[0].find("oracle-compare") != std::string::npos);
}

TEST_CASE("empty time grids are rejected") {
    const std::string path = write_temp("oqs_cli_grid.toml", R"(
[system]
preset = "two-level-ohmic"
[grid]
points = 0
)");
    const std::vector<std::string> diags = validate_config(parse_config(path), "evolve");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("grid") != std::string::npos);
}

TEST_CASE("grid times are ascending and honor explicit lists") {
    GridConfig grid;
    grid.start = 0.0;
    grid.stop = 2.0;
    grid.points = 5;
    const std::vector<double> times = grid.times();
    REQUIRE(times.size() == 5);
    CHECK(times.front() == 0.0);
    CHECK(times.back() == 2.0);
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
    grid.explicit_times = {0.1, 1.0, 10.0};
    CHECK(grid.times() == std::vector<double>{0.1, 1.0, 10.0});
}

TEST_CASE("formatted doubles round-trip exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345.6789, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("binary runs transpose-demo and emits the documented artifacts") {
    const std::string out = (fs::temp_directory_path() / "oqs_cli_run1").string();
    const int code = run_binary("transpose-demo --config " +
                                std::string(OQSCP_CONFIG_DIR) +
                                "/transpose_demo.toml --out " + out + " --quiet");
    REQUIRE(code == 0);
    const nlohmann::json result = nlohmann::json::parse(slurp(out + "/result.json"));
    CHECK(result["experiment"] == "transpose-demo");
    CHECK(std::abs(result["output_spectrum"][0].get<double>() + 0.5) < 1e-12);
    CHECK(std::abs(result["input_spectrum"][3].get<double>() - 1.0) < 1e-12);
    const std::string csv = slurp(out + "/series.csv");
    CHECK(csv.rfind("index,", 0) == 0);
}

TEST_CASE("identical invocations produce byte-identical results") {
    const std::string base = (fs::temp_directory_path() / "oqs_cli_det").string();
    for (const char* suffix : {"a", "b"}) {
        REQUIRE(run_binary("evolve --config " + std::string(OQSCP_CONFIG_DIR) +
                           "/evolve.toml --out " + base + suffix +
                           " --seed 7 --quiet") == 0);
    }
    CHECK(slurp(base + "a/result.json") == slurp(base + "b/result.json"));
    CHECK(slurp(base + "a/series.csv") == slurp(base + "b/series.csv"));
}

TEST_CASE("validation failures exit with status 2") {
    const std::string path = write_temp("oqs_cli_exit2.toml", R"(
[system]
preset = "two-level-ohmic"
[bath]
beta = -2.0
)");
    CHECK(run_binary("build-generator --config " + path + " --out /tmp/oqs_cli_x 2>/dev/null") == 2);
    CHECK(run_binary("validate --experiment build-generator --config " + path +
                     " > /dev/null") == 2);
    CHECK(run_binary("validate --experiment transpose-demo --config " +
                     std::string(OQSCP_CONFIG_DIR) +
                     "/transpose_demo.toml --quiet") == 0);
}

TEST_CASE("numerical failures exit with status 3") {
    // fully degenerate Hamiltonian: the eigenoperator decomposition refuses it
    const std::string path = write_temp("oqs_cli_exit3.toml", R"(
[system]
h_real = [0.0, 0.0, 0.0, 0.0]
coupling_real = [0.0, 1.0, 1.0, 0.0]
[bath]
kind = "exponential"
amplitude = 0.8
tau = 0.7
beta = 2.0
)");
    CHECK(run_binary("build-generator --config " + path +
                     " --out /tmp/oqs_cli_y 2>/dev/null") == 3);
}
