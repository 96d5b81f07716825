// End-to-end tests of the command-line tool: each case launches the real
// binary as a subprocess and inspects its exit code and byte output. The
// under-resolved scenario file keeps every invocation fast.
#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "nlohmann/json.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(AMDIV_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
    const int status = ::pclose(pipe);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    return r;
}

std::string scenario_path(const char* name) {
    return std::string(AMDIV_SCENARIO_DIR) + "/" + name;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// Parses "a,b,..." rows of doubles after asserting the header line.
std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           const std::string& header) {
    const std::vector<std::string> lines = split_lines(text);
    REQUIRE(!lines.empty());
    REQUIRE(lines.front() == header);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::vector<double> row;
        std::istringstream in(lines[i]);
        std::string cell;
        while (std::getline(in, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("price subcommand emits one anchored row per asset level") {
    const std::string cfg = scenario_path("coarse.json");

    // At x = 0 immediate exercise is optimal and the value is the strike.
    RunResult r = run_cli("price --config " + cfg + " --t 0 --x 0 --x 100");
    CHECK(r.exit_code == 0);
    auto rows = parse_csv(r.output, "t,x,value");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == 0.0);
    CHECK(rows[0][1] == 0.0);
    CHECK(rows[0][2] == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(rows[1][1] == 100.0);
    CHECK(rows[1][2] > 10.0);   // even a coarse solve lands near the true value
    CHECK(rows[1][2] < 40.0);

    // At maturity the value collapses to the payoff, which is piecewise
    // linear and therefore reproduced exactly by the interpolant.
    r = run_cli("price --config " + cfg + " --t 2 --x 60 --x 150");
    CHECK(r.exit_code == 0);
    rows = parse_csv(r.output, "t,x,value");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][2] == doctest::Approx(40.0).epsilon(1e-9));
    CHECK(std::abs(rows[1][2]) < 1e-9);
}

TEST_CASE("boundary subcommand is deterministic and stays inside (0, K)") {
    const std::string cfg = scenario_path("coarse.json");
    const RunResult a = run_cli("boundary --config " + cfg);
    const RunResult b = run_cli("boundary --config " + cfg);
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(a.output == b.output);  // byte-identical across reruns

    const auto rows = parse_csv(a.output, "t,c");
    REQUIRE(rows.size() >= 10);
    double c_max = 0.0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 2);
        CHECK(row[0] >= 0.0);
        CHECK(row[0] <= 2.0);
        CHECK(row[1] >= 0.0);
        CHECK(row[1] <= 100.0);  // terminal slices report the strike itself
        c_max = std::max(c_max, row[1]);
    }
    // Deep inside a segment the put boundary sits well above zero.
    CHECK(c_max > 20.0);
}

TEST_CASE("--out writes exactly the bytes that would go to stdout") {
    const std::string cfg = scenario_path("coarse.json");
    const std::string out = "/tmp/amdiv_cli_boundary.csv";
    const RunResult piped = run_cli("boundary --config " + cfg);
    const RunResult filed = run_cli("boundary --config " + cfg + " --out " + out);
    CHECK(filed.exit_code == 0);
    CHECK(filed.output.empty());
    CHECK(read_file(out) == piped.output);
    std::remove(out.c_str());
}

TEST_CASE("verify on an under-resolved scenario exits 1 and names failures") {
    const std::string cfg = scenario_path("coarse.json");
    const std::string out = "/tmp/amdiv_cli_report.json";
    const RunResult r = run_cli("verify --config " + cfg + " --out " + out);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("overall: FAIL") != std::string::npos);
    CHECK(r.output.find("residual-decay") != std::string::npos);
    CHECK(r.output.find("cross-engine-tree") != std::string::npos);

    const nlohmann::json rep = nlohmann::json::parse(read_file(out));
    CHECK(rep.at("overall").get<bool>() == false);
    REQUIRE(rep.at("entries").is_array());
    std::size_t fails = 0;
    for (const auto& e : rep.at("entries")) {
        if (e.at("status").get<std::string>() == "fail") ++fails;
    }
    CHECK(fails >= 1);
    std::remove(out.c_str());
}

TEST_CASE("dividend overrides reprice and the two spellings agree") {
    const std::string cfg = scenario_path("coarse.json");
    auto value_at_spot = [&](const std::string& extra) {
        const RunResult r = run_cli("price --config " + cfg + " --x 100 " + extra);
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(r.output, "t,x,value");
        REQUIRE(rows.size() == 1);
        return rows[0][2];
    };
    // A larger paid fraction makes the put more valuable.
    const double small_div = value_at_spot("--rho-literal 0.95");
    const double large_div = value_at_spot("--rho-literal 0.5");
    CHECK(large_div > small_div + 1.0);

    // --dividend-fraction f is the same override as --rho-literal (1 - f).
    const RunResult via_rho = run_cli("price --config " + cfg + " --x 100 --rho-literal 0.5");
    const RunResult via_frac =
        run_cli("price --config " + cfg + " --x 100 --dividend-fraction 0.5");
    CHECK(via_rho.output == via_frac.output);
}

TEST_CASE("usage and configuration errors exit with code 2") {
    const std::string cfg = scenario_path("coarse.json");

    SUBCASE("malformed JSON") {
        const std::string bad = "/tmp/amdiv_cli_bad.json";
        { std::ofstream(bad) << "{ this is not json"; }
        const RunResult r = run_cli("price --config " + bad);
        CHECK(r.exit_code == 2);
        std::remove(bad.c_str());
    }
    SUBCASE("missing file") {
        CHECK(run_cli("price --config /tmp/amdiv_no_such_file.json").exit_code == 2);
    }
    SUBCASE("query time beyond maturity") {
        CHECK(run_cli("price --config " + cfg + " --t 5").exit_code == 2);
    }
    SUBCASE("mc engine has no boundary") {
        CHECK(run_cli("boundary --config " + cfg + " --engine mc").exit_code == 2);
    }
    SUBCASE("unknown engine name") {
        CHECK(run_cli("price --config " + cfg + " --engine quantum").exit_code == 2);
    }
    SUBCASE("mutually exclusive dividend overrides") {
        const RunResult r = run_cli("price --config " + cfg +
                                    " --rho-literal 0.9 --dividend-fraction 0.1");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("missing required --config") {
        CHECK(run_cli("verify").exit_code == 2);
    }
}
