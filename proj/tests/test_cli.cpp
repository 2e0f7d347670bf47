#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "tsvolterra/scenario.hpp"

using namespace tsvolterra;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("TSVOLTERRA_CLI"); }

fs::path cli_dir() {
    fs::path dir = fs::temp_directory_path() / "tsvolterra_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    std::string cmd = std::string("\"") + cli_path() + "\" " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_scenario(const Scenario& sc, const std::string& file) {
    fs::path p = cli_dir() / file;
    save_scenario(sc, p);
    return p;
}

Scenario base() {
    Scenario sc;
    sc.name = "cli_case";
    sc.timescale = "{0,1,2,3,4,5}";
    sc.f = "1";
    sc.k = "x";
    sc.v = "0";
    sc.w = "2^(t+1)";
    sc.tol = 1e-10;
    sc.max_iter = 50;
    sc.step_h = 1.0;
    sc.lipschitz_L = 1.0;
    sc.n_bracket_iters = 8;
    return sc;
}

}  // namespace

TEST_CASE("cli exit codes", "[cli]") {
    if (!cli_path()) {
        SKIP("TSVOLTERRA_CLI not set");
    }
    fs::path out = cli_dir() / "out";

    SECTION("verify accepts a valid bracket and rejects a bad one") {
        CHECK(run("verify --scenario \"" + write_scenario(base(), "ok.json").string() + "\"") == 0);

        Scenario bad = base();  // v = 10 is not a lower solution of x = 1
        bad.k = "0";
        bad.v = "10";
        bad.w = "20";
        CHECK(run("verify --scenario \"" + write_scenario(bad, "bad_lower.json").string() +
                  "\"") == 1);
    }

    SECTION("solve writes outputs and flags MaxIter as failure") {
        CHECK(run("solve --scenario \"" + write_scenario(base(), "solve.json").string() +
                  "\" --out-dir \"" + out.string() + "\"") == 0);
        CHECK(fs::exists(out / "cli_case.solution.csv"));
        CHECK(fs::exists(out / "cli_case.report.json"));

        Scenario stall = base();
        stall.timescale = "[0,1]";
        stall.step_h = 0.01;
        stall.tol = 1e-15;
        stall.max_iter = 2;
        CHECK(run("solve --scenario \"" + write_scenario(stall, "stall.json").string() +
                  "\" --out-dir \"" + out.string() + "\"") == 1);
    }

    SECTION("bracket rejects swapped candidates") {
        Scenario swapped = base();
        std::swap(*swapped.v, *swapped.w);
        CHECK(run("bracket --scenario \"" + write_scenario(swapped, "swapped.json").string() +
                  "\" --out-dir \"" + out.string() + "\"") == 1);
    }

    SECTION("strict monotonicity escalates the warning to failure") {
        Scenario nonmono = base();
        nonmono.k = "-0.1*x";
        nonmono.v = "0";
        nonmono.w = "2";
        nonmono.lipschitz_L = 0.1;
        fs::path p = write_scenario(nonmono, "nonmono.json");
        CHECK(run("bracket --scenario \"" + p.string() + "\" --out-dir \"" + out.string() +
                  "\" --strict-monotone") == 1);
    }

    SECTION("penalty sign override is accepted") {
        CHECK(run("compare --scenario \"" + write_scenario(base(), "cmp.json").string() +
                  "\" --out-dir \"" + out.string() + "\" --penalty-sign verbatim") == 0);
        CHECK(run("compare --scenario \"" + write_scenario(base(), "cmp.json").string() +
                  "\" --penalty-sign sideways") == 2);
    }

    SECTION("lipschitz constant is estimated when the scenario omits it") {
        Scenario noL = base();
        noL.lipschitz_L.reset();
        CHECK(run("solve --scenario \"" + write_scenario(noL, "no_L.json").string() +
                  "\" --out-dir \"" + out.string() + "\"") == 0);
    }
}
