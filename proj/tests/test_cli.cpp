#include <doctest.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <sstream>

#include "malab/cli.hpp"

using namespace malab;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code = 0;
    Json summary;
};

Invocation invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Invocation result;
    result.code = cli_main(args, out, err);
    result.summary = Json::parse(out.str());
    return result;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("malab_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("seeded solves are byte-identical") {
        unsetenv("MA_LAB_OUT");
        const auto first = scratch("solve_a"), second = scratch("solve_b");
        CHECK(invoke({"solve", "--seed", "7", "--out", first.string()}).code == kExitSuccess);
        CHECK(invoke({"solve", "--seed", "7", "--out", second.string()}).code == kExitSuccess);
        for (const auto* name : {"solve_result.json", "solve_trace.csv", "solution_cdf.csv", "target.json"}) {
            INFO(name);
            REQUIRE(fs::exists(first / name));
            CHECK(read_file((first / name).string()) == read_file((second / name).string()));
        }
        const auto other = scratch("solve_c");
        invoke({"solve", "--seed", "8", "--out", other.string()});
        CHECK(read_file((first / "target.json").string()) != read_file((other / "target.json").string()));
    }

    TEST_CASE("environment variable overrides the output flag") {
        const auto dir = scratch("env");
        setenv("MA_LAB_OUT", dir.string().c_str(), 1);
        const auto result = invoke({"capacity", "--out", "ignored_dir"});
        unsetenv("MA_LAB_OUT");
        CHECK(result.code == kExitSuccess);
        CHECK(fs::exists(dir / "capacity.csv"));
        CHECK_FALSE(fs::exists("ignored_dir"));
        CHECK(result.summary["out"] == dir.string());
    }

    TEST_CASE("verify writes junit and csv and exits zero on a clean run") {
        unsetenv("MA_LAB_OUT");
        const auto dir = scratch("verify");
        const auto result = invoke({"verify", "--size", "20", "--checks", "comparison_principle,capacity_doubling",
                                    "--out", dir.string()});
        CHECK(result.code == kExitSuccess);
        const auto xml = read_file((dir / "verify.xml").string());
        CHECK(xml.find("comparison_principle") != std::string::npos);
        CHECK(xml.find("<failure") == std::string::npos);
        CHECK(read_json_file((dir / "corpus.json").string())["size"] == 20);
    }

    TEST_CASE("empty check list runs nothing") {
        const auto dir = scratch("verify_empty");
        CHECK(invoke({"verify", "--checks", "", "--out", dir.string()}).code == kExitSuccess);
        CHECK(read_file((dir / "verify.csv").string()) == "id,citation,instances,failures,worst_margin,fitted_constant,status\n");
    }

    TEST_CASE("any failed report maps to exit code one") {
        CheckReport clean{"a", "", 2, 0, 0.1, 0.0, ""};
        CheckReport broken{"b", "", 2, 1, -0.1, 0.0, ""};
        CHECK(verify_exit_code({clean}) == kExitSuccess);
        CHECK(verify_exit_code({clean, broken}) == kExitVerifyFailures);
        CHECK(verify_exit_code({}) == kExitSuccess);
    }

    TEST_CASE("schema violations exit with code two and an error document") {
        const auto dir = scratch("errors");
        for (const auto& args : std::vector<std::vector<std::string>>{
                 {"verify", "--checks", "bogus", "--out", dir.string()},
                 {"teleport"},
                 {"solve", "--p", "abc"},
                 {"solve", "--p", "0.5", "--out", dir.string()},
                 {"solve", "--model", "sphere"},
                 {"examples", "--id", "nope", "--out", dir.string()},
                 {"energy", "--input", (dir / "missing.json").string()}}) {
            const auto result = invoke(args);
            INFO(args[0]);
            CHECK(result.code == kExitSchemaViolation);
            CHECK(result.summary.contains("error"));
            CHECK(result.summary["error"].contains("kind"));
            CHECK(result.summary["error"].contains("message"));
        }
    }

    TEST_CASE("configuration file supplies defaults that flags override") {
        const auto dir = scratch("config");
        const auto config_path = dir / "run.json";
        write_file(config_path.string(), R"({"command": "energy", "size": 10, "p": [2], "out": "unused"})");
        const auto result = invoke({"energy", "--config", config_path.string(), "--out", (dir / "out").string()});
        CHECK(result.code == kExitSuccess);
        const auto written = read_json_file((dir / "out" / "config.json").string());
        CHECK(written["size"] == 10);
        CHECK(written["p"][0] == 2);
        const auto table = read_file((dir / "out" / "energy.csv").string());
        CHECK(std::count(table.begin(), table.end(), '\n') == 11);
    }

    TEST_CASE("examples manifest maps every file to a statement") {
        const auto dir = scratch("examples");
        const auto result = invoke({"examples", "--id", "neg-log-weight", "--out", dir.string()});
        CHECK(result.code == kExitSuccess);
        const auto manifest = read_json_file((dir / "manifest.json").string());
        CHECK(manifest["examples"] == Json::array({"neg-log-weight"}));
        REQUIRE(manifest["files"].contains("neg_log_membership.csv"));
        CHECK_FALSE(manifest["files"]["neg_log_membership.csv"].get<std::string>().empty());
        CHECK(example_registry().size() == 7);
    }

    TEST_CASE("energy accepts a profile document") {
        const auto dir = scratch("energy_input");
        const auto model = radial_p2();
        const auto phi = model.zero_on(model.default_grid()).shifted(-2.0);
        write_file((dir / "phi.json").string(), dump_json(to_json(phi)));
        const auto result = invoke({"energy", "--input", (dir / "phi.json").string(), "--p", "1,3", "--out", (dir / "out").string()});
        CHECK(result.code == kExitSuccess);
        const auto reports = read_json_file((dir / "out" / "energy_reports.json").string());
        REQUIRE(reports.size() == 2);
        CHECK(json_number(reports[1]["E_p_full"]) == doctest::Approx(8.0));
    }
}
