#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("rwce_cli_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const std::string cmd =
        std::string(RWCE_CLI_BIN) + " " + args + " > " + out.string() + " 2> " +
        (dir / "stderr.txt").string();
    const int raw = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out);
    std::ostringstream text;
    text << in.rdbuf();
    result.stdout_text = text.str();
    return result;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

const char* kSimulateConfig = R"({
  "topology": {"kind": "line_z"},
  "environment": {"name": "wave", "period": 50, "high": 20.0},
  "start": 0,
  "steps": 2000,
  "seed": 11
})";

}  // namespace

TEST_CASE("cli: configuration errors exit with code 2") {
    const fs::path dir = fresh_dir("errors");
    CHECK(run_cli("simulate --config " + (dir / "missing.json").string(), dir).exit_code == 2);

    write_text(dir / "broken.json", "{ not json");
    CHECK(run_cli("simulate --config " + (dir / "broken.json").string(), dir).exit_code == 2);

    write_text(dir / "badenv.json", R"({"topology": {"kind": "line_z"},
        "environment": {"name": "no_such_env"}, "start": 0, "steps": 10, "seed": 1})");
    CHECK(run_cli("simulate --config " + (dir / "badenv.json").string(), dir).exit_code == 2);

    write_text(dir / "badkey.json", R"({"topology": {"kind": "line_z"},
        "environment": {"name": "constant"}, "start": 0, "steps": 10, "seed": 1,
        "unexpected": true})");
    CHECK(run_cli("simulate --config " + (dir / "badkey.json").string(), dir).exit_code == 2);
}

TEST_CASE("cli: simulate writes a deterministic trajectory.csv") {
    const fs::path dir = fresh_dir("simulate");
    write_text(dir / "config.json", kSimulateConfig);
    const std::string args =
        "simulate --config " + (dir / "config.json").string() + " --out " + dir.string();
    const CliResult first = run_cli(args, dir);
    REQUIRE(first.exit_code == 0);
    REQUIRE(fs::exists(dir / "trajectory.csv"));
    const std::string csv1 = read_text(dir / "trajectory.csv");
    CHECK(csv1.rfind("t,x\n", 0) == 0);
    CHECK(json::parse(first.stdout_text).at("operation") == "simulate");

    const CliResult second = run_cli(args, dir);
    REQUIRE(second.exit_code == 0);
    CHECK(read_text(dir / "trajectory.csv") == csv1);

    // A different seed changes the trajectory.
    const CliResult other = run_cli(args + " --seed 12", dir);
    REQUIRE(other.exit_code == 0);
    CHECK(read_text(dir / "trajectory.csv") != csv1);
}

TEST_CASE("cli: list-catalog prints ten entries with provenance") {
    const fs::path dir = fresh_dir("catalog");
    const CliResult text = run_cli("list-catalog", dir);
    REQUIRE(text.exit_code == 0);
    for (const char* name : {"constant", "wave", "counter_wave", "adaptive_bias", "decay_front",
                             "multi_wave", "reinforced_once", "bridge_burning", "true_saw",
                             "maw"})
        CHECK(text.stdout_text.find(name) != std::string::npos);
    CHECK(text.stdout_text.find("Example 3.5") != std::string::npos);

    const CliResult as_json = run_cli("list-catalog --json", dir);
    REQUIRE(as_json.exit_code == 0);
    const json parsed = json::parse(as_json.stdout_text);
    REQUIRE(parsed.is_array());
    CHECK(parsed.size() == 10);
    CHECK(parsed[1].at("name") == "wave");
    CHECK(parsed[1].at("provenance") == "Example 3.5");
}

TEST_CASE("cli: classify runs end to end") {
    const fs::path dir = fresh_dir("classify");
    write_text(dir / "config.json", R"({
        "topology": {"kind": "line_z"},
        "environment": {"name": "constant"},
        "start": 0, "trials": 25, "horizon": 2000, "seed": 5})");
    const CliResult result = run_cli(
        "classify --config " + (dir / "config.json").string() + " --out " + dir.string(), dir);
    REQUIRE(result.exit_code == 0);
    const json summary = json::parse(result.stdout_text);
    CHECK(summary.at("label") == "recurrent-like");
    CHECK(fs::exists(dir / "classify.json"));
    // duration_ms goes to stdout only, never into the output file.
    CHECK(summary.contains("duration_ms"));
    CHECK(json::parse(read_text(dir / "classify.json")).contains("duration_ms") == false);
}

TEST_CASE("cli: monitor-potential writes monitor.csv") {
    const fs::path dir = fresh_dir("monitor");
    write_text(dir / "config.json", R"({
        "topology": {"kind": "line_n"},
        "environment": {"name": "reinforced_once", "c": 2.0},
        "start": 5, "steps": 500, "seed": 9,
        "potential": {"kind": "line_to_zero"}})");
    const CliResult result = run_cli(
        "monitor-potential --config " + (dir / "config.json").string() + " --out " + dir.string(),
        dir);
    REQUIRE(result.exit_code == 0);
    REQUIRE(fs::exists(dir / "monitor.csv"));
    CHECK(read_text(dir / "monitor.csv")
              .rfind("t,harmonic_residual,monotone_drift,F_at_walker\n", 0) == 0);
    const json summary = json::parse(result.stdout_text);
    CHECK(summary.at("max_abs_residual").get<double>() <= 1e-12);
}

TEST_CASE("cli: reproduce is byte-identical across runs and worker counts") {
    const fs::path dir1 = fresh_dir("repro1");
    const fs::path dir2 = fresh_dir("repro2");
    const fs::path dir3 = fresh_dir("repro3");
    const std::string base = "reproduce --suite maw --out ";
    REQUIRE(run_cli(base + dir1.string() + " --workers 1", dir1).exit_code == 0);
    REQUIRE(run_cli(base + dir2.string() + " --workers 1", dir2).exit_code == 0);
    REQUIRE(run_cli(base + dir3.string() + " --workers 4", dir3).exit_code == 0);
    bool compared_any = false;
    for (const auto& entry : fs::directory_iterator(dir1)) {
        if (entry.path().extension() != ".csv") continue;
        compared_any = true;
        const std::string name = entry.path().filename().string();
        CHECK(read_text(dir2 / name) == read_text(entry.path()));
        CHECK(read_text(dir3 / name) == read_text(entry.path()));
    }
    CHECK(compared_any);
}
