#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "transducer/experiments.hpp"

using namespace transducer;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("transducer_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int run_binary(const std::string& args) {
    const std::string cmd = std::string(CLI_BIN_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("sweep output is byte-identical across runs and thread counts") {
    TempDir d1, d2, d3;
    std::ostringstream log;
    RunOptions o;
    o.out_dir = d1.path.string();
    o.threads = 1;
    REQUIRE(run_experiment("sweep-pump", o, log) == 0);
    o.out_dir = d2.path.string();
    REQUIRE(run_experiment("sweep-pump", o, log) == 0);
    o.out_dir = d3.path.string();
    o.threads = 4;
    REQUIRE(run_experiment("sweep-pump", o, log) == 0);

    const std::string a = slurp(d1.path / "sweep-pump.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(d2.path / "sweep-pump.csv"));
    CHECK(a == slurp(d3.path / "sweep-pump.csv"));
    CHECK(a.find('\r') == std::string::npos); // plain newlines on every platform
}

TEST_CASE("convert summary and manifest") {
    TempDir d;
    std::ostringstream log;
    RunOptions o;
    o.out_dir = d.path.string();
    REQUIRE(run_experiment("convert", o, log) == 0);

    const auto s = read_json(d.path / "summary.json");
    CHECK(s["p_tot"].get<double>() == doctest::Approx(0.392198764947).epsilon(1e-6));
    CHECK(s["p_coh"].get<double>() == doctest::Approx(0.346640360673).epsilon(1e-6));
    CHECK(s["r_dark"].get<double>() == doctest::Approx(42.7375261307).epsilon(1e-6));
    CHECK(s["bandwidth_fwhm"].get<double>() == doctest::Approx(4674287.39).epsilon(1e-4));

    const auto m = read_json(d.path / "manifest.json");
    CHECK(m["experiment"] == "convert");
    CHECK(m["tool_version"] == kToolVersion);
    CHECK(m["nh_convergence"]["converged"].get<bool>());
    CHECK(m.contains("config_hash"));
    CHECK(m.contains("wall_time_ms"));

    // the recorded configuration is complete enough to reproduce the run
    SystemConfig cfg = default_config();
    from_json_into(m["resolved_config"], cfg);
    std::ostringstream hex;
    hex << std::hex << config_hash(cfg);
    CHECK(hex.str() == m["config_hash"].get<std::string>());
}

TEST_CASE("overrides flow through an experiment run") {
    TempDir d55, d110;
    std::ostringstream log;
    RunOptions o;
    o.out_dir = d55.path.string();
    REQUIRE(run_experiment("rates", o, log) == 0);
    o.out_dir = d110.path.string();
    o.overrides = {"pump_power_pw=110"};
    REQUIRE(run_experiment("rates", o, log) == 0);
    const double f55 = read_json(d55.path / "summary.json")["pump_flux"].get<double>();
    const double f110 = read_json(d110.path / "summary.json")["pump_flux"].get<double>();
    CHECK(f110 == doctest::Approx(2 * f55).epsilon(1e-12));
}

TEST_CASE("doubling the pump roughly doubles the dark rate") {
    TempDir d;
    std::ostringstream log;
    RunOptions o;
    o.out_dir = d.path.string();
    REQUIRE(run_experiment("convert", o, log) == 0);
    const double r55 = read_json(d.path / "summary.json")["r_dark"].get<double>();
    o.overrides = {"pump_power_pw=110"};
    REQUIRE(run_experiment("convert", o, log) == 0);
    const double r110 = read_json(d.path / "summary.json")["r_dark"].get<double>();
    // super-linear pump scattering makes this a loose factor, not an exact 2
    CHECK(r110 / r55 > 1.5);
    CHECK(r110 / r55 < 3.0);
}

TEST_CASE("binary exit codes") {
    TempDir d;
    const std::string out = " --out " + (d.path / "o").string();

    CHECK(run_binary("") == 1);                     // missing experiment
    CHECK(run_binary("no-such-experiment" + out) == 1);

    const fs::path bad_json = d.path / "bad.json";
    std::ofstream(bad_json) << "{ not json";
    CHECK(run_binary("convert --config " + bad_json.string() + out) == 2);

    const fs::path bad_key = d.path / "bad_key.json";
    std::ofstream(bad_key) << R"({"emitter": {"gamma_bogus": 1.0}})";
    CHECK(run_binary("convert --config " + bad_key.string() + out) == 2);

    CHECK(run_binary("rates --set gamma_10=-1" + out) == 2);
    CHECK(run_binary("rates" + out) == 0);
}

TEST_CASE("default output directory comes from the environment") {
    TempDir d;
    const fs::path target = d.path / "env_out";
    const std::string cmd = "TRANSDUCER_OUT_DIR=" + target.string() + " " +
                            std::string(CLI_BIN_PATH) + " rates > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(target / "summary.json"));
    CHECK(fs::exists(target / "manifest.json"));
}

TEST_CASE("validate experiment passes on the default configuration") {
    TempDir d;
    std::ostringstream log;
    RunOptions o;
    o.out_dir = d.path.string();
    o.threads = 2;
    CHECK(run_experiment("validate", o, log) == 0);
    const auto s = read_json(d.path / "summary.json");
    CHECK(s["failed"].get<int>() == 0);
    CHECK(s["checks"].size() >= 7);
    CHECK(log.str().find("[FAIL]") == std::string::npos);
}
