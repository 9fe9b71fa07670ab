#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpg/cli.hpp"

using namespace tpg;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "tpg_sim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("tpg_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream s;
    s << is.rdbuf();
    return s.str();
}

int lines(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("grid syntax") {
    const auto g = parse_grid("0:5:20", "grid-v");
    REQUIRE(g.size() == 20);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 5.0);
    CHECK(g[1] == doctest::Approx(5.0 / 19.0));
    CHECK(parse_grid("0.3:0.3:1", "grid-p") == std::vector<double>{0.3});
    for (const char* bad : {"0:5", "0:5:0", "5:0:3", "a:1:2", "0:1:2.5", "0:1:3:4"}) {
        CAPTURE(bad);
        try {
            parse_grid(bad, "grid-p");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "grid-p");
        }
    }
}

TEST_CASE("mechanism lists") {
    CHECK(parse_mechanisms("C,S,M") == std::vector<Protocol>{Protocol::C, Protocol::S, Protocol::M});
    CHECK(parse_mechanisms("L") == std::vector<Protocol>{Protocol::L});
    CHECK_THROWS_AS(parse_mechanisms("C,C"), ConfigError);
    CHECK_THROWS_AS(parse_mechanisms("C,X"), ConfigError);
    CHECK_THROWS_AS(parse_mechanisms(""), ConfigError);
}

TEST_CASE("presets expand into labelled runs") {
    SweepConfig base;
    base.v_grid = {1.0};
    base.p_grid = {0.1};
    const auto fig1 = preset_runs("fig1", base);
    REQUIRE(fig1.size() == 3);
    CHECK(fig1[0].config.b0 == 0.0);
    CHECK(fig1[1].config.b0 == 0.15);
    CHECK(fig1[2].config.b0 == 0.3);
    for (const auto& r : fig1) CHECK(r.config.mechanisms == std::vector<Protocol>{Protocol::C});

    const auto noise = preset_runs("robust-noise", base);
    REQUIRE(noise.size() == 3);
    CHECK(noise[2].config.tau == 0.5);
    CHECK(noise[2].config.mechanisms == std::vector<Protocol>{Protocol::S, Protocol::M});

    const auto beta = preset_runs("robust-beta", base);
    REQUIRE(beta.size() == 2);
    CHECK(beta[0].config.dist.to_string() == "beta:2,5:1,5");
    CHECK(beta[1].config.dist.to_string() == "beta:5,2:1,5");

    CHECK(preset_runs("diag-cost", base)[0].config.diagnostics);
    CHECK(preset_runs("diag-pareto", base)[0].config.mechanisms ==
          std::vector<Protocol>{Protocol::C, Protocol::M});
    CHECK(preset_runs("fig2", base)[0].config.b0 == 0.15);
    CHECK(preset_runs("fig3", base).size() == 1);
    CHECK_THROWS_AS(preset_runs("fig9", base), ConfigError);
}

TEST_CASE("golden instance report") {
    const auto r = run({"--preset", "appc-example"});
    CHECK(r.code == 0);
    CHECK(r.out.find("D_K=1.2 ") != std::string::npos);
    CHECK(r.out.find("S targets: 0.96 0.24") != std::string::npos);
    CHECK(r.out.find("4.56012") != std::string::npos);
    CHECK(r.out.find("S null") != std::string::npos);
    CHECK(r.out.find("M retentions: 0.84166 0.35834") != std::string::npos);
    CHECK(r.out.find("3.48612 2.57403") != std::string::npos);
    CHECK(r.out.find("M succeeds") != std::string::npos);
}

TEST_CASE("desk-scale grid writes one CSV per mechanism") {
    const auto dir = scratch("grid");
    const auto r = run({"--grid-v", "0:5:20", "--grid-p", "0:0.65:20", "--draws", "1000", "--mech", "C,S,M",
                        "--out", dir.string(), "--quiet"});
    REQUIRE(r.code == 0);
    for (const char* m : {"C", "S", "M"}) CHECK(lines(dir / (std::string(m) + ".csv")) == 401);
    CHECK(fs::exists(dir / "manifest.json"));
    const auto text = slurp(dir / "S.csv");
    const auto header = text.substr(0, text.find('\n'));
    for (const char* col : {"v", "p", "mechanism", "success_prob", "se", "welfare_mean", "welfare_se",
                            "mean_subsidy", "mean_privacy_cost", "n_mc"})
        CHECK(header.find(col) != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fig1 preset at one belief level") {
    const auto dir = scratch("fig1");
    const auto r = run({"--preset", "fig1", "--b0", "0.15", "--seed", "7", "--out", dir.string(), "--grid-v",
                        "0:5:3", "--grid-p", "0:0.65:3", "--draws", "20"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "fig1_b0_0.15_C.csv"));
    CHECK_FALSE(fs::exists(dir / "fig1_b0_0_C.csv"));
    CHECK_FALSE(fs::exists(dir / "fig1_b0_0.15_S.csv"));
    fs::remove_all(dir);
}

TEST_CASE("manifest replay is byte identical") {
    const auto a = scratch("replay_a");
    const auto b = scratch("replay_b");
    REQUIRE(run({"--preset", "diag-cost", "--grid-v", "1:4:3", "--grid-p", "0:0.4:3", "--draws", "30",
                 "--threads", "1", "--out", a.string(), "--quiet"})
                .code == 0);
    REQUIRE(run({"--manifest", (a / "manifest.json").string(), "--threads", "3", "--out", b.string(), "--quiet"})
                .code == 0);
    for (const char* f : {"diag-cost_S.csv", "diag-cost_M.csv", "diag-cost_diag_cost.csv", "diag-cost_pairs.csv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("undefined diagnostics are empty fields") {
    const auto dir = scratch("undef");
    REQUIRE(run({"--preset", "diag-cost", "--grid-v", "0:0:1", "--grid-p", "0:0:1", "--draws", "5", "--out",
                 dir.string(), "--quiet"})
                .code == 0);
    const auto text = slurp(dir / "diag-cost_diag_cost.csv");
    CHECK(text.find("0,0,0,0,,0,5\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    auto r = run({"--grid-v", "0:5", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("grid-v") != std::string::npos);

    r = run({"--dist", "weird:1", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("dist") != std::string::npos);

    r = run({"--x", "10", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("X") != std::string::npos);

    r = run({"--preset", "nope", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("preset") != std::string::npos);

    r = run({"--draws", "many"});
    CHECK(r.code == 2);

    r = run({"--grid-p", "0:1:3", "--subsidy-max", "0.5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("subsidy-max") != std::string::npos);

    // Output path is a regular file.
    fs::create_directories(dir);
    std::ofstream(dir / "blocker") << "x";
    r = run({"--grid-v", "1:1:1", "--grid-p", "0:0:1", "--draws", "2", "--out", (dir / "blocker").string()});
    CHECK(r.code == 1);

    r = run({"--manifest", (dir / "missing.json").string()});
    CHECK(r.code == 1);

    CHECK(run({"--help"}).code == 0);
    fs::remove_all(dir);
}

TEST_CASE("thread count from the environment") {
    const auto dir = scratch("env");
    ::setenv("THRESHOLD_MECH_THREADS", "2", 1);
    CHECK(run({"--grid-v", "1:1:1", "--grid-p", "0:0:1", "--draws", "2", "--out", dir.string(), "--quiet"}).code == 0);
    ::setenv("THRESHOLD_MECH_THREADS", "two", 1);
    const auto r = run({"--grid-v", "1:1:1", "--grid-p", "0:0:1", "--draws", "2", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("threads") != std::string::npos);
    ::unsetenv("THRESHOLD_MECH_THREADS");
    fs::remove_all(dir);
}
