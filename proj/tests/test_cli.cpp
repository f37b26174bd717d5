#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mfg/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = MFG_CLI_PATH;
const fs::path kConfigDir = MFG_CONFIG_DIR;

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("mfg_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const TempDir& dir, const std::string& name, const std::string& body) {
    fs::path p = dir.path / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_CASE("config loader round-trips the packaged scenario") {
    auto cfg = mfg::load_config(kConfigDir / "s1.json");
    CHECK(cfg.spec.horizon == 1.0);
    CHECK(cfg.spec.x0 == 1.0);
    CHECK(cfg.spec.g2(0.3) == 0.5);
    CHECK(cfg.steps == 512);
    CHECK(cfg.paths == 10000);
    CHECK(cfg.seed == 1);
    CHECK(mfg::config_hash(kConfigDir / "s1.json") ==
          mfg::config_hash(kConfigDir / "s1.json"));
}

TEST_CASE("config errors are reported as parse failures") {
    TempDir dir("cfg");
    CHECK_THROWS_AS(mfg::load_config(dir.path / "missing.json"), mfg::ParseError);

    auto bad_json = write_config(dir, "bad.json", "{ not json");
    CHECK_THROWS_AS(mfg::load_config(bad_json), mfg::ParseError);

    auto no_game = write_config(dir, "nogame.json", R"({"grid": {"steps": 4}})");
    CHECK_THROWS_AS(mfg::load_config(no_game), mfg::ParseError);

    // tabulated coefficient with the wrong length
    auto short_tab = write_config(dir, "tab.json", R"({
      "game": {"horizon": 1.0, "x0": 1.0, "a": [0.1, 0.1], "abar": 0.0,
               "b1": 1.0, "b2": 1.0, "c1": 0.1, "c2": 0.1,
               "g1": 1.0, "g2": 1.0, "gbar1": 0.0, "gbar2": 0.0,
               "m1": 1.0, "m2": 1.0, "h1": 0.0, "h2": 0.0, "hbar1": 0.0, "hbar2": 0.0},
      "grid": {"steps": 4}})");
    CHECK_THROWS_AS(mfg::load_config(short_tab), mfg::ParseError);
}

TEST_CASE("usage and config failures exit with code 2") {
    CHECK(run("") == 2);                            // no subcommand
    CHECK(run("frobnicate") == 2);                  // unknown subcommand
    CHECK(run("validate /nonexistent.json") == 2);  // unreadable config
    TempDir dir("exit2");
    auto bad = write_config(dir, "bad.json", "[1,2,3]");
    CHECK(run("validate " + bad.string()) == 2);
}

TEST_CASE("validate exits 0 on the packaged scenario and 1 on violations") {
    TempDir dir("val");
    CHECK(run("validate " + (kConfigDir / "s1.json").string()) == 0);

    auto broken = write_config(dir, "neg.json", R"({
      "game": {"horizon": 1.0, "x0": 1.0, "a": 0.1, "abar": 0.0,
               "b1": 1.0, "b2": 1.0, "c1": 0.1, "c2": 0.1,
               "g1": -1.0, "g2": 1.0, "gbar1": 0.0, "gbar2": 0.0,
               "m1": 1.0, "m2": 1.0, "h1": 0.0, "h2": 0.0, "hbar1": 0.0, "hbar2": 0.0},
      "grid": {"steps": 8}})");
    CHECK(run("validate " + broken.string()) == 1);
}

TEST_CASE("solve writes the gain tables deterministically") {
    TempDir dir("solve");
    const std::string cfg = (kConfigDir / "s1.json").string();
    const fs::path out_a = dir.path / "a", out_b = dir.path / "b";
    REQUIRE(run("solve " + cfg + " --steps 64 --out " + out_a.string()) == 0);
    REQUIRE(run("solve " + cfg + " --steps 64 --out " + out_b.string()) == 0);
    for (const char* f : {"riccati.csv", "gains.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(out_a / f));
        CHECK(slurp(out_a / f) == slurp(out_b / f));
    }
    CHECK(fs::exists(out_a / "manifest.json"));
    // header sanity
    std::string head = slurp(out_a / "riccati.csv").substr(0, 60);
    CHECK(head.find("t,alpha1,alpha2,tau1,tau2,delta1,delta2,ex_mean") == 0);
}

TEST_CASE("simulate produces paths and a cost summary") {
    TempDir dir("sim");
    const std::string cfg = (kConfigDir / "s1.json").string();
    const fs::path out = dir.path / "run";
    REQUIRE(run("simulate " + cfg + " --steps 64 --paths 500 --seed 3 --out " + out.string()) ==
            0);
    CHECK(fs::exists(out / "paths.csv"));
    std::string cost = slurp(out / "cost.json");
    CHECK(cost.find("\"j1\"") != std::string::npos);
    CHECK(cost.find("\"se2\"") != std::string::npos);
    CHECK(cost.find("\"seed\": 3") != std::string::npos);
}

TEST_CASE("verify-nash accepts the solved gains and rejects scaled ones") {
    TempDir dir("nash");
    const std::string cfg = (kConfigDir / "s1.json").string();
    CHECK(run("verify-nash " + cfg + " --steps 64 --paths 600 --out " +
              (dir.path / "ok").string()) == 0);
    CHECK(run("verify-nash " + cfg + " --steps 64 --paths 600 --scale-gains 1.5 --out " +
              (dir.path / "bad").string()) == 1);
    CHECK(fs::exists(dir.path / "ok" / "nash_report.csv"));
}

TEST_CASE("fbsde-check passes and solver faults exit with code 3") {
    TempDir dir("fbsde");
    const std::string cfg = (kConfigDir / "s1.json").string();
    CHECK(run("fbsde-check " + cfg + " --steps 64 --paths 2000 --out " +
              (dir.path / "ok").string()) == 0);
    // a one-iteration budget cannot converge from the zero-control start
    CHECK(run("fbsde-check " + cfg + " --steps 32 --paths 300 --picard 1 --out " +
              (dir.path / "cap").string()) == 3);
}
