#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "ifslab/manifest.hpp"
#include "ifslab/runner.hpp"
#include "json.hpp"

using namespace ifslab;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(IFSLAB_CLI_PATH) + " " + args +
                                " > /dev/null 2>&1")
                                   .c_str());
    return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ifslab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config round-trips through its canonical echo") {
    ExperimentConfig cfg;
    cfg.command = "sigma";
    cfg.model = "oracle-2state";
    cfg.n = 777;
    cfg.replicas = 5;
    cfg.master_seed = 123456789;
    cfg.chi_tol = 0.015;
    CHECK(ExperimentConfig::parse(cfg.serialize()) == cfg);
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS_AS(ExperimentConfig::parse("bogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("command = teleport\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("model = not-a-model\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("n = -5\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("n = banana\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("just a line\n"), ConfigError);
    // comments and blank lines are fine
    CHECK_NOTHROW(ExperimentConfig::parse("# comment\n\nn = 12 # trailing\n"));
}

TEST_CASE("sha256 matches a known vector") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("exit codes: success, invalid config, audit failure, degenerate fit") {
    const fs::path dir = fresh_dir("codes");
    CHECK(run_cli("--command audit --model-ignored 2>/dev/null") == 2);  // unknown flag
    CHECK(run_cli("--command audit --out " + (dir / "a").string()) == 0);
    CHECK(run_cli("--command teleport --out " + (dir / "b").string()) == 2);

    const fs::path bad_cfg = dir / "bad.cfg";
    write_text_file(bad_cfg.string(), "command = audit\nmodel = expanding-diagnostic\n");
    CHECK(run_cli("--config " + bad_cfg.string() + " --out " + (dir / "c").string()) == 3);

    const fs::path degen_cfg = dir / "degen.cfg";
    write_text_file(degen_cfg.string(), "command = decay\nmodel = expanding-diagnostic\n");
    CHECK(run_cli("--config " + degen_cfg.string() + " --out " + (dir / "d").string()) == 4);
}

TEST_CASE("manifest lists every output with a correct digest and echoes the config") {
    const fs::path dir = fresh_dir("manifest");
    ExperimentConfig cfg;
    cfg.command = "simulate";
    cfg.model = "exp-contraction";
    cfg.n = 200;
    cfg.out_dir = (dir / "run").string();
    REQUIRE(run(cfg) == 0);

    const auto manifest = nlohmann::json::parse(read_text_file(cfg.out_dir + "/manifest.json"));
    CHECK(manifest["command"] == "simulate");
    const auto files = manifest["files"];
    CHECK(files.contains("trajectory.csv"));
    CHECK(files.contains("moments.csv"));
    for (const auto& [name, digest] : files.items())
        CHECK(sha256_hex(read_text_file(cfg.out_dir + "/" + name)) == digest.get<std::string>());
    // echo pins execution-only keys (threads, out) to defaults
    ExperimentConfig expected = cfg;
    expected.threads = 0;
    expected.out_dir = "out";
    CHECK(ExperimentConfig::parse(manifest["config"].get<std::string>()) == expected);
}

TEST_CASE("full pipeline is byte-identical across reruns and thread counts") {
    const fs::path dir = fresh_dir("repro");
    ExperimentConfig cfg;
    cfg.command = "full";
    cfg.model = "exp-contraction";
    cfg.n = 2048;
    cfg.replicas = 8;
    cfg.seed_count = 2;
    cfg.master_seed = 31337;
    cfg.chi_tol = 0.05;

    cfg.threads = 1;
    cfg.out_dir = (dir / "t1").string();
    REQUIRE(run(cfg) == 0);
    cfg.threads = 4;
    cfg.out_dir = (dir / "t4").string();
    REQUIRE(run(cfg) == 0);

    const auto m1 = nlohmann::json::parse(read_text_file((dir / "t1/manifest.json").string()));
    const auto m4 = nlohmann::json::parse(read_text_file((dir / "t4/manifest.json").string()));
    REQUIRE(m1["files"].size() >= 5);  // audit, decay, fm curve, sigma, qvar, lil
    CHECK(m1["files"] == m4["files"]);
    for (const auto& [name, digest] : m1["files"].items()) {
        INFO(name);
        CHECK(read_text_file((dir / "t1" / name).string()) ==
              read_text_file((dir / "t4" / name).string()));
    }
    // the manifest itself is also byte-stable: no timing fields, echo pins
    // threads/out
    CHECK(read_text_file((dir / "t1/manifest.json").string()) ==
          read_text_file((dir / "t4/manifest.json").string()));
}
