#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "plsel/error.hpp"
#include "plsel/pipeline.hpp"
#include "plsel/token.hpp"

using namespace plsel;
namespace fs = std::filesystem;

namespace {

const fs::path kToy = fs::path(PLSEL_FIXTURE_DIR) / "toy";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig toy_config(const std::string& out) {
    RunConfig c = load_run_config(kToy / "config.json");
    c.output_dir = fs::temp_directory_path() / "plsel-unit" / out;
    fs::remove_all(c.output_dir);
    return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config file resolves paths relative to itself") {
    const RunConfig c = load_run_config(kToy / "config.json");
    CHECK(c.target == "ruby");
    REQUIRE(c.corpora.size() == 3);
    CHECK(c.corpora.at("go").front() == kToy / "go.jsonl");
    CHECK(c.clone.min_tokens == 10);
    CHECK(c.embedding.dim == 16);
    CHECK(c.seed == 13);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("invalid configs are input errors") {
    RunConfig c = load_run_config(kToy / "config.json");
    c.target = "cobol";
    CHECK_THROWS_AS(validate(c), InputError);
    c = load_run_config(kToy / "config.json");
    c.theta = 2;
    CHECK_THROWS_AS(validate(c), InputError);
    c = load_run_config(kToy / "config.json");
    c.corpora.erase("go");
    c.corpora.erase("python");
    CHECK_THROWS_AS(validate(c), InputError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"theta":"high"})"), "."), InputError);
    CHECK_THROWS_AS(load_run_config(kToy / "missing.json"), InputError);
}

TEST_CASE("toy run selects python and is byte-stable across reruns") {
    const RunConfig c = toy_config("toy-a");
    const SuitabilityRun first = cmd_suitability(c);
    CHECK(first.exit_code == kExitOk);
    CHECK(first.report.selected() == std::vector<std::string>{"python"});
    CHECK(first.report.find("go")->sim_text_raw == std::optional<double>(0.0));
    const std::string json1 = slurp(first.json_path), text1 = slurp(first.text_path);

    const SuitabilityRun cached = cmd_suitability(c);
    CHECK(slurp(cached.json_path) == json1);
    CHECK(slurp(cached.text_path) == text1);

    RunConfig fresh = c;
    fresh.output_dir = fs::temp_directory_path() / "plsel-unit" / "toy-b";
    fs::remove_all(fresh.output_dir);
    CHECK(slurp(cmd_suitability(fresh).json_path) == json1);
}

TEST_CASE("theta 0 selects every candidate") {
    RunConfig c = toy_config("toy-theta0");
    c.theta = 0.0;
    const auto run = cmd_suitability(c);
    CHECK(run.report.selected().size() == 2);
    CHECK(run.exit_code == kExitOk);
}

TEST_CASE("stage failures are tagged") {
    RunConfig c = toy_config("toy-bad");
    c.corpora["go"] = {kToy / "does-not-exist.jsonl"};
    CHECK_THROWS_WITH_AS(cmd_suitability(c), doctest::Contains("[load]"), StageError);

    RunConfig no_clones = toy_config("toy-noclones");
    no_clones.corpora.erase("python");
    CHECK_THROWS_WITH_AS(cmd_suitability(no_clones), doctest::Contains("no textual signal"), StageError);
}

TEST_CASE("provenance records what the numbers depend on") {
    const auto run = cmd_suitability(toy_config("toy-prov"));
    const auto& p = run.report.provenance;
    CHECK(p["tokenizer_version"] == std::string(kTokenizerVersion));
    CHECK(p["corpora"]["ruby"]["documents"] == 40);
    CHECK(p["clone"]["min_tokens"] == 10);
    CHECK(p["seed"] == 13);
    CHECK(run.report.config_fingerprint.size() == 64);
}

}  // TEST_SUITE
