#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plsel/clone.hpp"
#include "plsel/corpus.hpp"
#include "plsel/embed.hpp"
#include "plsel/select.hpp"

namespace plsel {

// Everything a suitability run depends on. Serializable as one JSON file;
// CLI flags override individual fields.
struct RunConfig {
    std::map<std::string, std::vector<std::filesystem::path>> corpora;  // language -> JSONL files
    std::string target;
    double theta = kDefaultTheta;
    CloneParams clone;
    EmbedConfig embedding;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "plsel-out";
    Split split = Split::train;
    bool bimodal_only = false;
    bool lenient = false;
    std::uint32_t jobs = 1;  // 1 = deterministic
};

// Relative corpus paths resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Throws InputError for an invalid config.
void validate(const RunConfig& config);

// Failure inside one pipeline stage; `stage()` names it for diagnostics.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct SuitabilityRun {
    SuitabilityReport report;
    std::filesystem::path json_path;
    std::filesystem::path text_path;
    int exit_code = 0;  // 0 with a selection, 2 with none
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNoSelection = 2;

// load -> train embeddings on all corpora -> semantic similarity and clone
// counts per candidate -> normalize -> suitability -> report.json/report.txt.
// The trained model and every per-candidate score are cached under
// <output_dir>/cache keyed by content hashes of their inputs.
SuitabilityRun cmd_suitability(const RunConfig& config);

}  // namespace plsel
