#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plsel/corpus.hpp"

namespace plsel {

inline constexpr double kDefaultTheta = 0.5;

struct SuitabilityRow {
    std::string language;
    std::optional<double> sim_sem_raw;
    double sim_sem_norm = 0;
    std::optional<double> sim_text_raw;
    double sim_text_norm = 0;
    double suitability = 0;
    bool selected = false;
};

struct SuitabilityReport {
    std::string target;
    double theta = kDefaultTheta;
    std::vector<SuitabilityRow> rows;  // ordered by language tag
    // Inputs and parameters the scores depend on; fingerprint hashes it.
    nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
    std::string config_fingerprint;

    std::vector<std::string> selected() const;
    const SuitabilityRow* find(std::string_view language) const;
};

// Mean of the two normalized similarities per language, selected when the
// mean is >= theta. Both maps must share one key set with values in [0, 1].
SuitabilityReport suitability(const std::map<std::string, double>& sem_norm,
                              const std::map<std::string, double>& text_norm, double theta);

// Languages on which a report and an externally stated selection disagree.
struct SelectionDiscrepancy {
    std::vector<std::string> selected_not_expected;
    std::vector<std::string> expected_not_selected;

    bool empty() const { return selected_not_expected.empty() && expected_not_selected.empty(); }
};

SelectionDiscrepancy compare_selection(const SuitabilityReport& report,
                                       std::span<const std::string> expected);

// combine(selected + [target]). Throws when the target appears among the
// selected corpora or a language is passed twice.
Corpus build_finetune_set(const Corpus& target, std::span<const Corpus> selected);

enum class Task { summarization, search };
enum class Strategy { suitability_pipeline, combined_multilingual };

struct StrategyDescriptor {
    Task task;
    Strategy strategy;
    bool computes_similarity;
    std::string description;
};

Task parse_task(std::string_view name);
std::string_view to_string(Task task);
std::string_view to_string(Strategy strategy);
StrategyDescriptor recommend_for_task(Task task);
StrategyDescriptor recommend_for_task(std::string_view task_name);

nlohmann::ordered_json to_json(const SuitabilityReport& report);
std::string format_text_table(const SuitabilityReport& report);

}  // namespace plsel
