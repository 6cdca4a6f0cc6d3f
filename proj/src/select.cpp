#include "plsel/select.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "plsel/error.hpp"
#include "plsel/fingerprint.hpp"

namespace plsel {

std::vector<std::string> SuitabilityReport::selected() const {
    std::vector<std::string> out;
    for (const auto& row : rows)
        if (row.selected) out.push_back(row.language);
    return out;
}

const SuitabilityRow* SuitabilityReport::find(std::string_view language) const {
    for (const auto& row : rows)
        if (row.language == language) return &row;
    return nullptr;
}

SuitabilityReport suitability(const std::map<std::string, double>& sem_norm,
                              const std::map<std::string, double>& text_norm, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError(fmt::format("theta {} outside [0, 1]", theta));
    if (sem_norm.size() != text_norm.size() ||
        !std::equal(sem_norm.begin(), sem_norm.end(), text_norm.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; }))
        throw DomainError("suitability: semantic and textual scores cover different languages");

    auto check_unit = [](const std::string& lang, double v, const char* what) {
        if (!(v >= 0.0 && v <= 1.0))
            throw DomainError(fmt::format("suitability: {} score {} for '{}' outside [0, 1]", what, v, lang));
    };

    SuitabilityReport report;
    report.theta = theta;
    for (const auto& [lang, sem] : sem_norm) {
        const double text = text_norm.at(lang);
        check_unit(lang, sem, "semantic");
        check_unit(lang, text, "textual");
        SuitabilityRow row;
        row.language = lang;
        row.sim_sem_norm = sem;
        row.sim_text_norm = text;
        row.suitability = (sem + text) / 2.0;
        row.selected = row.suitability >= theta;
        report.rows.push_back(std::move(row));
    }
    return report;
}

SelectionDiscrepancy compare_selection(const SuitabilityReport& report,
                                       std::span<const std::string> expected) {
    const auto chosen = report.selected();
    const std::set<std::string> got(chosen.begin(), chosen.end());
    const std::set<std::string> want(expected.begin(), expected.end());
    SelectionDiscrepancy d;
    std::set_difference(got.begin(), got.end(), want.begin(), want.end(),
                        std::back_inserter(d.selected_not_expected));
    std::set_difference(want.begin(), want.end(), got.begin(), got.end(),
                        std::back_inserter(d.expected_not_selected));
    return d;
}

Corpus build_finetune_set(const Corpus& target, std::span<const Corpus> selected) {
    std::set<std::string> seen{target.language};
    std::vector<Corpus> parts;
    parts.reserve(selected.size() + 1);
    for (const auto& c : selected) {
        if (c.language == target.language)
            throw DomainError("build_finetune_set: target language '" + target.language +
                              "' is also in the selected list");
        if (!seen.insert(c.language).second)
            throw DomainError("build_finetune_set: language '" + c.language + "' passed twice");
        parts.push_back(c);
    }
    parts.push_back(target);
    return combine(parts);
}

Task parse_task(std::string_view name) {
    if (name == "summarization") return Task::summarization;
    if (name == "search") return Task::search;
    throw InputError("unknown task '" + std::string(name) + "' (expected summarization|search)");
}

std::string_view to_string(Task task) {
    return task == Task::summarization ? "summarization" : "search";
}

std::string_view to_string(Strategy strategy) {
    return strategy == Strategy::suitability_pipeline ? "suitability-pipeline" : "combined-multilingual";
}

StrategyDescriptor recommend_for_task(Task task) {
    switch (task) {
        case Task::summarization:
            return {task, Strategy::suitability_pipeline, true,
                    "score candidate languages by normalized semantic and textual similarity to the "
                    "target, keep those with suitability >= theta, fine-tune on them plus the target"};
        case Task::search:
            return {task, Strategy::combined_multilingual, false,
                    "fine-tune on the combined multilingual corpus of every language; no similarity "
                    "computation"};
    }
    throw DomainError("recommend_for_task: unhandled task");
}

StrategyDescriptor recommend_for_task(std::string_view task_name) {
    return recommend_for_task(parse_task(task_name));
}

nlohmann::ordered_json to_json(const SuitabilityReport& report) {
    nlohmann::ordered_json j;
    j["target"] = report.target;
    j["theta"] = report.theta;
    j["config_fingerprint"] = report.config_fingerprint;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["language"] = r.language;
        row["sim_sem_raw"] = r.sim_sem_raw ? nlohmann::ordered_json(*r.sim_sem_raw) : nlohmann::ordered_json(nullptr);
        row["sim_sem_norm"] = r.sim_sem_norm;
        row["sim_text_raw"] = r.sim_text_raw ? nlohmann::ordered_json(*r.sim_text_raw) : nlohmann::ordered_json(nullptr);
        row["sim_text_norm"] = r.sim_text_norm;
        row["suitability"] = r.suitability;
        row["selected"] = r.selected;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["selected"] = report.selected();
    j["provenance"] = report.provenance;
    return j;
}

std::string format_text_table(const SuitabilityReport& report) {
    const std::vector<std::string> header = {"language",      "sem_raw",  "sem_norm", "text_raw",
                                             "text_norm",     "suitability", "selected"};
    std::vector<std::vector<std::string>> cells;
    auto opt = [](const std::optional<double>& v, const char* spec) {
        return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
    };
    for (const auto& r : report.rows) {
        cells.push_back({r.language, opt(r.sim_sem_raw, "{:.6f}"), fmt::format("{:.4f}", r.sim_sem_norm),
                         opt(r.sim_text_raw, "{:.0f}"), fmt::format("{:.4f}", r.sim_text_norm),
                         fmt::format("{:.4f}", r.suitability), r.selected ? "yes" : "no"});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    std::string out = fmt::format("# target: {}  theta: {}\n", report.target, report.theta);
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += "  ";
            out += c == 0 ? fmt::format("{:<{}}", row[c], width[c]) : fmt::format("{:>{}}", row[c], width[c]);
        }
        out += '\n';
    };
    emit_row(header);
    for (const auto& row : cells) emit_row(row);
    return out;
}

}  // namespace plsel
