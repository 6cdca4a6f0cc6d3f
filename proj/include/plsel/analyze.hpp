#pragma once

#include <array>
#include <map>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "plsel/corpus.hpp"

namespace plsel {

// Test-set partition by code length. Bin k holds documents with
// boundary[k-1] <= len < boundary[k]; the last bin is closed on the left
// (len >= q3) and unbounded above.
struct LengthBins {
    double q1 = 0;
    double q2 = 0;
    double q3 = 0;
    std::array<std::vector<std::string>, 4> bins;
};

// 0-based bin index for one length.
std::size_t bin_index(double length, double q1, double q2, double q3);

// Quartiles by linear interpolation over (id, length) entries.
LengthBins quartile_bins(std::span<const std::pair<std::string, std::size_t>> lengths);
// Lengths measured in normalized tokens.
LengthBins quartile_bins(const Corpus& test);
// Boundaries taken from `reference` (e.g. the whole corpus), applied to `test`.
LengthBins quartile_bins(const Corpus& test, const Corpus& reference);

nlohmann::ordered_json to_json(const LengthBins& bins);

// ---------------------------------------------------------------------------
// Result tables

using Cell = std::variant<std::nullptr_t, std::string, std::int64_t, double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    // Columns holding improvement percentages (rendered as "+35.1%").
    std::set<std::string> percent_columns;
};

enum class ReportFormat { json, csv, text };

ReportFormat parse_report_format(std::string_view name);

// Improvement of every other numeric column over `baseline`, in percent:
// 100 * (x - base) / base. Adds "<column>_vs_<baseline>_pct" after the
// existing columns; cells are null where either value is missing or base is 0.
Table add_improvement_columns(const Table& table, const std::string& baseline);

// Deterministic serialization. Throws DomainError if a row's width differs
// from the header's.
std::string emit_report(const Table& table, ReportFormat format);
std::string emit_report(const Table& table, ReportFormat format, const std::optional<std::string>& baseline);

Table table_from_json(const nlohmann::ordered_json& j);

Table ptr_table(const std::map<std::string, double>& ptr_by_model);

}  // namespace plsel
