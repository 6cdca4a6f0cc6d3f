#include "plsel/analyze.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "plsel/error.hpp"
#include "plsel/quantile.hpp"
#include "plsel/token.hpp"

namespace plsel {

std::size_t bin_index(double length, double q1, double q2, double q3) {
    if (length >= q3) return 3;
    if (length >= q2) return 2;
    if (length >= q1) return 1;
    return 0;
}

LengthBins quartile_bins(std::span<const std::pair<std::string, std::size_t>> lengths) {
    if (lengths.empty()) throw DomainError("quartile_bins: empty test set");
    std::vector<double> sorted;
    sorted.reserve(lengths.size());
    for (const auto& [id, len] : lengths) sorted.push_back(static_cast<double>(len));
    std::sort(sorted.begin(), sorted.end());

    LengthBins out;
    out.q1 = linear_percentile(sorted, 0.25);
    out.q2 = linear_percentile(sorted, 0.50);
    out.q3 = linear_percentile(sorted, 0.75);
    for (const auto& [id, len] : lengths)
        out.bins[bin_index(static_cast<double>(len), out.q1, out.q2, out.q3)].push_back(id);
    return out;
}

namespace {

std::vector<std::pair<std::string, std::size_t>> id_lengths(const Corpus& corpus) {
    std::vector<std::pair<std::string, std::size_t>> lengths;
    lengths.reserve(corpus.size());
    for (const auto& doc : corpus.documents) lengths.emplace_back(doc.id, length_of(doc));
    return lengths;
}

}  // namespace

LengthBins quartile_bins(const Corpus& test) { return quartile_bins(id_lengths(test)); }

LengthBins quartile_bins(const Corpus& test, const Corpus& reference) {
    if (test.empty()) throw DomainError("quartile_bins: empty test set");
    const LengthBins ref = quartile_bins(id_lengths(reference));
    LengthBins out;
    out.q1 = ref.q1;
    out.q2 = ref.q2;
    out.q3 = ref.q3;
    for (const auto& [id, len] : id_lengths(test))
        out.bins[bin_index(static_cast<double>(len), out.q1, out.q2, out.q3)].push_back(id);
    return out;
}

nlohmann::ordered_json to_json(const LengthBins& b) {
    nlohmann::ordered_json j;
    j["length_unit"] = std::string(kCodeLengthUnit);
    j["boundaries"] = {b.q1, b.q2, b.q3};
    j["sizes"] = {b.bins[0].size(), b.bins[1].size(), b.bins[2].size(), b.bins[3].size()};
    j["bins"] = b.bins;
    return j;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    if (name == "text") return ReportFormat::text;
    throw InputError("unknown report format '" + std::string(name) + "' (expected json|csv|text)");
}

namespace {

std::optional<double> numeric(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    return std::nullopt;
}

void check_shape(const Table& t) {
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.rows[r].size() != t.columns.size())
            throw DomainError(fmt::format("report row {} has {} cells, header has {}", r, t.rows[r].size(),
                                          t.columns.size()));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string plain_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::nullptr_t>) return "";
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return fmt::format("{}", v);
        },
        c);
}

std::string text_cell(const Cell& c, bool percent) {
    if (auto d = std::get_if<double>(&c)) return percent ? fmt::format("{:+.1f}%", *d) : fmt::format("{:.4f}", *d);
    if (std::holds_alternative<std::nullptr_t>(c)) return "-";
    return plain_cell(c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
    return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

}  // namespace

Table add_improvement_columns(const Table& table, const std::string& baseline) {
    check_shape(table);
    const auto it = std::find(table.columns.begin(), table.columns.end(), baseline);
    if (it == table.columns.end()) throw DomainError("baseline column '" + baseline + "' not in report");
    const auto base_idx = static_cast<std::size_t>(it - table.columns.begin());

    // Columns with at least one numeric cell and no string cells.
    std::vector<std::size_t> targets;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c == base_idx || table.percent_columns.contains(table.columns[c])) continue;
        bool any_numeric = false, any_string = false;
        for (const auto& row : table.rows) {
            any_numeric = any_numeric || numeric(row[c]).has_value();
            any_string = any_string || std::holds_alternative<std::string>(row[c]);
        }
        if (!any_string && (any_numeric || table.rows.empty())) targets.push_back(c);
    }

    Table out = table;
    for (std::size_t c : targets) {
        const std::string name = table.columns[c] + "_vs_" + baseline + "_pct";
        out.columns.push_back(name);
        out.percent_columns.insert(name);
    }
    for (auto& row : out.rows) {
        const auto base = numeric(row[base_idx]);
        for (std::size_t c : targets) {
            const auto x = numeric(row[c]);
            if (base && x && *base != 0.0) row.emplace_back(100.0 * (*x - *base) / *base);
            else row.emplace_back(nullptr);
        }
    }
    return out;
}

std::string emit_report(const Table& table, ReportFormat format) {
    check_shape(table);
    switch (format) {
        case ReportFormat::json: {
            nlohmann::ordered_json j;
            j["columns"] = table.columns;
            auto rows = nlohmann::ordered_json::array();
            for (const auto& row : table.rows) {
                auto r = nlohmann::ordered_json::array();
                for (const auto& c : row) r.push_back(cell_json(c));
                rows.push_back(std::move(r));
            }
            j["rows"] = std::move(rows);
            j["percent_columns"] = table.percent_columns;
            return j.dump(2) + "\n";
        }
        case ReportFormat::csv: {
            std::string out;
            auto emit = [&](const std::vector<std::string>& fields) {
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    if (i > 0) out += ',';
                    out += csv_field(fields[i]);
                }
                out += '\n';
            };
            emit(table.columns);
            for (const auto& row : table.rows) {
                std::vector<std::string> fields;
                for (const auto& c : row) fields.push_back(plain_cell(c));
                emit(fields);
            }
            return out;
        }
        case ReportFormat::text: {
            std::vector<std::vector<std::string>> cells;
            std::vector<bool> right(table.columns.size(), false);
            for (const auto& row : table.rows) {
                std::vector<std::string> r;
                for (std::size_t c = 0; c < row.size(); ++c) {
                    r.push_back(text_cell(row[c], table.percent_columns.contains(table.columns[c])));
                    if (numeric(row[c])) right[c] = true;
                }
                cells.push_back(std::move(r));
            }
            std::vector<std::size_t> width(table.columns.size());
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                width[c] = table.columns[c].size();
                for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
            }
            std::string out;
            auto emit = [&](const std::vector<std::string>& r) {
                std::string line;
                for (std::size_t c = 0; c < r.size(); ++c) {
                    if (c > 0) line += "  ";
                    line += right[c] ? fmt::format("{:>{}}", r[c], width[c]) : fmt::format("{:<{}}", r[c], width[c]);
                }
                while (!line.empty() && line.back() == ' ') line.pop_back();
                out += line + '\n';
            };
            emit(table.columns);
            for (const auto& r : cells) emit(r);
            return out;
        }
    }
    throw DomainError("emit_report: unknown format");
}

std::string emit_report(const Table& table, ReportFormat format, const std::optional<std::string>& baseline) {
    return baseline ? emit_report(add_improvement_columns(table, *baseline), format) : emit_report(table, format);
}

Table table_from_json(const nlohmann::ordered_json& j) {
    Table t;
    try {
        t.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows")) {
            std::vector<Cell> cells;
            for (const auto& c : row) {
                if (c.is_null()) cells.emplace_back(nullptr);
                else if (c.is_string()) cells.emplace_back(c.get<std::string>());
                else if (c.is_number_integer()) cells.emplace_back(c.get<std::int64_t>());
                else if (c.is_number()) cells.emplace_back(c.get<double>());
                else throw InputError("report cell must be null, string or number");
            }
            t.rows.push_back(std::move(cells));
        }
        if (auto it = j.find("percent_columns"); it != j.end())
            for (const auto& c : *it) t.percent_columns.insert(c.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed report JSON: ") + e.what());
    }
    check_shape(t);
    return t;
}

Table ptr_table(const std::map<std::string, double>& ptr_by_model) {
    Table t;
    t.columns = {"model", "ptr"};
    for (const auto& [model, value] : ptr_by_model) t.rows.push_back({model, value});
    return t;
}

}  // namespace plsel
