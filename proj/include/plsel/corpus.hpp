#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace plsel {

enum class Split { train, valid, test, unsplit };

inline constexpr std::array<Split, 4> kAllSplits = {Split::train, Split::valid, Split::test,
                                                    Split::unsplit};

std::string_view to_string(Split split);
// Throws InputError on an unknown name.
Split parse_split(std::string_view name);

inline constexpr std::string_view kCombinedTag = "combined";

// One code unit: a function plus its optional docstring.
struct CorpusDocument {
    std::string id;
    std::string language;
    Split split = Split::unsplit;
    std::string code;
    std::optional<std::string> docstring;
    std::optional<std::vector<std::string>> code_tokens;
    std::optional<std::vector<std::string>> docstring_tokens;
    // 1-based line of the source file; diagnostics only, ignored by ==.
    std::size_t source_line = 0;

    bool is_bimodal() const { return docstring.has_value() && !docstring->empty(); }

    friend bool operator==(const CorpusDocument& a, const CorpusDocument& b);
};

struct Corpus {
    std::string language;
    std::vector<CorpusDocument> documents;
    std::vector<std::string> provenance;

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
};

struct LoadOptions {
    // Skip malformed lines (with a warning) instead of aborting.
    bool lenient = false;
};

// Reads CodeSearchNet-style JSONL. A ".gz" extension selects gzip decoding.
// The code field is "code", falling back to "original_string". The id is the
// "id" field when present, otherwise "<language>:<split>:<line>". A record's own
// "split" field overrides `split`.
Corpus load_jsonl(const std::filesystem::path& path, std::string language, Split split,
                  const LoadOptions& options = {});

// Parses one JSONL record. `line_no` is used for diagnostics and derived ids.
CorpusDocument parse_document(const nlohmann::json& record, const std::string& language,
                              Split split, std::size_t line_no);

nlohmann::json to_json(const CorpusDocument& doc);

void write_jsonl(const Corpus& corpus, std::ostream& out);
// ".gz" extension selects gzip encoding.
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Concatenates corpora in order under the "combined" tag. Colliding ids are
// re-prefixed with the document's language.
Corpus combine(std::span<const Corpus> corpora);

// Keeps only documents with a non-empty docstring.
Corpus bimodal_only(const Corpus& corpus);

struct LengthSummary {
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
};

struct CorpusStats {
    std::size_t total = 0;
    std::array<std::size_t, 4> per_split{};  // indexed by Split
    std::size_t bimodal = 0;
    std::size_t unimodal = 0;
    std::optional<LengthSummary> token_length;  // absent for an empty corpus
};

CorpusStats stats(const Corpus& corpus);

nlohmann::json to_json(const CorpusStats& s);

// Content hash over language tag and every document field except source_line.
std::string fingerprint(const Corpus& corpus);

}  // namespace plsel
