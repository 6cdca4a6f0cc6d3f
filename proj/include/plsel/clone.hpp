#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plsel/corpus.hpp"
#include "plsel/token.hpp"

namespace plsel {

struct CloneParams {
    std::size_t min_tokens = 30;
    // Stop after this many pairs and flag the result as a lower bound.
    std::optional<std::uint64_t> cap;
    // Enumerations larger than this are logged; the result stays exact.
    std::uint64_t pair_budget = 10'000'000;
};

struct Fragment {
    std::string doc_id;
    std::size_t start = 0;
    std::size_t length = 0;

    auto operator<=>(const Fragment&) const = default;
};

// A maximal run of equal tokens with one fragment in each corpus.
struct ClonePair {
    Fragment a;
    Fragment b;

    auto operator<=>(const ClonePair&) const = default;
};

struct CloneSet {
    std::vector<ClonePair> pairs;  // sorted, unique
    bool truncated = false;        // true when `cap` stopped enumeration early
};

struct CloneCount {
    std::uint64_t count = 0;
    bool truncated = false;  // when true, `count` is a lower bound
};

std::vector<TokenStream> tokenize_corpus(const Corpus& corpus);

// Enumerates every maximal cross-corpus token match of length >= min_tokens
// using a suffix array over both corpora, with one unique sentinel between
// documents so matches never cross a document boundary.
CloneSet detect_cross_clones(std::span<const TokenStream> a, std::span<const TokenStream> b,
                             const CloneParams& params);
CloneSet detect_cross_clones(const Corpus& a, const Corpus& b, const CloneParams& params);

// Number of pairs detect_cross_clones would report, computed without
// materializing them (small-to-large merging of left-context counts).
CloneCount count_cross_clones(std::span<const TokenStream> a, std::span<const TokenStream> b,
                              const CloneParams& params);

CloneCount textual_similarity(const Corpus& candidate, const Corpus& target, const CloneParams& params);

// Divides every count by the largest one. Throws DomainError ("no textual
// signal") when the map is empty or every count is zero.
std::map<std::string, double> normalize_clone_counts(const std::map<std::string, std::uint64_t>& raw);

// One {a_doc, a_start, len, b_doc, b_start} object per line.
void write_clones_jsonl(const CloneSet& clones, std::ostream& out);

}  // namespace plsel
