#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace plsel {

struct CorpusDocument;

// Bumped whenever the tokenization rules change; recorded in report provenance.
inline constexpr std::string_view kTokenizerVersion = "plaintext-2";

// Unit used when measuring code length.
inline constexpr std::string_view kCodeLengthUnit = "normalized-tokens";

struct TokenStream {
    std::string doc_id;
    std::vector<std::string> tokens;
};

// Plaintext-mode tokenization. Whitespace (including line breaks) separates
// tokens, maximal runs of [A-Za-z0-9_] form one token, and every other
// non-whitespace character (a whole UTF-8 sequence; stray bytes alone) is a token.
std::vector<std::string> normalize_plaintext(std::string_view code);

TokenStream tokenize(const CorpusDocument& doc);

std::size_t length_of(const CorpusDocument& doc);

}  // namespace plsel
