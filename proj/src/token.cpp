#include "plsel/token.hpp"

#include "plsel/corpus.hpp"

namespace plsel {

namespace {

bool is_ident_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length of a well-formed UTF-8 sequence starting at i, 1 for anything else.
std::size_t char_width(std::string_view s, std::size_t i) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t w = c >= 0xF0 && c <= 0xF4 ? 4 : c >= 0xE0 ? 3 : c >= 0xC2 && c < 0xE0 ? 2 : 1;
    if (w == 1 || c > 0xF4 || i + w > s.size()) return 1;
    for (std::size_t k = 1; k < w; ++k)
        if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
    return w;
}

}  // namespace

std::vector<std::string> normalize_plaintext(std::string_view code) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = code.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(code[i]);
        if (is_space(c)) {
            ++i;
        } else if (is_ident_char(c)) {
            std::size_t j = i + 1;
            while (j < n && is_ident_char(static_cast<unsigned char>(code[j]))) ++j;
            tokens.emplace_back(code.substr(i, j - i));
            i = j;
        } else {
            const std::size_t w = char_width(code, i);
            tokens.emplace_back(code.substr(i, w));
            i += w;
        }
    }
    return tokens;
}

TokenStream tokenize(const CorpusDocument& doc) {
    return TokenStream{doc.id, normalize_plaintext(doc.code)};
}

std::size_t length_of(const CorpusDocument& doc) {
    return normalize_plaintext(doc.code).size();
}

}  // namespace plsel
