#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace plsel {

// Suffix array of an integer string whose symbols lie in [0, upper], built
// with induced sorting (SA-IS) in O(n + upper).
std::vector<std::int32_t> build_suffix_array(std::span<const std::int32_t> text, std::int32_t upper);

// Kasai et al.: lcp[i] = LCP(text[sa[i-1]..], text[sa[i]..]) for i >= 1; lcp[0] = 0.
std::vector<std::int32_t> build_lcp(std::span<const std::int32_t> text,
                                    std::span<const std::int32_t> sa);

}  // namespace plsel
