#include "plsel/suffix_array.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace plsel {

namespace {

using Index = std::int32_t;

std::vector<Index> naive_suffix_array(std::span<const Index> s) {
    std::vector<Index> sa(s.size());
    std::iota(sa.begin(), sa.end(), 0);
    std::sort(sa.begin(), sa.end(), [&](Index a, Index b) {
        return std::lexicographical_compare(s.begin() + a, s.end(), s.begin() + b, s.end());
    });
    return sa;
}

std::vector<Index> sa_is(std::span<const Index> s, Index upper) {
    const auto n = static_cast<Index>(s.size());
    if (n == 0) return {};
    if (n == 1) return {0};
    if (n < 16) return naive_suffix_array(s);

    std::vector<Index> sa(static_cast<std::size_t>(n));
    // is_s[i]: suffix i is S-type (smaller than suffix i+1).
    std::vector<char> is_s(static_cast<std::size_t>(n), 0);
    for (Index i = n - 2; i >= 0; --i)
        is_s[i] = (s[i] == s[i + 1]) ? is_s[i + 1] : static_cast<char>(s[i] < s[i + 1]);

    // Bucket boundaries: start_l[c] is the first slot of bucket c, start_s[c]
    // the first slot of its S-type tail.
    std::vector<Index> start_l(static_cast<std::size_t>(upper) + 2, 0);
    std::vector<Index> start_s(static_cast<std::size_t>(upper) + 2, 0);
    for (Index i = 0; i < n; ++i) {
        if (!is_s[i]) ++start_s[s[i]];
        else ++start_l[s[i] + 1];
    }
    for (Index c = 0; c <= upper; ++c) {
        start_s[c] += start_l[c];
        if (c < upper) start_l[c + 1] += start_s[c];
    }

    auto induce = [&](const std::vector<Index>& lms) {
        std::fill(sa.begin(), sa.end(), -1);
        std::vector<Index> buf(start_s);
        for (Index d : lms) {
            if (d == n) continue;
            sa[buf[s[d]]++] = d;
        }
        buf = start_l;
        sa[buf[s[n - 1]]++] = n - 1;
        for (Index i = 0; i < n; ++i) {
            const Index v = sa[i];
            if (v >= 1 && !is_s[v - 1]) sa[buf[s[v - 1]]++] = v - 1;
        }
        buf = start_l;
        for (Index i = n - 1; i >= 0; --i) {
            const Index v = sa[i];
            if (v >= 1 && is_s[v - 1]) sa[--buf[s[v - 1] + 1]] = v - 1;
        }
    };

    std::vector<Index> lms_rank(static_cast<std::size_t>(n) + 1, -1);
    std::vector<Index> lms;
    for (Index i = 1; i < n; ++i) {
        if (!is_s[i - 1] && is_s[i]) {
            lms_rank[i] = static_cast<Index>(lms.size());
            lms.push_back(i);
        }
    }
    const auto m = static_cast<Index>(lms.size());

    induce(lms);

    if (m > 0) {
        std::vector<Index> sorted_lms;
        sorted_lms.reserve(static_cast<std::size_t>(m));
        for (Index v : sa)
            if (lms_rank[v] != -1) sorted_lms.push_back(v);

        // Name LMS substrings; equal substrings share a name.
        std::vector<Index> reduced(static_cast<std::size_t>(m));
        Index name = 0;
        reduced[lms_rank[sorted_lms[0]]] = 0;
        for (Index i = 1; i < m; ++i) {
            Index l = sorted_lms[i - 1];
            Index r = sorted_lms[i];
            const Index end_l = (lms_rank[l] + 1 < m) ? lms[lms_rank[l] + 1] : n;
            const Index end_r = (lms_rank[r] + 1 < m) ? lms[lms_rank[r] + 1] : n;
            bool same = true;
            if (end_l - l != end_r - r) {
                same = false;
            } else {
                while (l < end_l && s[l] == s[r]) {
                    ++l;
                    ++r;
                }
                if (l == n || s[l] != s[r]) same = false;
            }
            if (!same) ++name;
            reduced[lms_rank[sorted_lms[i]]] = name;
        }

        const auto reduced_sa = sa_is(reduced, name);
        for (Index i = 0; i < m; ++i) sorted_lms[i] = lms[reduced_sa[i]];
        induce(sorted_lms);
    }
    return sa;
}

}  // namespace

std::vector<std::int32_t> build_suffix_array(std::span<const std::int32_t> text, std::int32_t upper) {
    if (text.size() >= static_cast<std::size_t>(std::numeric_limits<Index>::max()))
        throw std::length_error("build_suffix_array: text too long for 32-bit indices");
    for (Index c : text)
        if (c < 0 || c > upper) throw std::out_of_range("build_suffix_array: symbol outside [0, upper]");
    return sa_is(text, upper);
}

std::vector<std::int32_t> build_lcp(std::span<const std::int32_t> text,
                                    std::span<const std::int32_t> sa) {
    const auto n = static_cast<Index>(text.size());
    std::vector<Index> rank(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rank[sa[i]] = i;
    std::vector<Index> lcp(static_cast<std::size_t>(n), 0);
    Index h = 0;
    for (Index i = 0; i < n; ++i) {
        if (h > 0) --h;
        if (rank[i] == 0) {
            h = 0;
            continue;
        }
        const Index j = sa[rank[i] - 1];
        while (i + h < n && j + h < n && text[i + h] == text[j + h]) ++h;
        lcp[rank[i]] = h;
    }
    return lcp;
}

}  // namespace plsel
