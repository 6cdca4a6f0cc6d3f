#include "plsel/clone.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "plsel/error.hpp"
#include "plsel/normalize.hpp"
#include "plsel/suffix_array.hpp"

namespace plsel {

namespace {

using Index = std::int32_t;

// Both corpora laid out as  $0 d0 $1 d1 ... $D  where every $k is a distinct
// sentinel symbol. A position's left neighbour always exists, and a sentinel
// neighbour is unique, so a document edge never looks like a token match.
struct JointText {
    std::vector<Index> symbols;
    std::vector<Index> doc_start;  // position of each document's first token
    std::vector<Index> doc_of;     // document index per position, -1 at sentinels
    std::size_t docs_a = 0;
    Index upper = 0;
};

JointText build_joint_text(std::span<const TokenStream> a, std::span<const TokenStream> b) {
    std::unordered_map<std::string_view, Index> vocab;
    std::size_t total = 1;
    for (auto side : {a, b})
        for (const auto& ts : side) total += ts.tokens.size() + 1;
    if (total >= static_cast<std::size_t>(std::numeric_limits<Index>::max()) / 2)
        throw DomainError("clone detection: corpora too large for 32-bit positions");

    auto intern = [&](const std::string& tok) {
        auto [it, inserted] = vocab.try_emplace(tok, static_cast<Index>(vocab.size()));
        return it->second;
    };
    // First pass assigns token ids so sentinels can follow them.
    for (auto side : {a, b})
        for (const auto& ts : side)
            for (const auto& tok : ts.tokens) intern(tok);
    const auto vocab_size = static_cast<Index>(vocab.size());

    JointText jt;
    jt.docs_a = a.size();
    jt.symbols.reserve(total);
    jt.doc_of.reserve(total);
    Index doc = 0;
    for (auto side : {a, b}) {
        for (const auto& ts : side) {
            jt.symbols.push_back(vocab_size + doc);
            jt.doc_of.push_back(-1);
            jt.doc_start.push_back(static_cast<Index>(jt.symbols.size()));
            for (const auto& tok : ts.tokens) {
                jt.symbols.push_back(vocab.find(tok)->second);
                jt.doc_of.push_back(doc);
            }
            ++doc;
        }
    }
    jt.symbols.push_back(vocab_size + doc);
    jt.doc_of.push_back(-1);
    jt.upper = vocab_size + doc;
    return jt;
}

// Bottom-up traversal of the lcp-interval tree. Each suffix enters as a leaf
// set; when two sibling subtrees meet inside an interval of lcp h they share
// exactly h tokens and differ in the next one, so every pair formed there is
// right-maximal with length h. `merge(into, child, h)` sees each such meeting
// once. Intervals with h < min_len are dropped since no ancestor can reach
// min_len again.
template <class Set, class LeafFn, class MergeFn>
void traverse_lcp_intervals(std::span<const Index> sa, std::span<const Index> lcp, Index min_len,
                            LeafFn&& make_leaf, MergeFn&& merge, const bool& stop) {
    struct Frame {
        Index h;
        Set set;
    };
    const auto n = static_cast<Index>(sa.size());
    if (n == 0) return;
    std::vector<Frame> stack;
    stack.push_back(Frame{0, Set{}});

    auto attach = [&](Frame& node, Set&& child) {
        if (node.h < min_len) {
            node.set = Set{};
            return;
        }
        merge(node.set, std::move(child), node.h);
    };

    Set pending = make_leaf(sa[0]);
    for (Index i = 1; i <= n && !stop; ++i) {
        const Index h = i < n ? lcp[i] : 0;
        while (stack.back().h > h) {
            Frame node = std::move(stack.back());
            stack.pop_back();
            attach(node, std::move(pending));
            pending = std::move(node.set);
        }
        if (stack.back().h < h) {
            stack.push_back(Frame{h, h < min_len ? Set{} : std::move(pending)});
        } else {
            attach(stack.back(), std::move(pending));
        }
        pending = i < n ? make_leaf(sa[i]) : Set{};
    }
}

// Positions grouped by left-neighbour symbol and by corpus side.
struct PositionSet {
    struct Group {
        std::vector<Index> a;
        std::vector<Index> b;
    };
    std::unordered_map<Index, Group> by_left;
    std::size_t size = 0;
};

struct CountSet {
    struct Group {
        std::uint64_t a = 0;
        std::uint64_t b = 0;
    };
    std::unordered_map<Index, Group> by_left;
    std::uint64_t total_a = 0;
    std::uint64_t total_b = 0;
};

struct Prepared {
    JointText text;
    std::vector<Index> sa;
    std::vector<Index> lcp;
};

Prepared prepare(std::span<const TokenStream> a, std::span<const TokenStream> b) {
    Prepared p;
    p.text = build_joint_text(a, b);
    p.sa = build_suffix_array(p.text.symbols, p.text.upper);
    p.lcp = build_lcp(p.text.symbols, p.sa);
    return p;
}

Index checked_min_len(const CloneParams& params) {
    if (params.min_tokens < 1) throw DomainError("clone detection: min_tokens must be >= 1");
    return static_cast<Index>(
        std::min<std::size_t>(params.min_tokens, std::numeric_limits<Index>::max()));
}

}  // namespace

std::vector<TokenStream> tokenize_corpus(const Corpus& corpus) {
    std::vector<TokenStream> out;
    out.reserve(corpus.size());
    for (const auto& doc : corpus.documents) out.push_back(tokenize(doc));
    return out;
}

CloneSet detect_cross_clones(std::span<const TokenStream> a, std::span<const TokenStream> b,
                             const CloneParams& params) {
    const Index min_len = checked_min_len(params);
    CloneSet result;
    if (a.empty() || b.empty()) return result;

    const Prepared p = prepare(a, b);
    const auto& jt = p.text;
    const auto docs_a = static_cast<Index>(jt.docs_a);

    auto make_leaf = [&](Index pos) {
        PositionSet s;
        const Index doc = jt.doc_of[pos];
        if (doc < 0) return s;
        auto& g = s.by_left[jt.symbols[pos - 1]];
        (doc < docs_a ? g.a : g.b).push_back(pos);
        s.size = 1;
        return s;
    };

    auto fragment = [&](Index pos, Index len, std::span<const TokenStream> side, Index doc_offset) {
        const Index doc = jt.doc_of[pos];
        return Fragment{side[static_cast<std::size_t>(doc - doc_offset)].doc_id,
                        static_cast<std::size_t>(pos - jt.doc_start[doc]),
                        static_cast<std::size_t>(len)};
    };

    bool stop = false;
    bool budget_logged = false;
    auto emit = [&](Index pos_a, Index pos_b, Index len) {
        if (stop) return;
        result.pairs.push_back(ClonePair{fragment(pos_a, len, a, 0), fragment(pos_b, len, b, docs_a)});
        if (params.cap && result.pairs.size() >= *params.cap) {
            stop = true;
            result.truncated = true;
        }
        if (!budget_logged && result.pairs.size() > params.pair_budget) {
            budget_logged = true;
            spdlog::info("clone enumeration exceeded the pair budget of {}; continuing",
                         params.pair_budget);
        }
    };

    auto merge = [&](PositionSet& into, PositionSet&& child, Index h) {
        PositionSet* small = &child;
        PositionSet* large = &into;
        if (small->size > large->size) std::swap(small, large);
        for (const auto& [left_s, gs] : small->by_left) {
            for (const auto& [left_l, gl] : large->by_left) {
                if (left_s == left_l) continue;
                for (Index pa : gs.a)
                    for (Index pb : gl.b) emit(pa, pb, h);
                for (Index pb : gs.b)
                    for (Index pa : gl.a) emit(pa, pb, h);
            }
        }
        for (auto& [left, g] : small->by_left) {
            auto& dst = large->by_left[left];
            dst.a.insert(dst.a.end(), g.a.begin(), g.a.end());
            dst.b.insert(dst.b.end(), g.b.begin(), g.b.end());
        }
        large->size += small->size;
        if (large != &into) into = std::move(*large);
    };

    traverse_lcp_intervals<PositionSet>(p.sa, p.lcp, min_len, make_leaf, merge, stop);

    std::sort(result.pairs.begin(), result.pairs.end());
    result.pairs.erase(std::unique(result.pairs.begin(), result.pairs.end()), result.pairs.end());
    return result;
}

CloneSet detect_cross_clones(const Corpus& a, const Corpus& b, const CloneParams& params) {
    const auto ta = tokenize_corpus(a);
    const auto tb = tokenize_corpus(b);
    return detect_cross_clones(ta, tb, params);
}

CloneCount count_cross_clones(std::span<const TokenStream> a, std::span<const TokenStream> b,
                              const CloneParams& params) {
    const Index min_len = checked_min_len(params);
    CloneCount result;
    if (a.empty() || b.empty()) return result;

    const Prepared p = prepare(a, b);
    const auto& jt = p.text;
    const auto docs_a = static_cast<Index>(jt.docs_a);

    auto make_leaf = [&](Index pos) {
        CountSet s;
        const Index doc = jt.doc_of[pos];
        if (doc < 0) return s;
        auto& g = s.by_left[jt.symbols[pos - 1]];
        if (doc < docs_a) {
            g.a = 1;
            s.total_a = 1;
        } else {
            g.b = 1;
            s.total_b = 1;
        }
        return s;
    };

    bool stop = false;
    auto merge = [&](CountSet& into, CountSet&& child, Index) {
        CountSet* small = &child;
        CountSet* large = &into;
        if (small->by_left.size() > large->by_left.size()) std::swap(small, large);
        // Cross-side pairs between the two subtrees minus those sharing a
        // left neighbour (not left-maximal).
        std::uint64_t pairs = small->total_a * large->total_b + small->total_b * large->total_a;
        for (const auto& [left, g] : small->by_left) {
            auto it = large->by_left.find(left);
            if (it == large->by_left.end()) continue;
            pairs -= g.a * it->second.b + g.b * it->second.a;
        }
        result.count += pairs;
        if (params.cap && result.count >= *params.cap) {
            result.count = *params.cap;
            result.truncated = true;
            stop = true;
        }
        for (const auto& [left, g] : small->by_left) {
            auto& dst = large->by_left[left];
            dst.a += g.a;
            dst.b += g.b;
        }
        large->total_a += small->total_a;
        large->total_b += small->total_b;
        if (large != &into) into = std::move(*large);
    };

    traverse_lcp_intervals<CountSet>(p.sa, p.lcp, min_len, make_leaf, merge, stop);
    if (result.count > params.pair_budget)
        spdlog::info("clone count {} exceeds the pair budget of {}", result.count, params.pair_budget);
    return result;
}

CloneCount textual_similarity(const Corpus& candidate, const Corpus& target, const CloneParams& params) {
    const auto tc = tokenize_corpus(candidate);
    const auto tt = tokenize_corpus(target);
    return count_cross_clones(tc, tt, params);
}

std::map<std::string, double> normalize_clone_counts(const std::map<std::string, std::uint64_t>& raw) {
    std::map<std::string, double> as_real;
    for (const auto& [k, v] : raw) as_real.emplace(k, static_cast<double>(v));
    if (raw.empty()) throw DomainError("clone counts: no candidate languages");
    try {
        return normalize_by_max(as_real, "clone counts");
    } catch (const DomainError&) {
        throw DomainError("no textual signal: every clone count is zero");
    }
}

void write_clones_jsonl(const CloneSet& clones, std::ostream& out) {
    for (const auto& pair : clones.pairs) {
        nlohmann::ordered_json j;
        j["a_doc"] = pair.a.doc_id;
        j["a_start"] = pair.a.start;
        j["len"] = pair.a.length;
        j["b_doc"] = pair.b.doc_id;
        j["b_start"] = pair.b.start;
        out << j.dump() << '\n';
    }
}

}  // namespace plsel
