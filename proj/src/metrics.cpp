#include "plsel/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "plsel/error.hpp"
#include "plsel/porter_stemmer.hpp"

namespace plsel {

namespace {

std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                          std::size_t n) {
    std::unordered_map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t k = 1; k < n; ++k) {
            key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

double sentence_bleu(const EvalPair& pair, int max_n) {
    if (max_n < 1 || max_n > 4) throw DomainError("bleu: max_n must be in 1..4");
    const auto& hyp = pair.hypothesis;
    const auto& ref = pair.reference;
    if (hyp.empty()) return 0.0;

    double log_sum = 0;
    for (int n = 1; n <= max_n; ++n) {
        const auto hyp_counts = ngram_counts(hyp, static_cast<std::size_t>(n));
        const auto ref_counts = ngram_counts(ref, static_cast<std::size_t>(n));
        std::size_t guess = 0, correct = 0;
        for (const auto& [gram, c] : hyp_counts) {
            guess += c;
            if (auto it = ref_counts.find(gram); it != ref_counts.end()) correct += std::min(c, it->second);
        }
        const double smooth = n >= 2 ? 1.0 : 0.0;
        const double num = static_cast<double>(correct) + smooth;
        const double den = static_cast<double>(guess) + smooth;
        if (num == 0.0 || den == 0.0) return 0.0;
        log_sum += std::log(num / den);
    }
    const double c = static_cast<double>(hyp.size());
    const double r = static_cast<double>(ref.size());
    const double log_bp = c < r ? 1.0 - r / c : 0.0;
    return std::exp(log_sum / max_n + log_bp);
}

double bleu(std::span<const EvalPair> pairs, int max_n) {
    if (pairs.empty()) throw DomainError("bleu: empty pair list");
    if (max_n < 1 || max_n > 4) throw DomainError("bleu: max_n must be in 1..4");
    double sum = 0;
    std::size_t empty = 0;
    for (const auto& p : pairs) {
        if (p.hypothesis.empty()) ++empty;
        sum += sentence_bleu(p, max_n);
    }
    if (empty > 0) spdlog::warn("bleu: {} empty hypothesis(es) scored 0", empty);
    return 100.0 * sum / static_cast<double>(pairs.size());
}

void SynonymMap::add(const std::string& a, const std::string& b) {
    links_[a].insert(b);
    links_[b].insert(a);
}

bool SynonymMap::related(const std::string& a, const std::string& b) const {
    auto it = links_.find(a);
    return it != links_.end() && it->second.contains(b);
}

SynonymMap SynonymMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    SynonymMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>synonym");
        map.add(lower(line.substr(0, tab)), lower(line.substr(tab + 1)));
    }
    return map;
}

MeteorAlignment meteor_align(const EvalPair& pair, const MeteorConfig& config) {
    auto prep = [&](const std::vector<std::string>& toks) {
        std::vector<std::string> out;
        out.reserve(toks.size());
        for (const auto& t : toks) out.push_back(config.lowercase ? lower(t) : t);
        return out;
    };
    const auto hyp = prep(pair.hypothesis);
    const auto ref = prep(pair.reference);

    MeteorAlignment al;
    al.hyp_to_ref.assign(hyp.size(), -1);
    std::vector<char> ref_used(ref.size(), 0);

    auto stage = [&](auto&& same) {
        for (std::size_t i = 0; i < hyp.size(); ++i) {
            if (al.hyp_to_ref[i] >= 0) continue;
            for (std::size_t j = 0; j < ref.size(); ++j) {
                if (!ref_used[j] && same(i, j)) {
                    al.hyp_to_ref[i] = static_cast<long>(j);
                    ref_used[j] = 1;
                    ++al.matches;
                    break;
                }
            }
        }
    };

    stage([&](std::size_t i, std::size_t j) { return hyp[i] == ref[j]; });
    if (config.stem) {
        std::vector<std::string> hs, rs;
        for (const auto& t : hyp) hs.push_back(porter_stem(t));
        for (const auto& t : ref) rs.push_back(porter_stem(t));
        stage([&](std::size_t i, std::size_t j) { return hs[i] == rs[j]; });
    }
    if (config.synonyms != nullptr && !config.synonyms->empty())
        stage([&](std::size_t i, std::size_t j) { return config.synonyms->related(hyp[i], ref[j]); });

    // A chunk is a maximal run of hypothesis tokens aligned to consecutive
    // reference tokens in the same order.
    long prev = -2;
    for (long j : al.hyp_to_ref) {
        if (j < 0) {
            prev = -2;
            continue;
        }
        if (j != prev + 1) ++al.chunks;
        prev = j;
    }
    return al;
}

double sentence_meteor(const EvalPair& pair, const MeteorConfig& config) {
    const auto al = meteor_align(pair, config);
    if (al.matches == 0) return 0.0;
    const double m = static_cast<double>(al.matches);
    const double precision = m / static_cast<double>(pair.hypothesis.size());
    const double recall = m / static_cast<double>(pair.reference.size());
    const double f_mean =
        precision * recall / (config.alpha * precision + (1.0 - config.alpha) * recall);
    const double penalty = config.gamma * std::pow(static_cast<double>(al.chunks) / m, config.beta);
    return f_mean * (1.0 - penalty);
}

double meteor(std::span<const EvalPair> pairs, const MeteorConfig& config) {
    if (pairs.empty()) throw DomainError("meteor: empty pair list");
    double sum = 0;
    for (const auto& p : pairs) sum += sentence_meteor(p, config);
    return sum / static_cast<double>(pairs.size());
}

std::optional<std::size_t> rank_of_correct(std::span<const double> scores) {
    if (scores.empty()) return std::nullopt;
    const double correct = scores[0];
    std::size_t ahead = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] >= correct) ++ahead;
    return ahead + 1;
}

double mrr(std::span<const RankedQuery> queries) {
    if (queries.empty()) throw DomainError("mrr: empty query list");
    double sum = 0;
    for (const auto& q : queries) {
        if (!q.rank_of_correct) continue;
        const auto r = *q.rank_of_correct;
        if (r < 1 || r > q.candidates)
            throw DomainError("mrr: rank " + std::to_string(r) + " outside 1.." +
                              std::to_string(q.candidates) + " for query " + q.qid);
        sum += 1.0 / static_cast<double>(r);
    }
    return sum / static_cast<double>(queries.size());
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("mann_whitney_u: both samples need at least one value");
    const std::size_t na = a.size(), nb = b.size(), n = na + b.size();

    std::vector<std::pair<double, std::size_t>> pooled;  // value, origin index
    pooled.reserve(n);
    for (std::size_t i = 0; i < na; ++i) pooled.emplace_back(a[i], i);
    for (std::size_t i = 0; i < nb; ++i) pooled.emplace_back(b[i], na + i);
    std::sort(pooled.begin(), pooled.end());

    std::vector<double> rank(n);
    double tie_term = 0;  // sum of t^3 - t over tie groups
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) rank[pooled[k].second] = mid;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    const double dna = static_cast<double>(na), dnb = static_cast<double>(nb), dn = static_cast<double>(n);
    auto u_of = [&](auto first, auto last) {
        const double rank_sum = std::accumulate(first, last, 0.0);
        return rank_sum - dna * (dna + 1.0) / 2.0;
    };

    MannWhitneyResult r;
    r.u_a = u_of(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(na));
    r.u_b = dna * dnb - r.u_a;
    const double mu = dna * dnb / 2.0;
    const double variance = n > 1 ? dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0))) : 0.0;
    if (variance <= 0.0) {
        r.z = 0;
        r.p = 1;
    } else {
        const double dev = std::max(0.0, std::abs(r.u_a - mu) - 0.5);
        r.z = dev / std::sqrt(variance);
        r.p = std::min(1.0, std::erfc(r.z / std::sqrt(2.0)));
    }

    if (n <= kMannWhitneyExactLimit) {
        // Every assignment of na of the pooled ranks to sample a.
        const double observed = std::abs(r.u_a - mu);
        std::vector<char> pick(n, 0);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), 1);
        std::sort(pick.begin(), pick.end());
        std::size_t extreme = 0, total = 0;
        do {
            double rank_sum = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (pick[i]) rank_sum += rank[i];
            const double u = rank_sum - dna * (dna + 1.0) / 2.0;
            if (std::abs(u - mu) >= observed - 1e-9) ++extreme;
            ++total;
        } while (std::next_permutation(pick.begin(), pick.end()));
        r.p_exact = static_cast<double>(extreme) / static_cast<double>(total);
    }
    return r;
}

std::map<std::string, double> ptr(std::span<const PerfTimeRecord> records) {
    if (records.empty()) throw DomainError("ptr: no records");
    double max_perf = 0, max_time = 0;
    for (const auto& r : records) {
        if (!(r.fine_tune_seconds > 0)) throw DomainError("ptr: non-positive fine-tuning time for " + r.model);
        if (!(r.performance >= 0)) throw DomainError("ptr: negative performance for " + r.model);
        max_perf = std::max(max_perf, r.performance);
        max_time = std::max(max_time, r.fine_tune_seconds);
    }
    if (!(max_perf > 0)) throw DomainError("ptr: every performance value is zero");
    std::map<std::string, double> out;
    for (const auto& r : records) {
        const double perf_norm = r.performance / max_perf;
        const double time_norm = r.fine_tune_seconds / max_time;
        if (!out.emplace(r.model, perf_norm / time_norm).second)
            throw DomainError("ptr: duplicate model id " + r.model);
    }
    return out;
}

std::vector<std::string> split_tokens(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<std::string> tokens_field(const nlohmann::json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(where + ": missing field '" + key + "'");
    if (it->is_string()) return split_tokens(it->get<std::string>());
    if (it->is_array()) return it->get<std::vector<std::string>>();
    throw InputError(where + ": field '" + key + "' must be a string or an array of strings");
}

template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + ": malformed JSON: " + e.what());
        }
        try {
            fn(j, where);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + ": " + e.what());
        }
    }
}

}  // namespace

std::vector<EvalPair> read_aligned_pairs(const std::filesystem::path& hypotheses,
                                         const std::filesystem::path& references) {
    const auto hyps = read_lines(hypotheses);
    const auto refs = read_lines(references);
    if (hyps.size() != refs.size())
        throw InputError("hypothesis and reference files differ in line count (" +
                         std::to_string(hyps.size()) + " vs " + std::to_string(refs.size()) + ")");
    std::vector<EvalPair> pairs;
    pairs.reserve(hyps.size());
    for (std::size_t i = 0; i < hyps.size(); ++i)
        pairs.push_back(EvalPair{split_tokens(hyps[i]), split_tokens(refs[i])});
    return pairs;
}

std::vector<EvalPair> read_pairs_jsonl(const std::filesystem::path& path) {
    std::vector<EvalPair> pairs;
    for_each_json_line(path, [&](const nlohmann::json& j, const std::string& where) {
        pairs.push_back(EvalPair{tokens_field(j, "hyp", where), tokens_field(j, "ref", where)});
    });
    return pairs;
}

std::vector<RankedQuery> read_rankings_jsonl(const std::filesystem::path& path) {
    std::vector<RankedQuery> out;
    for_each_json_line(path, [&](const nlohmann::json& j, const std::string& where) {
        RankedQuery q;
        if (auto it = j.find("qid"); it != j.end()) q.qid = it->is_string() ? it->get<std::string>() : it->dump();
        if (auto it = j.find("scores"); it != j.end()) {
            const auto scores = it->get<std::vector<double>>();
            q.candidates = scores.size();
            q.rank_of_correct = rank_of_correct(scores);
        } else if (auto r = j.find("rank"); r != j.end()) {
            if (!r->is_null()) {
                const auto rank = r->get<long long>();
                if (rank < 1) throw InputError(where + ": rank must be >= 1");
                q.rank_of_correct = static_cast<std::size_t>(rank);
            }
            q.candidates = j.value("candidates", std::size_t{1000});
        } else {
            throw InputError(where + ": expected a 'rank' or 'scores' field");
        }
        out.push_back(std::move(q));
    });
    return out;
}

}  // namespace plsel
