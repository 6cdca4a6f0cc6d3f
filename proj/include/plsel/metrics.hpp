#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace plsel {

// ---------------------------------------------------------------------------
// Summarization metrics

struct EvalPair {
    std::vector<std::string> hypothesis;
    std::vector<std::string> reference;
};

// Sentence-level BLEU of one pair in [0, 1]: clipped n-gram precisions for
// n = 1..max_n, add-one smoothing for n >= 2, geometric mean and brevity
// penalty exp(1 - r/c) when c < r. An empty hypothesis scores 0.
double sentence_bleu(const EvalPair& pair, int max_n);

// Mean sentence BLEU over all pairs, as a percentage in [0, 100].
double bleu(std::span<const EvalPair> pairs, int max_n);

// Symmetric synonym relation loaded from "word<TAB>synonym" lines.
class SynonymMap {
public:
    void add(const std::string& a, const std::string& b);
    bool related(const std::string& a, const std::string& b) const;
    bool empty() const { return links_.empty(); }
    static SynonymMap load(const std::filesystem::path& path);

private:
    std::unordered_map<std::string, std::unordered_set<std::string>> links_;
};

struct MeteorConfig {
    double alpha = 0.9;
    double beta = 3.0;
    double gamma = 0.5;
    bool stem = true;
    bool lowercase = true;
    const SynonymMap* synonyms = nullptr;  // synonym stage runs only when set
};

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    // reference index matched by each hypothesis token, or -1
    std::vector<long> hyp_to_ref;
};

// Greedy staged unigram alignment: exact, then stem, then synonym. Within a
// stage each hypothesis token, left to right, takes the first free
// reference token it matches.
MeteorAlignment meteor_align(const EvalPair& pair, const MeteorConfig& config);

double sentence_meteor(const EvalPair& pair, const MeteorConfig& config = {});
// Mean over pairs, in [0, 1].
double meteor(std::span<const EvalPair> pairs, const MeteorConfig& config = {});

// ---------------------------------------------------------------------------
// Search metrics

struct RankedQuery {
    std::string qid;
    std::size_t candidates = 1000;
    std::optional<std::size_t> rank_of_correct;  // 1-based
};

// Rank of scores[0] (the correct candidate) among all scores. Equal-scored
// distractors rank ahead of it. nullopt for an empty list.
std::optional<std::size_t> rank_of_correct(std::span<const double> scores);

// Mean reciprocal rank; absent ranks contribute 0.
double mrr(std::span<const RankedQuery> queries);

// ---------------------------------------------------------------------------
// Significance

struct MannWhitneyResult {
    double u_a = 0;  // U statistic of sample a
    double u_b = 0;
    double z = 0;
    double p = 1;                   // two-sided, normal approximation
    std::optional<double> p_exact;  // permutation p when |a| + |b| <= kExactLimit
};

inline constexpr std::size_t kMannWhitneyExactLimit = 12;

// Midranks for ties, tie-corrected variance, continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Performance-to-Time Ratio

struct PerfTimeRecord {
    std::string model;
    double performance = 0;
    double fine_tune_seconds = 0;
};

// (perf / max perf) / (time / max time) per model.
std::map<std::string, double> ptr(std::span<const PerfTimeRecord> records);

// ---------------------------------------------------------------------------
// Input helpers

// Whitespace tokenization of one line.
std::vector<std::string> split_tokens(std::string_view line);

// Two aligned files, one tokenized sentence per line.
std::vector<EvalPair> read_aligned_pairs(const std::filesystem::path& hypotheses,
                                         const std::filesystem::path& references);
// JSONL {hyp, ref}; each field a string or an array of tokens.
std::vector<EvalPair> read_pairs_jsonl(const std::filesystem::path& path);
// JSONL {qid, rank} or {qid, scores: [...]}, index 0 of scores = correct.
std::vector<RankedQuery> read_rankings_jsonl(const std::filesystem::path& path);

}  // namespace plsel
