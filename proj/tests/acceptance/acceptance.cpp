// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "plsel/analyze.hpp"
#include "plsel/clone.hpp"
#include "plsel/corpus.hpp"
#include "plsel/embed.hpp"
#include "plsel/metrics.hpp"
#include "plsel/pipeline.hpp"
#include "plsel/select.hpp"

using namespace plsel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

struct Criterion {
    std::string id;
    std::string title;
    double limit_seconds;
    std::function<Outcome()> run;
};

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "plsel-acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- C1 -------------------------------------------------------------------

Outcome printed_scores() {
    Outcome o;
    const std::map<std::string, double> scores{
        {"Python", 0.55}, {"PHP", 0.92}, {"Java", 0.14}, {"Javascript", 0.52}, {"Go", 0.46}};
    // Feeding the combined score as both halves makes the mean equal the input.
    const SuitabilityReport r = suitability(scores, scores, 0.5);
    for (const auto& row : r.rows)
        o.require(std::abs(row.suitability - scores.at(row.language)) <= 1e-12,
                  fmt::format("suitability({}) = {} != {}", row.language, row.suitability, scores.at(row.language)));
    std::set<std::string> expected_by_rule;
    for (const auto& [lang, s] : scores)
        if (s >= 0.5) expected_by_rule.insert(lang);
    const auto chosen = r.selected();
    o.require(std::set<std::string>(chosen.begin(), chosen.end()) == expected_by_rule,
              "selection differs from the >= 0.5 subset");

    const std::vector<std::string> prose{"Python", "PHP", "Go"};
    const SelectionDiscrepancy d = compare_selection(r, prose);
    o.require(!d.empty(), "discrepancy with the prose selection was not flagged");
    o.require(d.selected_not_expected == std::vector<std::string>{"Javascript"} &&
                  d.expected_not_selected == std::vector<std::string>{"Go"},
              "unexpected discrepancy contents");
    if (o.pass)
        o.detail = fmt::format("selected {{{}}}; flagged vs prose: +Javascript (0.52 >= 0.5), -Go (0.46 < 0.5)",
                               fmt::join(chosen, ", "));
    return o;
}

// --- C2 -------------------------------------------------------------------

Outcome clone_oracle() {
    Outcome o;
    std::mt19937_64 rng(0xC10E);
    const std::size_t mins[] = {3, 5, 8};
    std::size_t total_pairs = 0, corpora = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t alphabet = 2 + static_cast<std::size_t>(trial % 6);
        auto a = oracle::random_streams(rng, "a", 1 + rng() % 10, 90, alphabet);
        auto b = oracle::random_streams(rng, "b", 1 + rng() % 10, 90, alphabet);
        for (int k = 0; k < 3; ++k) oracle::plant_clone(rng, a[rng() % a.size()], b[rng() % b.size()], 6 + rng() % 10);
        std::size_t tokens = 0;
        for (const auto* side : {&a, &b})
            for (const auto& ts : *side) tokens += ts.tokens.size();
        if (tokens > 2000) {
            --trial;
            continue;
        }
        ++corpora;
        const std::size_t min_tokens = mins[trial % 3];
        const CloneSet fast = detect_cross_clones(a, b, {.min_tokens = min_tokens});
        const auto slow = oracle::naive_cross_clones(a, b, min_tokens);
        total_pairs += slow.size();
        if (fast.pairs != slow) {
            o.require(false, fmt::format("trial {} (min_tokens {}): {} pairs vs oracle {}", trial, min_tokens,
                                         fast.pairs.size(), slow.size()));
            break;
        }
        const auto count = count_cross_clones(a, b, {.min_tokens = min_tokens}).count;
        if (count != slow.size()) {
            o.require(false, fmt::format("trial {}: count path {} vs oracle {}", trial, count, slow.size()));
            break;
        }
    }
    o.require(total_pairs > 0, "no clones at all in the random corpora");
    if (o.pass) o.detail = fmt::format("{} corpora, {} maximal pairs, exact set equality", corpora, total_pairs);
    return o;
}

// --- C3 -------------------------------------------------------------------

Outcome cosine_closed_form() {
    Outcome o;
    std::mt19937_64 rng(0xC05);
    std::normal_distribution<double> gauss;
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng() % 16);
        const std::size_t vocab = 3 + rng() % 12;
        std::vector<std::string> keys;
        std::vector<float> vecs;
        for (std::size_t w = 0; w < vocab; ++w) {
            keys.push_back("w" + std::to_string(w));
            for (std::uint32_t d = 0; d < dim; ++d) vecs.push_back(static_cast<float>(gauss(rng)));
        }
        const EmbeddingModel model = EmbeddingModel::from_table(keys, vecs, dim);
        auto make = [&](const char* lang) {
            Corpus c;
            c.language = lang;
            const std::size_t docs = 1 + rng() % 20;
            for (std::size_t i = 0; i < docs; ++i) {
                CorpusDocument d;
                d.id = std::to_string(i);
                d.language = lang;
                const std::size_t len = 1 + rng() % 8;
                for (std::size_t k = 0; k < len; ++k)
                    d.code += (rng() % 10 == 0 ? std::string("unk") : keys[rng() % vocab]) + " ";
                c.documents.push_back(d);
            }
            return c;
        };
        const Corpus a = make("a"), b = make("b");
        std::vector<std::vector<double>> va, vb;
        for (const auto& d : a.documents) va.push_back(embed_document(model, tokenize(d)).vector);
        for (const auto& d : b.documents) vb.push_back(embed_document(model, tokenize(d)).vector);
        const auto brute = oracle::brute_mean_cosine(va, vb);
        if (!brute) continue;  // one side wholly unembeddable
        const double fast = semantic_similarity(model, a, b);
        worst = std::max(worst, std::abs(fast - *brute));
    }
    o.require(worst <= 1e-9, fmt::format("max deviation {:.3e} > 1e-9", worst));
    if (o.pass) o.detail = fmt::format("500 corpus pairs, max |fast - brute| = {:.2e}", worst);
    return o;
}

// --- C4 -------------------------------------------------------------------

Outcome metric_fixtures() {
    Outcome o;
    auto pair = [](const char* h, const char* r) { return EvalPair{split_tokens(h), split_tokens(r)}; };

    const std::vector<EvalPair> hand{pair("the cat sat", "the cat sat down")};
    const double b1 = bleu(hand, 1);
    o.require(std::abs(b1 - 71.65) <= 0.01, fmt::format("BLEU-1 hand case {:.4f}", b1));

    const std::vector<EvalPair> same{pair("return the sum of a and b", "return the sum of a and b")};
    const double b4 = bleu(same, 4);
    o.require(b4 == 100.0, fmt::format("BLEU(identical) {:.17g}", b4));

    const double m = sentence_meteor(pair("open file", "open file"));
    o.require(std::abs(m - 0.9375) <= 1e-6, fmt::format("METEOR identical 2-token {:.8f}", m));

    const std::vector<RankedQuery> q{{"q1", 1000, 1}, {"q2", 1000, 2}, {"q4", 1000, 4}};
    const double r = mrr(q);
    o.require(std::abs(r - 0.58333) <= 1e-9 || std::abs(r - 7.0 / 12.0) <= 1e-9, fmt::format("MRR {:.10f}", r));

    std::mt19937_64 rng(0x0DD);
    std::size_t u_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> a(1 + rng() % 30), b(1 + rng() % 30);
        const bool tied = i % 2 == 0;
        for (auto& x : a) x = tied ? static_cast<double>(rng() % 5) : std::ldexp(static_cast<double>(rng() >> 11), -53);
        for (auto& x : b) x = tied ? static_cast<double>(rng() % 5) : std::ldexp(static_cast<double>(rng() >> 11), -53);
        const auto res = mann_whitney_u(a, b);
        if (std::abs(res.u_a + res.u_b - static_cast<double>(a.size() * b.size())) > 1e-9) ++u_bad;
    }
    o.require(u_bad == 0, fmt::format("U_a + U_b != |a||b| in {} samples", u_bad));

    // Normal approximation against the exact permutation p for every size
    // split with |a| + |b| <= 12, continuous and tied samples.
    double worst = 0;
    std::string worst_at;
    std::size_t oracle_bad = 0, checked = 0;
    for (std::size_t n = 2; n <= kMannWhitneyExactLimit; ++n) {
        for (std::size_t na = 1; na < n; ++na) {
            const std::size_t nb = n - na;
            for (int rep = 0; rep < 6; ++rep) {
                std::vector<double> a(na), b(nb);
                const bool tied = rep % 2 == 1;
                for (auto& x : a) x = tied ? static_cast<double>(rng() % 3) : static_cast<double>(rng() % 100000);
                for (auto& x : b) x = tied ? static_cast<double>(rng() % 3) : static_cast<double>(rng() % 100000) + 0.5;
                const auto res = mann_whitney_u(a, b);
                if (!res.p_exact) continue;
                ++checked;
                if (std::abs(*res.p_exact - oracle::permutation_p(a, b)) > 1e-12) ++oracle_bad;
                const double gap = std::abs(res.p - *res.p_exact);
                if (gap > worst) {
                    worst = gap;
                    worst_at = fmt::format("|a|={},|b|={}{}", na, nb, tied ? " tied" : "");
                }
            }
        }
    }
    o.require(oracle_bad == 0, fmt::format("exact p disagrees with permutation oracle in {} cases", oracle_bad));
    o.require(worst <= 0.05, fmt::format("normal-approx p off from exact p by {:.3f} at {} (limit 0.05)", worst, worst_at));
    if (o.pass)
        o.detail = fmt::format("BLEU-1 {:.2f}, BLEU-4 identical {}, METEOR {:.4f}, MRR {:.5f}, {} exact-p cases", b1,
                               b4, m, r, checked);
    return o;
}

// --- C5 -------------------------------------------------------------------

Outcome ptr_invariance() {
    Outcome o;
    std::mt19937_64 rng(0x9712);
    std::uniform_real_distribution<double> perf(0.01, 1.0), secs(1.0, 1e5), scale(1e-3, 1e3);
    double worst = 0, worst_top = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PerfTimeRecord> rs;
        const std::size_t n = 1 + rng() % 10;
        for (std::size_t i = 0; i < n; ++i) rs.push_back({"m" + std::to_string(i), perf(rng), secs(rng)});
        // One record holds both maxima.
        rs[0].performance = 2.0;
        rs[0].fine_tune_seconds = 2e5;
        const auto base = ptr(rs);
        worst_top = std::max(worst_top, std::abs(base.at("m0") - 1.0));

        for (int which = 0; which < 2; ++which) {
            const double c = scale(rng);
            auto scaled = rs;
            for (auto& r : scaled) (which == 0 ? r.fine_tune_seconds : r.performance) *= c;
            const auto again = ptr(scaled);
            for (const auto& [model, v] : base) worst = std::max(worst, std::abs(again.at(model) - v));
        }
    }
    o.require(worst <= 1e-9, fmt::format("PTR changed by {:.3e} under scaling", worst));
    o.require(worst_top <= 1e-12, fmt::format("max-perf-max-time PTR off by {:.3e}", worst_top));
    if (o.pass) o.detail = fmt::format("100 record sets, max drift {:.2e}", worst);
    return o;
}

// --- C6 -------------------------------------------------------------------

Outcome improvement_column() {
    Outcome o;
    Table t;
    t.columns = {"task", "baseline_mrr", "mrr"};
    t.rows = {{std::string("code search (ruby)"), 0.4219, 0.57}};
    const Table with = add_improvement_columns(t, "baseline_mrr");
    const double pct = std::get<double>(with.rows[0].back());
    o.require(std::abs(pct - 35.1) <= 0.1, fmt::format("improvement {:.4f}% vs +35.1%", pct));
    const std::string text = emit_report(t, ReportFormat::text, std::string("baseline_mrr"));
    o.require(text.find("+35.1%") != std::string::npos, "text report does not show +35.1%");
    if (o.pass) o.detail = fmt::format("0.57 vs 0.4219 -> {:+.2f}% (consistency check of a reverse-derived baseline)", pct);
    return o;
}

// --- C7 -------------------------------------------------------------------

Outcome binning_partition() {
    Outcome o;
    std::mt19937_64 rng(0xB1);
    std::size_t failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const std::size_t spread = 1 + rng() % (trial % 4 == 0 ? 3 : 300);
        std::vector<std::pair<std::string, std::size_t>> ls;
        for (std::size_t i = 0; i < n; ++i) ls.emplace_back(std::to_string(i), rng() % spread);
        const LengthBins b = quartile_bins(ls);
        std::vector<int> seen(n, 0);
        bool ok = b.q1 <= b.q2 && b.q2 <= b.q3;
        for (std::size_t k = 0; k < 4; ++k) {
            for (const auto& id : b.bins[k]) {
                const std::size_t i = std::stoul(id);
                ++seen[i];
                const double len = static_cast<double>(ls[i].second);
                ok = ok && bin_index(len, b.q1, b.q2, b.q3) == k;
                if (k == 0) ok = ok && len < b.q1;
                if (k == 1) ok = ok && b.q1 <= len && len < b.q2;
                if (k == 2) ok = ok && b.q2 <= len && len < b.q3;
                if (k == 3) ok = ok && len >= b.q3;
            }
        }
        for (int s : seen) ok = ok && s == 1;
        if (!ok) ++failures;
    }
    o.require(failures == 0, fmt::format("{} multisets violated the partition or boundary rules", failures));

    for (std::size_t len : {0u, 1u, 30u, 1000u}) {
        std::vector<std::pair<std::string, std::size_t>> ls;
        for (std::size_t i = 0; i < 1 + len % 17; ++i) ls.emplace_back(std::to_string(i), len);
        const LengthBins b = quartile_bins(ls);
        o.require(b.bins[3].size() == ls.size(), fmt::format("equal lengths {} not wholly in bin 4", len));
    }
    if (o.pass) o.detail = "1000 multisets partitioned; degenerate inputs all in bin 4";
    return o;
}

// --- C8 -------------------------------------------------------------------

Outcome end_to_end() {
    Outcome o;
    const fs::path toy = fs::path(PLSEL_FIXTURE_DIR) / "toy";
    RunConfig cfg = load_run_config(toy / "config.json");
    cfg.jobs = 1;

    cfg.output_dir = scratch_dir("run-1");
    const SuitabilityRun first = cmd_suitability(cfg);
    const std::string json1 = slurp(first.json_path), text1 = slurp(first.text_path);

    cfg.output_dir = scratch_dir("run-2");
    const SuitabilityRun second = cmd_suitability(cfg);
    o.require(slurp(second.json_path) == json1, "report.json differs between fresh runs");
    o.require(slurp(second.text_path) == text1, "report.txt differs between fresh runs");

    const SuitabilityRun cached = cmd_suitability(cfg);
    o.require(slurp(cached.json_path) == json1, "report.json differs on a cached rerun");

    // Oracle: recompute both similarities with the slow reference paths and
    // apply the suitability rule by hand.
    std::map<std::string, Corpus> corpora;
    for (const auto& [lang, files] : cfg.corpora) corpora[lang] = load_jsonl(files.front(), lang, cfg.split);
    const Corpus& target = corpora.at(cfg.target);
    fs::path model_path;
    for (const auto& e : fs::directory_iterator(cfg.output_dir / "cache"))
        if (e.path().filename().string().starts_with("embed-")) model_path = e.path();
    const EmbeddingModel model = EmbeddingModel::load(model_path);
    auto doc_vectors = [&](const Corpus& c) {
        std::vector<std::vector<double>> out;
        for (const auto& d : c.documents) out.push_back(embed_document(model, tokenize(d)).vector);
        return out;
    };
    const auto target_vecs = doc_vectors(target);
    const auto target_streams = tokenize_corpus(target);
    std::map<std::string, double> sem, text;
    for (const auto& [lang, c] : corpora) {
        if (lang == cfg.target) continue;
        sem[lang] = *oracle::brute_mean_cosine(doc_vectors(c), target_vecs);
        text[lang] = static_cast<double>(oracle::naive_cross_clones(tokenize_corpus(c), target_streams, cfg.clone.min_tokens).size());
    }
    double sem_max = 0, text_max = 0;
    for (const auto& [l, v] : sem) sem_max = std::max(sem_max, v);
    for (const auto& [l, v] : text) text_max = std::max(text_max, v);
    std::vector<std::string> oracle_selected;
    std::string scores;
    for (const auto& [lang, s] : sem) {
        const double suit = (std::max(0.0, s) / sem_max + text.at(lang) / text_max) / 2.0;
        scores += fmt::format(" {}={:.3f}", lang, suit);
        if (suit >= cfg.theta) oracle_selected.push_back(lang);
        const SuitabilityRow* row = first.report.find(lang);
        o.require(row != nullptr && std::abs(row->suitability - suit) <= 1e-9,
                  fmt::format("suitability({}) differs from the oracle", lang));
    }
    o.require(oracle_selected == std::vector<std::string>{"python"},
              fmt::format("oracle selected {{{}}}, fixture was built for {{python}}", fmt::join(oracle_selected, ", ")));
    o.require(first.report.selected() == oracle_selected,
              fmt::format("report selected {{{}}}", fmt::join(first.report.selected(), ", ")));
    o.require(first.exit_code == kExitOk, "exit code is not 0 despite a selection");
    if (o.pass) o.detail = fmt::format("byte-identical reports; oracle suitability{}; selected {{python}}", scores);
    return o;
}

// --- C9 -------------------------------------------------------------------

Outcome corpus_round_trip() {
    Outcome o;
    const fs::path dir = scratch_dir("round-trip");
    std::mt19937_64 rng(0x9A);
    const char* pieces[] = {"def", "x", "(", ")", "\"quoted\"", "\\", "\t", "\n", "caf\xc3\xa9", "\xe2\x9c\x93", "{}", "</script>", "  "};
    std::vector<CorpusDocument> generated;
    {
        std::ofstream out(dir / "in.jsonl", std::ios::binary);
        for (int i = 0; i < 1000; ++i) {
            nlohmann::json j;
            std::string code;
            for (int k = 0, n = 1 + static_cast<int>(rng() % 20); k < n; ++k) code += pieces[rng() % std::size(pieces)];
            if (code.find_first_not_of(" \t\n") == std::string::npos) code = "pass";
            j["id"] = fmt::format("doc-{:04d}", i);
            j["code"] = code;
            if (rng() % 3 != 0) j["docstring"] = i % 7 == 0 ? std::string() : fmt::format("does thing {}", i);
            if (rng() % 2 == 0) j["code_tokens"] = normalize_plaintext(code);
            if (rng() % 4 == 0) j["split"] = "valid";
            out << j.dump() << '\n';
        }
    }
    const Corpus first = load_jsonl(dir / "in.jsonl", "ruby", Split::train);
    o.require(first.size() == 1000, fmt::format("loaded {} documents", first.size()));
    write_jsonl(first, dir / "out.jsonl");
    const Corpus second = load_jsonl(dir / "out.jsonl", "ruby", Split::train);
    o.require(second.documents == first.documents, "documents differ after write and reload");
    write_jsonl(second, dir / "out2.jsonl");
    o.require(slurp(dir / "out.jsonl") == slurp(dir / "out2.jsonl"), "second write is not byte-identical");
    if (o.pass) o.detail = "1000 documents identical after load -> write -> load";
    return o;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const std::vector<Criterion> criteria = {
        {"C1", "printed suitability scores, theta 0.5", 1, printed_scores},
        {"C2", "clone detector equals naive oracle", 60, clone_oracle},
        {"C3", "closed-form mean pairwise cosine", 10, cosine_closed_form},
        {"C4", "metric fixtures", 30, metric_fixtures},
        {"C5", "PTR scale invariance", 5, ptr_invariance},
        {"C6", "improvement column +35.1%", 1, improvement_column},
        {"C7", "quartile binning partition", 5, binning_partition},
        {"C8", "end-to-end determinism on toy fixture", 120, end_to_end},
        {"C9", "corpus round-trip", 5, corpus_round_trip},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.limit_seconds) o.require(false, fmt::format("took {:.2f} s, limit {} s", secs, c.limit_seconds));
        if (!o.pass) ++failures;
        std::printf("[%s] %s %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
