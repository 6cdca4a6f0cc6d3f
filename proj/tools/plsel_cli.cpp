#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "plsel/analyze.hpp"
#include "plsel/clone.hpp"
#include "plsel/corpus.hpp"
#include "plsel/embed.hpp"
#include "plsel/error.hpp"
#include "plsel/metrics.hpp"
#include "plsel/pipeline.hpp"
#include "plsel/select.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace plsel;

namespace {

struct CorpusArg {
    std::string language;
    fs::path path;
};

CorpusArg parse_corpus_arg(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
        throw InputError("expected LANG=PATH, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

struct CorpusFlags {
    std::string split = "train";
    bool lenient = false;
    bool bimodal = false;
};

void add_corpus_flags(CLI::App* app, CorpusFlags& f) {
    app->add_option("--split", f.split, "split tag for records without one")->capture_default_str();
    app->add_flag("--lenient", f.lenient, "skip malformed lines instead of failing");
    app->add_flag("--bimodal-only", f.bimodal, "keep only records with a docstring");
}

Corpus load_arg(const std::string& arg, const CorpusFlags& f) {
    const auto c = parse_corpus_arg(arg);
    Corpus corpus = load_jsonl(c.path, c.language, parse_split(f.split), LoadOptions{f.lenient});
    return f.bimodal ? bimodal_only(corpus) : corpus;
}

// Several --corpus flags for one language are concatenated.
std::map<std::string, Corpus> load_args(const std::vector<std::string>& args, const CorpusFlags& f) {
    std::map<std::string, std::vector<Corpus>> parts;
    for (const auto& a : args) {
        Corpus c = load_arg(a, f);
        parts[c.language].push_back(std::move(c));
    }
    std::map<std::string, Corpus> out;
    for (auto& [lang, ps] : parts) {
        Corpus c = ps.size() == 1 ? std::move(ps.front()) : combine(ps);
        c.language = lang;
        out.emplace(lang, std::move(c));
    }
    return out;
}


std::vector<double> read_numbers(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<double> xs;
    std::string word;
    while (in >> word) {
        try {
            std::size_t used = 0;
            xs.push_back(std::stod(word, &used));
            if (used != word.size()) throw std::invalid_argument(word);
        } catch (const std::exception&) {
            throw InputError(fmt::format("{}: '{}' is not a number", path.string(), word));
        }
    }
    return xs;
}

std::vector<EvalPair> read_eval_pairs(const std::string& hyp, const std::string& ref, const std::string& pairs) {
    if (!pairs.empty()) return read_pairs_jsonl(pairs);
    if (hyp.empty() || ref.empty()) throw InputError("give --hyp and --ref, or --pairs");
    return read_aligned_pairs(hyp, ref);
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_st("plsel");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"plsel: pick source languages for fine-tuning a low-resource language"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->capture_default_str()
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->each([](const std::string& v) { spdlog::set_level(spdlog::level::from_str(v)); });

    int exit_code = kExitOk;

    // ingest
    std::vector<std::string> ingest_corpora;
    std::string ingest_out;
    CorpusFlags ingest_flags;
    auto* ingest = app.add_subcommand("ingest", "load JSONL corpora, validate, write normalized JSONL");
    ingest->add_option("--corpus", ingest_corpora, "LANG=PATH (repeatable)")->required();
    ingest->add_option("-o,--out", ingest_out, "output JSONL (.gz compresses); stdout if omitted");
    add_corpus_flags(ingest, ingest_flags);
    ingest->callback([&] {
        auto loaded = load_args(ingest_corpora, ingest_flags);
        std::vector<Corpus> all;
        for (auto& [lang, c] : loaded) all.push_back(std::move(c));
        const Corpus merged = all.size() == 1 ? all.front() : combine(all);
        if (ingest_out.empty() || ingest_out == "-") write_jsonl(merged, std::cout);
        else write_jsonl(merged, fs::path(ingest_out));
        spdlog::info("wrote {} documents", merged.size());
    });

    // stats
    std::vector<std::string> stats_corpora;
    CorpusFlags stats_flags;
    auto* stats_cmd = app.add_subcommand("stats", "per-language record counts and token lengths");
    stats_cmd->add_option("--corpus", stats_corpora, "LANG=PATH (repeatable)")->required();
    add_corpus_flags(stats_cmd, stats_flags);
    stats_cmd->callback([&] {
        auto loaded = load_args(stats_corpora, stats_flags);
        ordered_json j = ordered_json::object();
        for (const auto& [lang, c] : loaded) j[lang] = ordered_json(to_json(stats(c)));
        std::cout << j.dump(2) << '\n';
    });

    // train-embed
    std::vector<std::string> train_corpora;
    CorpusFlags train_flags;
    EmbedConfig train_config;
    std::uint64_t train_seed = 1;
    std::string train_out, train_text;
    auto* train_cmd = app.add_subcommand("train-embed", "train n-gram sentence embeddings");
    train_cmd->add_option("--corpus", train_corpora, "LANG=PATH (repeatable)")->required();
    train_cmd->add_option("-o,--out", train_out, "model file")->required();
    train_cmd->add_option("--export-text", train_text, "also write vectors as text");
    train_cmd->add_option("--dim", train_config.dim)->capture_default_str();
    train_cmd->add_option("--epochs", train_config.epochs)->capture_default_str();
    train_cmd->add_option("--negatives", train_config.negatives)->capture_default_str();
    train_cmd->add_option("--lr", train_config.learning_rate)->capture_default_str();
    train_cmd->add_option("--min-count", train_config.min_count)->capture_default_str();
    train_cmd->add_option("--threads", train_config.threads, "1 is deterministic")->capture_default_str();
    train_cmd->add_flag("--with-docstrings", train_config.include_docstrings, "also train on docstrings");
    train_cmd->add_option("--seed", train_seed)->capture_default_str();
    add_corpus_flags(train_cmd, train_flags);
    train_cmd->callback([&] {
        auto loaded = load_args(train_corpora, train_flags);
        std::vector<Corpus> all;
        for (auto& [lang, c] : loaded) all.push_back(std::move(c));
        const EmbeddingModel model = train(combine(all), train_config, train_seed);
        model.save(fs::path(train_out));
        if (!train_text.empty()) {
            std::ofstream out(train_text);
            if (!out) throw InputError("cannot write " + train_text);
            model.export_text(out);
        }
        spdlog::info("vocabulary {} rows ({} unigrams), dim {}", model.vocab_size(), model.unigram_count(),
                     model.dim());
    });

    // semsim
    std::string semsim_model, semsim_target;
    std::vector<std::string> semsim_candidates;
    CorpusFlags semsim_flags;
    auto* semsim = app.add_subcommand("semsim", "mean pairwise cosine of each candidate to the target");
    semsim->add_option("--model", semsim_model, "trained embedding model")->required();
    semsim->add_option("--target", semsim_target, "LANG=PATH")->required();
    semsim->add_option("--candidate", semsim_candidates, "LANG=PATH (repeatable)")->required();
    add_corpus_flags(semsim, semsim_flags);
    semsim->callback([&] {
        const EmbeddingModel model = EmbeddingModel::load(fs::path(semsim_model));
        const Corpus target = load_arg(semsim_target, semsim_flags);
        const CorpusCentroid tc = corpus_centroid(model, target);
        std::map<std::string, double> raw;
        ordered_json docs = ordered_json::object();
        for (const auto& [lang, c] : load_args(semsim_candidates, semsim_flags)) {
            const CorpusCentroid cc = corpus_centroid(model, c);
            raw[lang] = semantic_similarity(cc, tc);
            docs[lang] = {{"embeddable", cc.embeddable}, {"unembeddable", cc.unembeddable}};
        }
        const auto scores = normalize_scores(raw);
        ordered_json j;
        j["target"] = target.language;
        j["raw"] = scores.raw;
        j["normalized"] = scores.normalized;
        j["documents"] = docs;
        std::cout << j.dump(2) << '\n';
    });

    // textsim
    std::string textsim_target, textsim_export;
    std::vector<std::string> textsim_candidates;
    CloneParams textsim_params;
    std::uint64_t textsim_cap = 0;
    CorpusFlags textsim_flags;
    auto* textsim = app.add_subcommand("textsim", "count maximal cross-corpus clones of each candidate with the target");
    textsim->add_option("--target", textsim_target, "LANG=PATH")->required();
    textsim->add_option("--candidate", textsim_candidates, "LANG=PATH (repeatable)")->required();
    textsim->add_option("--min-tokens", textsim_params.min_tokens, "shortest clone counted")->capture_default_str();
    auto* cap_opt = textsim->add_option("--cap", textsim_cap, "stop counting at this many pairs");
    textsim->add_option("--export-clones", textsim_export, "directory for <lang>.clones.jsonl");
    add_corpus_flags(textsim, textsim_flags);
    textsim->callback([&] {
        if (cap_opt->count() > 0) textsim_params.cap = textsim_cap;
        if (textsim_params.min_tokens < 1) throw InputError("--min-tokens must be >= 1");
        const Corpus target = load_arg(textsim_target, textsim_flags);
        if (!textsim_export.empty()) fs::create_directories(textsim_export);
        std::map<std::string, std::uint64_t> counts;
        ordered_json truncated = ordered_json::object();
        for (const auto& [lang, c] : load_args(textsim_candidates, textsim_flags)) {
            if (!textsim_export.empty()) {
                const CloneSet set = detect_cross_clones(c, target, textsim_params);
                const fs::path path = fs::path(textsim_export) / (lang + ".clones.jsonl");
                std::ofstream out(path);
                if (!out) throw InputError("cannot write " + path.string());
                write_clones_jsonl(set, out);
                counts[lang] = set.pairs.size();
                truncated[lang] = set.truncated;
            } else {
                const CloneCount n = textual_similarity(c, target, textsim_params);
                counts[lang] = n.count;
                truncated[lang] = n.truncated;
            }
        }
        ordered_json j;
        j["target"] = target.language;
        j["min_tokens"] = textsim_params.min_tokens;
        j["raw"] = counts;
        j["truncated"] = truncated;
        try {
            j["normalized"] = normalize_clone_counts(counts);
        } catch (const DomainError& e) {
            spdlog::warn("{}", e.what());
            j["normalized"] = nullptr;
        }
        std::cout << j.dump(2) << '\n';
    });

    // eval-bleu / eval-meteor
    std::string hyp_path, ref_path, pairs_path;
    int bleu_n = 4;
    auto* eval_bleu = app.add_subcommand("eval-bleu", "smoothed sentence BLEU averaged over the test set");
    eval_bleu->add_option("--hyp", hyp_path, "one hypothesis per line");
    eval_bleu->add_option("--ref", ref_path, "one reference per line");
    eval_bleu->add_option("--pairs", pairs_path, "JSONL with hypothesis/reference fields");
    eval_bleu->add_option("--max-n", bleu_n)->capture_default_str()->check(CLI::Range(1, 4));
    eval_bleu->callback([&] {
        const auto pairs = read_eval_pairs(hyp_path, ref_path, pairs_path);
        std::cout << fmt::format("{:.4f}\n", bleu(pairs, bleu_n));
    });

    bool no_stem = false, keep_case = false;
    std::string synonyms_path;
    MeteorConfig meteor_config;
    auto* eval_meteor = app.add_subcommand("eval-meteor", "METEOR with exact, stem and synonym matching");
    eval_meteor->add_option("--hyp", hyp_path, "one hypothesis per line");
    eval_meteor->add_option("--ref", ref_path, "one reference per line");
    eval_meteor->add_option("--pairs", pairs_path, "JSONL with hypothesis/reference fields");
    eval_meteor->add_flag("--no-stem", no_stem, "disable the stem stage");
    eval_meteor->add_flag("--keep-case", keep_case, "compare tokens case-sensitively");
    eval_meteor->add_option("--synonyms", synonyms_path, "tab-separated synonym pairs");
    eval_meteor->add_option("--alpha", meteor_config.alpha)->capture_default_str();
    eval_meteor->add_option("--beta", meteor_config.beta)->capture_default_str();
    eval_meteor->add_option("--gamma", meteor_config.gamma)->capture_default_str();
    eval_meteor->callback([&] {
        const auto pairs = read_eval_pairs(hyp_path, ref_path, pairs_path);
        meteor_config.stem = !no_stem;
        meteor_config.lowercase = !keep_case;
        SynonymMap synonyms;
        if (!synonyms_path.empty()) {
            synonyms = SynonymMap::load(synonyms_path);
            meteor_config.synonyms = &synonyms;
        }
        std::cout << fmt::format("{:.6f}\n", meteor(pairs, meteor_config));
    });

    // eval-mrr
    std::string rankings_path;
    auto* eval_mrr = app.add_subcommand("eval-mrr", "mean reciprocal rank over ranked queries");
    eval_mrr->add_option("--rankings", rankings_path, "JSONL of {qid, rank} or {qid, scores}")->required();
    eval_mrr->callback([&] {
        const auto queries = read_rankings_jsonl(rankings_path);
        std::cout << fmt::format("{:.6f}\n", mrr(queries));
    });

    // utest
    std::string utest_a, utest_b;
    auto* utest = app.add_subcommand("utest", "two-sided Mann-Whitney U test");
    utest->add_option("--a", utest_a, "whitespace-separated sample")->required();
    utest->add_option("--b", utest_b, "whitespace-separated sample")->required();
    utest->callback([&] {
        const auto a = read_numbers(utest_a);
        const auto b = read_numbers(utest_b);
        const auto r = mann_whitney_u(a, b);
        ordered_json j;
        j["n_a"] = a.size();
        j["n_b"] = b.size();
        j["u_a"] = r.u_a;
        j["u_b"] = r.u_b;
        j["z"] = r.z;
        j["p"] = r.p;
        j["p_exact"] = r.p_exact ? ordered_json(*r.p_exact) : ordered_json(nullptr);
        std::cout << j.dump(2) << '\n';
    });

    // ptr
    std::string ptr_path, ptr_format = "text";
    auto* ptr_cmd = app.add_subcommand("ptr", "performance-to-time ratio per model");
    ptr_cmd->add_option("--records", ptr_path, "JSONL of {model, performance, seconds}")->required();
    ptr_cmd->add_option("--format", ptr_format, "json|csv|text")->capture_default_str();
    ptr_cmd->callback([&] {
        std::ifstream in(ptr_path);
        if (!in) throw InputError("cannot open " + ptr_path);
        std::vector<PerfTimeRecord> records;
        std::string line;
        for (std::size_t n = 1; std::getline(in, line); ++n) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                records.push_back({j.at("model").get<std::string>(), j.at("performance").get<double>(),
                                   j.at("seconds").get<double>()});
            } catch (const nlohmann::json::exception& e) {
                throw InputError(fmt::format("{}:{}: {}", ptr_path, n, e.what()));
            }
        }
        std::cout << emit_report(ptr_table(ptr(records)), parse_report_format(ptr_format));
    });

    // bins
    std::string bins_test, bins_reference;
    CorpusFlags bins_flags;
    bins_flags.split = "test";
    auto* bins = app.add_subcommand("bins", "split a test set into four token-length quartile bins");
    bins->add_option("--corpus", bins_test, "LANG=PATH of the test set")->required();
    bins->add_option("--boundaries-from", bins_reference, "LANG=PATH whose quartiles define the bins");
    add_corpus_flags(bins, bins_flags);
    bins->callback([&] {
        const Corpus test = load_arg(bins_test, bins_flags);
        const LengthBins b =
            bins_reference.empty() ? quartile_bins(test) : quartile_bins(test, load_arg(bins_reference, bins_flags));
        std::cout << to_json(b).dump(2) << '\n';
    });

    // report
    std::string report_in, report_format = "text", report_baseline;
    auto* report = app.add_subcommand("report", "render a result table, optionally with gains over a baseline");
    report->add_option("--input", report_in, "table JSON {columns, rows}")->required();
    report->add_option("--format", report_format, "json|csv|text")->capture_default_str();
    report->add_option("--baseline", report_baseline, "column to compute percentage gains against");
    report->callback([&] {
        std::ifstream in(report_in);
        if (!in) throw InputError("cannot open " + report_in);
        ordered_json j;
        try {
            j = ordered_json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(report_in + ": " + e.what());
        }
        const auto base = report_baseline.empty() ? std::nullopt : std::optional<std::string>(report_baseline);
        std::cout << emit_report(table_from_json(j), parse_report_format(report_format), base);
    });

    // suitability
    std::string suit_config;
    std::vector<std::string> suit_corpora;
    std::string suit_target, suit_out, suit_split;
    double suit_theta = 0;
    std::uint64_t suit_seed = 0;
    std::uint32_t suit_jobs = 1, suit_dim = 0, suit_epochs = 0;
    std::size_t suit_min_tokens = 0;
    std::uint64_t suit_min_count = 0;
    bool suit_bimodal = false, suit_lenient = false;
    auto* suit = app.add_subcommand("suitability", "score candidate languages and pick those above theta");
    suit->add_option("-c,--config", suit_config, "run config JSON");
    auto* o_corpus = suit->add_option("--corpus", suit_corpora, "LANG=PATH (repeatable; replaces config corpora)");
    auto* o_target = suit->add_option("--target", suit_target, "target language tag");
    auto* o_theta = suit->add_option("--theta", suit_theta, "selection threshold in [0, 1]");
    auto* o_seed = suit->add_option("--seed", suit_seed);
    auto* o_jobs = suit->add_option("-j,--jobs", suit_jobs, "parallel workers; 1 is deterministic");
    auto* o_out = suit->add_option("-o,--output-dir", suit_out, "reports and cache go here");
    auto* o_split = suit->add_option("--split", suit_split, "split tag for records without one");
    auto* o_min_tokens = suit->add_option("--min-tokens", suit_min_tokens, "shortest clone counted");
    auto* o_dim = suit->add_option("--dim", suit_dim, "embedding dimension");
    auto* o_epochs = suit->add_option("--epochs", suit_epochs);
    auto* o_min_count = suit->add_option("--min-count", suit_min_count);
    auto* o_bimodal = suit->add_flag("--bimodal-only", suit_bimodal);
    auto* o_lenient = suit->add_flag("--lenient", suit_lenient);
    suit->callback([&] {
        RunConfig rc = suit_config.empty() ? RunConfig{} : load_run_config(suit_config);
        if (o_corpus->count() > 0) {
            rc.corpora.clear();
            for (const auto& a : suit_corpora) {
                const auto c = parse_corpus_arg(a);
                rc.corpora[c.language].push_back(c.path);
            }
        }
        if (o_target->count()) rc.target = suit_target;
        if (o_theta->count()) rc.theta = suit_theta;
        if (o_seed->count()) rc.seed = suit_seed;
        if (o_jobs->count()) rc.jobs = suit_jobs;
        if (o_out->count()) rc.output_dir = suit_out;
        if (o_split->count()) rc.split = parse_split(suit_split);
        if (o_min_tokens->count()) rc.clone.min_tokens = suit_min_tokens;
        if (o_dim->count()) rc.embedding.dim = suit_dim;
        if (o_epochs->count()) rc.embedding.epochs = suit_epochs;
        if (o_min_count->count()) rc.embedding.min_count = suit_min_count;
        if (o_bimodal->count()) rc.bimodal_only = suit_bimodal;
        if (o_lenient->count()) rc.lenient = suit_lenient;
        const SuitabilityRun run = cmd_suitability(rc);
        std::cout << format_text_table(run.report);
        spdlog::info("wrote {} and {}", run.json_path.string(), run.text_path.string());
        if (run.exit_code == kExitNoSelection) spdlog::warn("no language reached theta {}", rc.theta);
        exit_code = run.exit_code;
    });

    // recommend
    std::string task_name;
    auto* recommend = app.add_subcommand("recommend", "fine-tuning data strategy for a downstream task");
    recommend->add_option("--task", task_name, "summarization|search")->required();
    recommend->callback([&] {
        const auto d = recommend_for_task(task_name);
        ordered_json j;
        j["task"] = std::string(to_string(d.task));
        j["strategy"] = std::string(to_string(d.strategy));
        j["computes_similarity"] = d.computes_similarity;
        j["description"] = d.description;
        std::cout << j.dump(2) << '\n';
    });

    // finetune-set
    std::string ft_target, ft_out;
    std::vector<std::string> ft_selected;
    CorpusFlags ft_flags;
    auto* ft = app.add_subcommand("finetune-set", "concatenate the target with the selected languages");
    ft->add_option("--target", ft_target, "LANG=PATH")->required();
    ft->add_option("--selected", ft_selected, "LANG=PATH (repeatable)");
    ft->add_option("-o,--out", ft_out, "output JSONL; stdout if omitted");
    add_corpus_flags(ft, ft_flags);
    ft->callback([&] {
        const Corpus target = load_arg(ft_target, ft_flags);
        std::vector<Corpus> selected;
        for (const auto& a : ft_selected) selected.push_back(load_arg(a, ft_flags));
        const Corpus out = build_finetune_set(target, selected);
        if (ft_out.empty() || ft_out == "-") write_jsonl(out, std::cout);
        else write_jsonl(out, fs::path(ft_out));
        spdlog::info("fine-tuning set: {} documents", out.size());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        // CLI11 reports through its own channel; usage errors are input errors.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInputError;
    } catch (const StageError& e) {
        spdlog::error("{}", e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitInputError;
    }
    return exit_code;
}
