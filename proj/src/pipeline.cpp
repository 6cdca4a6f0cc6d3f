#include "plsel/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <mutex>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "plsel/error.hpp"
#include "plsel/fingerprint.hpp"
#include "plsel/normalize.hpp"
#include "plsel/token.hpp"

namespace plsel {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    RunConfig c;
    try {
        if (!j.is_object()) throw InputError("run config must be a JSON object");
        if (auto it = j.find("corpora"); it != j.end()) {
            for (const auto& [lang, spec] : it->items()) {
                auto& files = c.corpora[lang];
                auto add = [&](const std::string& p) {
                    fs::path path(p);
                    files.push_back(path.is_absolute() ? path : base_dir / path);
                };
                if (spec.is_string()) add(spec.get<std::string>());
                else
                    for (const auto& p : spec) add(p.get<std::string>());
            }
        }
        c.target = j.value("target", c.target);
        c.theta = j.value("theta", c.theta);
        c.clone.min_tokens = j.value("min_tokens", c.clone.min_tokens);
        if (auto it = j.find("clone_cap"); it != j.end() && !it->is_null()) c.clone.cap = it->get<std::uint64_t>();
        c.clone.pair_budget = j.value("pair_budget", c.clone.pair_budget);
        if (auto it = j.find("embedding"); it != j.end()) c.embedding = embed_config_from_json(*it, c.embedding);
        c.seed = j.value("seed", c.seed);
        if (auto it = j.find("output_dir"); it != j.end()) {
            fs::path out(it->get<std::string>());
            c.output_dir = out.is_absolute() ? out : base_dir / out;
        }
        if (auto it = j.find("split"); it != j.end()) c.split = parse_split(it->get<std::string>());
        c.bimodal_only = j.value("bimodal_only", c.bimodal_only);
        c.lenient = j.value("lenient", c.lenient);
        c.jobs = j.value("jobs", c.jobs);
    } catch (const json::exception& e) {
        throw InputError(std::string("run config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

void validate(const RunConfig& config) {
    if (config.target.empty()) throw InputError("no target language given");
    if (!config.corpora.contains(config.target))
        throw InputError("target language '" + config.target + "' has no corpus");
    if (config.corpora.size() < 2) throw InputError("need at least one candidate language besides the target");
    for (const auto& [lang, files] : config.corpora) {
        if (lang == kCombinedTag) throw InputError("'combined' is reserved and cannot be a language tag");
        if (files.empty()) throw InputError("language '" + lang + "' lists no files");
    }
    if (!(config.theta >= 0.0 && config.theta <= 1.0)) throw InputError("theta must lie in [0, 1]");
    if (config.clone.min_tokens < 1) throw InputError("min_tokens must be >= 1");
    if (config.embedding.dim < 2) throw InputError("embedding dim must be >= 2");
    if (config.jobs < 1) throw InputError("jobs must be >= 1");
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::optional<ordered_json> read_cache(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        return ordered_json::parse(in);
    } catch (const json::exception&) {
        spdlog::warn("ignoring unreadable cache entry {}", path.string());
        return std::nullopt;
    }
}

// Write-then-rename so an interrupted run never leaves a partial entry.
void write_atomically(const fs::path& path, const std::string& bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << bytes;
        if (!out) throw InputError("write error in " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Runs fn(i) for i in [0, n) on at most `jobs` threads; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, std::uint32_t jobs, Fn&& fn) {
    std::vector<T> out(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    for (std::uint32_t w = 0; w < std::min<std::size_t>(jobs, n); ++w) {
        workers.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
        }));
    }
    for (auto& w : workers) w.get();
    return out;
}

struct LoadedCorpus {
    Corpus corpus;
    std::string fingerprint;
};

}  // namespace

SuitabilityRun cmd_suitability(const RunConfig& config) {
    stage("config", [&] {
        validate(config);
        return 0;
    });

    const fs::path cache_dir = config.output_dir / "cache";
    stage("config", [&] {
        fs::create_directories(cache_dir);
        return 0;
    });

    std::vector<std::string> languages;
    for (const auto& [lang, files] : config.corpora) languages.push_back(lang);

    // load
    auto loaded = stage("load", [&] {
        return parallel_map<LoadedCorpus>(languages.size(), config.jobs, [&](std::size_t i) {
            const auto& lang = languages[i];
            std::vector<Corpus> parts;
            for (const auto& file : config.corpora.at(lang))
                parts.push_back(load_jsonl(file, lang, config.split, LoadOptions{config.lenient}));
            Corpus c = parts.size() == 1 ? std::move(parts.front()) : combine(parts);
            c.language = lang;
            if (config.bimodal_only) c = bimodal_only(c);
            if (c.empty()) throw DomainError("corpus for '" + lang + "' is empty");
            spdlog::info("loaded {}: {} documents", lang, c.size());
            std::string fp = fingerprint(c);
            return LoadedCorpus{std::move(c), std::move(fp)};
        });
    });
    std::map<std::string, const LoadedCorpus*> by_lang;
    for (std::size_t i = 0; i < languages.size(); ++i) by_lang[languages[i]] = &loaded[i];
    const LoadedCorpus& target = *by_lang.at(config.target);
    std::vector<std::string> candidates;
    for (const auto& lang : languages)
        if (lang != config.target) candidates.push_back(lang);

    EmbedConfig embed_config = config.embedding;
    embed_config.threads = config.jobs;

    // train
    Fingerprinter model_fp;
    model_fp.add(std::string_view("embedding-model")).add(to_json(embed_config).dump()).add(config.seed);
    model_fp.add(std::string(kTokenizerVersion));
    for (const auto& lang : languages) model_fp.add(lang).add(by_lang.at(lang)->fingerprint);
    const std::string model_key = model_fp.hex();
    const fs::path model_path = cache_dir / ("embed-" + model_key + ".bin");

    const EmbeddingModel model = stage("train", [&] {
        if (fs::exists(model_path)) {
            spdlog::info("embedding model cache hit: {}", model_path.string());
            return EmbeddingModel::load(model_path);
        }
        std::vector<Corpus> all;
        for (const auto& lc : loaded) all.push_back(lc.corpus);
        const Corpus combined = combine(all);
        spdlog::info("training embeddings on {} documents (dim={}, epochs={}, threads={})", combined.size(),
                     embed_config.dim, embed_config.epochs, embed_config.threads);
        EmbeddingModel m = train(combined, embed_config, config.seed);
        std::ostringstream bytes;
        m.save(bytes);
        write_atomically(model_path, bytes.str());
        return m;
    });

    // semsim
    const auto sem_raw = stage("semsim", [&] {
        std::optional<CorpusCentroid> target_centroid;
        std::mutex centroid_mutex;
        auto target_c = [&]() -> const CorpusCentroid& {
            std::lock_guard lock(centroid_mutex);
            if (!target_centroid) target_centroid = corpus_centroid(model, target.corpus);
            return *target_centroid;
        };
        auto values = parallel_map<double>(candidates.size(), config.jobs, [&](std::size_t i) {
            const auto& lang = candidates[i];
            Fingerprinter fp;
            fp.add(std::string_view("semsim")).add(model_key).add(by_lang.at(lang)->fingerprint).add(target.fingerprint);
            const fs::path path = cache_dir / ("semsim-" + fp.hex() + ".json");
            if (auto cached = read_cache(path)) return cached->at("mean_cosine").get<double>();
            const double value = semantic_similarity(corpus_centroid(model, by_lang.at(lang)->corpus), target_c());
            ordered_json j;
            j["candidate"] = lang;
            j["target"] = config.target;
            j["mean_cosine"] = value;
            write_atomically(path, j.dump(2) + "\n");
            return value;
        });
        std::map<std::string, double> out;
        for (std::size_t i = 0; i < candidates.size(); ++i) out[candidates[i]] = values[i];
        return out;
    });

    // textsim
    const auto text_raw = stage("textsim", [&] {
        auto counts = parallel_map<CloneCount>(candidates.size(), config.jobs, [&](std::size_t i) {
            const auto& lang = candidates[i];
            Fingerprinter fp;
            fp.add(std::string_view("textsim")).add(std::string(kTokenizerVersion));
            fp.add(static_cast<std::uint64_t>(config.clone.min_tokens));
            fp.add(config.clone.cap ? *config.clone.cap : ~std::uint64_t{0});
            fp.add(by_lang.at(lang)->fingerprint).add(target.fingerprint);
            const fs::path path = cache_dir / ("textsim-" + fp.hex() + ".json");
            if (auto cached = read_cache(path))
                return CloneCount{cached->at("clone_pairs").get<std::uint64_t>(), cached->at("truncated").get<bool>()};
            const CloneCount count = textual_similarity(by_lang.at(lang)->corpus, target.corpus, config.clone);
            ordered_json j;
            j["candidate"] = lang;
            j["target"] = config.target;
            j["clone_pairs"] = count.count;
            j["truncated"] = count.truncated;
            write_atomically(path, j.dump(2) + "\n");
            return count;
        });
        std::map<std::string, CloneCount> out;
        for (std::size_t i = 0; i < candidates.size(); ++i) out[candidates[i]] = counts[i];
        return out;
    });

    // select
    SuitabilityReport report = stage("select", [&] {
        const auto sem = normalize_scores(sem_raw);
        std::map<std::string, std::uint64_t> counts;
        for (const auto& [lang, c] : text_raw) counts[lang] = c.count;
        const auto text_norm = normalize_clone_counts(counts);
        SuitabilityReport r = suitability(sem.normalized, text_norm, config.theta);
        r.target = config.target;
        for (auto& row : r.rows) {
            row.sim_sem_raw = sem_raw.at(row.language);
            row.sim_text_raw = static_cast<double>(text_raw.at(row.language).count);
        }
        return r;
    });

    ordered_json prov;
    prov["tokenizer_version"] = std::string(kTokenizerVersion);
    prov["code_length_unit"] = std::string(kCodeLengthUnit);
    prov["split"] = std::string(to_string(config.split));
    prov["bimodal_only"] = config.bimodal_only;
    ordered_json corpora = ordered_json::object();
    for (const auto& lang : languages) {
        const auto& lc = *by_lang.at(lang);
        corpora[lang] = {{"documents", lc.corpus.size()}, {"fingerprint", lc.fingerprint}};
    }
    prov["corpora"] = corpora;
    prov["embedding"] = ordered_json(to_json(embed_config));
    prov["embedding_model"] = model_key;
    prov["seed"] = config.seed;
    prov["semantic_similarity"] = "exact mean cosine over all cross pairs of embeddable documents";
    prov["clone"] = {{"min_tokens", config.clone.min_tokens},
                     {"cap", config.clone.cap ? ordered_json(*config.clone.cap) : ordered_json(nullptr)},
                     {"unit", "maximal cross-corpus clone pairs"}};
    ordered_json truncated = ordered_json::array();
    for (const auto& [lang, c] : text_raw)
        if (c.truncated) truncated.push_back(lang);
    prov["clone_counts_truncated"] = truncated;
    report.provenance = std::move(prov);
    report.config_fingerprint = sha256_hex(report.provenance.dump());

    SuitabilityRun run;
    run.json_path = config.output_dir / "report.json";
    run.text_path = config.output_dir / "report.txt";
    stage("report", [&] {
        write_atomically(run.json_path, to_json(report).dump(2) + "\n");
        write_atomically(run.text_path, format_text_table(report));
        return 0;
    });
    run.exit_code = report.selected().empty() ? kExitNoSelection : kExitOk;
    run.report = std::move(report);
    return run;
}

}  // namespace plsel
