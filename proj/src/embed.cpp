#include "plsel/embed.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "plsel/error.hpp"
#include "plsel/normalize.hpp"

namespace plsel {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'L', 'S', 'E', 'L', 'E', 'M', 'B'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::string_view kBucketPrefix = "<ngram:";
constexpr std::size_t kNegativeTableSize = 1u << 22;

std::uint64_t fnv1a(std::span<const std::string> ngram) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < ngram.size(); ++i) {
        if (i > 0) {
            h ^= 0x1f;
            h *= 1099511628211ull;
        }
        for (unsigned char c : ngram[i]) {
            h ^= c;
            h *= 1099511628211ull;
        }
    }
    return h;
}

std::optional<std::uint32_t> parse_bucket_key(std::string_view key) {
    if (!key.starts_with(kBucketPrefix) || !key.ends_with('>')) return std::nullopt;
    key.remove_prefix(kBucketPrefix.size());
    key.remove_suffix(1);
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), value);
    if (ec != std::errc() || ptr != key.data() + key.size()) return std::nullopt;
    return value;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct PlainAccess {
    static float load(const float& x) { return x; }
    static void add(float& x, float v) { x += v; }
};

// Lock-free shared updates for multi-threaded training: racing writers may
// lose increments, which the objective tolerates.
struct SharedAccess {
    static float load(const float& x) {
        return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
    }
    static void add(float& x, float v) {
        std::atomic_ref<float> ref(x);
        ref.store(ref.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
    }
};

// Per-position view of a sentence: unigram row (or -1) and the rows of the
// bigram/trigram starting there (or -1).
struct Encoded {
    std::vector<std::int32_t> uni;
    std::vector<std::int32_t> bi;
    std::vector<std::int32_t> tri;
};

std::vector<std::string> truncate_tokens(std::vector<std::string> tokens, std::uint64_t max_tokens,
                                         std::string_view doc_id) {
    if (tokens.size() > max_tokens) {
        spdlog::debug("document {} truncated from {} to {} tokens for embedding", doc_id,
                      tokens.size(), max_tokens);
        tokens.resize(max_tokens);
    }
    return tokens;
}

std::vector<std::vector<std::string>> training_sentences(const Corpus& corpus, const EmbedConfig& config) {
    std::vector<std::vector<std::string>> out;
    out.reserve(corpus.size());
    for (const auto& doc : corpus.documents) {
        out.push_back(truncate_tokens(normalize_plaintext(doc.code), config.max_doc_tokens, doc.id));
        if (config.include_docstrings && doc.is_bimodal()) {
            auto toks = doc.docstring_tokens ? *doc.docstring_tokens : normalize_plaintext(*doc.docstring);
            if (!toks.empty()) out.push_back(truncate_tokens(std::move(toks), config.max_doc_tokens, doc.id));
        }
    }
    return out;
}

template <class T>
void write_le(std::ostream& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    const auto bits = std::bit_cast<U>(value);
    char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(buf, sizeof buf);
}

template <class T>
T read_le(std::istream& in) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) throw InputError("embedding model: truncated file");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

}  // namespace

json to_json(const EmbedConfig& c) {
    return json{{"dim", c.dim},
                {"epochs", c.epochs},
                {"negatives", c.negatives},
                {"learning_rate", c.learning_rate},
                {"min_count", c.min_count},
                {"buckets", c.buckets},
                {"max_doc_tokens", c.max_doc_tokens},
                {"include_docstrings", c.include_docstrings},
                {"threads", c.threads}};
}

EmbedConfig embed_config_from_json(const json& j, EmbedConfig c) {
    if (!j.is_object()) throw InputError("embedding config must be a JSON object");
    c.dim = j.value("dim", c.dim);
    c.epochs = j.value("epochs", c.epochs);
    c.negatives = j.value("negatives", c.negatives);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.min_count = j.value("min_count", c.min_count);
    c.buckets = j.value("buckets", c.buckets);
    c.max_doc_tokens = j.value("max_doc_tokens", c.max_doc_tokens);
    c.include_docstrings = j.value("include_docstrings", c.include_docstrings);
    c.threads = j.value("threads", c.threads);
    return c;
}

// ---------------------------------------------------------------------------
// EmbeddingModel

std::string EmbeddingModel::bucket_key(std::uint32_t bucket) {
    return fmt::format("{}{}>", kBucketPrefix, bucket);
}

void EmbeddingModel::rebuild_index() {
    index_.clear();
    index_.reserve(keys_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i)
        if (!index_.emplace(keys_[i], static_cast<std::uint32_t>(i)).second)
            throw DomainError("embedding model: duplicate vocabulary key '" + keys_[i] + "'");
}

EmbeddingModel EmbeddingModel::from_table(std::vector<std::string> keys, std::vector<float> vectors,
                                          std::uint32_t dim, EmbedConfig config) {
    if (dim == 0) throw DomainError("embedding model: dim must be positive");
    if (vectors.size() != keys.size() * dim)
        throw DomainError("embedding model: vector table size does not match vocab x dim");
    // Unigram rows first, bucket rows after.
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t i) { return !parse_bucket_key(keys[i]).has_value(); });

    EmbeddingModel m;
    m.dim_ = dim;
    config.dim = dim;
    m.config_ = config;
    m.keys_.reserve(keys.size());
    m.vectors_.reserve(vectors.size());
    for (std::size_t i : order) {
        if (!parse_bucket_key(keys[i])) ++m.unigrams_;
        m.keys_.push_back(std::move(keys[i]));
        m.vectors_.insert(m.vectors_.end(), vectors.begin() + static_cast<std::ptrdiff_t>(i * dim),
                          vectors.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    }
    m.rebuild_index();
    return m;
}

std::optional<std::size_t> EmbeddingModel::find(std::string_view key) const {
    auto it = index_.find(std::string(key));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> EmbeddingModel::vector(std::size_t row) const {
    return std::span<const float>(vectors_).subspan(row * dim_, dim_);
}

std::uint32_t EmbeddingModel::bucket_of(std::span<const std::string> ngram) const {
    const std::uint32_t buckets = config_.buckets == 0 ? 1 : config_.buckets;
    return static_cast<std::uint32_t>(fnv1a(ngram) % buckets);
}

namespace {

Encoded encode(const EmbeddingModel& model, std::span<const std::string> tokens) {
    const std::size_t n = tokens.size();
    Encoded e;
    e.uni.assign(n, -1);
    e.bi.assign(n, -1);
    e.tri.assign(n, -1);
    for (std::size_t t = 0; t < n; ++t) {
        if (auto row = model.find(tokens[t]); row && *row < model.unigram_count())
            e.uni[t] = static_cast<std::int32_t>(*row);
    }
    auto bucket_row = [&](std::size_t start, std::size_t order) -> std::int32_t {
        for (std::size_t k = start; k < start + order; ++k)
            if (e.uni[k] < 0) return -1;
        const auto key = EmbeddingModel::bucket_key(model.bucket_of(tokens.subspan(start, order)));
        auto row = model.find(key);
        return row ? static_cast<std::int32_t>(*row) : -1;
    };
    for (std::size_t t = 0; t + 1 < n; ++t) e.bi[t] = bucket_row(t, 2);
    for (std::size_t t = 0; t + 2 < n; ++t) e.tri[t] = bucket_row(t, 3);
    return e;
}

}  // namespace

std::vector<std::uint32_t> EmbeddingModel::feature_rows(std::span<const std::string> tokens) const {
    const Encoded e = encode(*this, tokens);
    std::vector<std::uint32_t> rows;
    for (std::size_t t = 0; t < tokens.size(); ++t)
        for (std::int32_t r : {e.uni[t], e.bi[t], e.tri[t]})
            if (r >= 0) rows.push_back(static_cast<std::uint32_t>(r));
    return rows;
}

void EmbeddingModel::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    write_le<std::uint32_t>(out, kFormatVersion);
    write_le<std::uint32_t>(out, dim_);
    write_le<std::uint64_t>(out, keys_.size());
    write_le<std::uint64_t>(out, unigrams_);
    write_le<std::uint32_t>(out, config_.epochs);
    write_le<std::uint32_t>(out, config_.negatives);
    write_le<double>(out, config_.learning_rate);
    write_le<std::uint64_t>(out, config_.min_count);
    write_le<std::uint32_t>(out, config_.buckets);
    write_le<std::uint64_t>(out, config_.max_doc_tokens);
    write_le<std::uint8_t>(out, config_.include_docstrings ? 1 : 0);
    write_le<std::uint32_t>(out, config_.threads);
    write_le<std::uint64_t>(out, seed_);
    for (const auto& key : keys_) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(key.size()));
        out.write(key.data(), static_cast<std::streamsize>(key.size()));
    }
    for (float v : vectors_) write_le<float>(out, v);
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    save(out);
    if (!out) throw InputError("write error in " + path.string());
}

EmbeddingModel EmbeddingModel::load(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic))
        throw InputError("embedding model: bad magic");
    if (const auto version = read_le<std::uint32_t>(in); version != kFormatVersion)
        throw InputError(fmt::format("embedding model: unsupported version {}", version));
    EmbeddingModel m;
    m.dim_ = read_le<std::uint32_t>(in);
    const auto vocab = read_le<std::uint64_t>(in);
    m.unigrams_ = read_le<std::uint64_t>(in);
    if (m.dim_ == 0 || m.unigrams_ > vocab) throw InputError("embedding model: inconsistent header");
    m.config_.dim = m.dim_;
    m.config_.epochs = read_le<std::uint32_t>(in);
    m.config_.negatives = read_le<std::uint32_t>(in);
    m.config_.learning_rate = read_le<double>(in);
    m.config_.min_count = read_le<std::uint64_t>(in);
    m.config_.buckets = read_le<std::uint32_t>(in);
    m.config_.max_doc_tokens = read_le<std::uint64_t>(in);
    m.config_.include_docstrings = read_le<std::uint8_t>(in) != 0;
    m.config_.threads = read_le<std::uint32_t>(in);
    m.seed_ = read_le<std::uint64_t>(in);
    m.keys_.reserve(vocab);
    for (std::uint64_t i = 0; i < vocab; ++i) {
        const auto len = read_le<std::uint32_t>(in);
        std::string key(len, '\0');
        if (!in.read(key.data(), len)) throw InputError("embedding model: truncated vocabulary");
        m.keys_.push_back(std::move(key));
    }
    m.vectors_.resize(vocab * m.dim_);
    for (auto& v : m.vectors_) v = read_le<float>(in);
    m.rebuild_index();
    return m;
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return load(in);
}

void EmbeddingModel::export_text(std::ostream& out) const {
    for (std::size_t row = 0; row < keys_.size(); ++row) {
        out << keys_[row];
        for (float v : vector(row)) out << ' ' << fmt::format("{}", v);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Training

class EmbeddingTrainer {
public:
    EmbeddingTrainer(std::span<const std::vector<std::string>> sentences, const EmbedConfig& config,
                     std::uint64_t seed)
        : sentences_(sentences), config_(config), seed_(seed), rng_(seed) {}

    EmbeddingModel run() {
        if (config_.dim < 2) throw DomainError("train: dim must be >= 2");
        if (config_.buckets == 0) throw DomainError("train: bucket count must be positive");
        std::size_t total_tokens = 0;
        for (const auto& s : sentences_) total_tokens += s.size();
        if (sentences_.empty() || total_tokens == 0) throw DomainError("train: empty corpus");

        build_vocab();
        init_vectors();
        build_negative_table();

        encoded_.reserve(sentences_.size());
        total_tokens_ = 0;
        for (const auto& s : sentences_) {
            encoded_.push_back(encode(model_, s));
            total_tokens_ += s.size();
        }

        const std::uint32_t threads = std::max<std::uint32_t>(1, config_.threads);
        std::vector<std::size_t> order(encoded_.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::uint32_t epoch = 0; epoch < config_.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng_);
            if (threads == 1) {
                Scratch scratch(config_.dim);
                for (std::size_t idx : order) train_sentence<PlainAccess>(encoded_[idx], rng_, scratch);
            } else {
                std::vector<std::jthread> workers;
                for (std::uint32_t w = 0; w < threads; ++w) {
                    workers.emplace_back([this, w, threads, &order, epoch] {
                        std::mt19937_64 rng(seed_ + 1 + w + 7919ull * epoch);
                        Scratch scratch(config_.dim);
                        for (std::size_t i = w; i < order.size(); i += threads)
                            train_sentence<SharedAccess>(encoded_[order[i]], rng, scratch);
                    });
                }
            }
        }
        model_.vectors_ = std::move(input_);
        model_.seed_ = seed_;
        return std::move(model_);
    }

private:
    struct Scratch {
        explicit Scratch(std::size_t dim) : sum(dim), ctx(dim), grad(dim), total(dim) {}
        std::vector<float> sum, ctx, grad, total;
        std::vector<float> per_target;  // positions x dim
    };

    void build_vocab() {
        std::unordered_map<std::string_view, std::uint64_t> counts;
        for (const auto& s : sentences_)
            for (const auto& tok : s) ++counts[tok];
        std::vector<std::pair<std::string_view, std::uint64_t>> kept;
        for (const auto& [tok, c] : counts)
            if (c >= config_.min_count) kept.emplace_back(tok, c);
        if (kept.empty()) throw DomainError("train: empty vocabulary (every token is below min_count)");
        std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
            return x.second != y.second ? x.second > y.second : x.first < y.first;
        });

        model_.dim_ = config_.dim;
        model_.config_ = config_;
        for (const auto& [tok, c] : kept) {
            model_.keys_.emplace_back(tok);
            unigram_counts_.push_back(c);
        }
        model_.unigrams_ = model_.keys_.size();
        model_.rebuild_index();

        // n-gram buckets over runs of known unigrams
        std::unordered_map<std::uint32_t, std::uint64_t> bucket_counts;
        for (const auto& s : sentences_) {
            std::vector<char> known(s.size());
            for (std::size_t t = 0; t < s.size(); ++t) known[t] = model_.find(s[t]).has_value();
            for (std::size_t order = 2; order <= 3; ++order) {
                for (std::size_t t = 0; t + order <= s.size(); ++t) {
                    bool ok = true;
                    for (std::size_t k = t; k < t + order; ++k) ok = ok && known[k];
                    if (ok) ++bucket_counts[model_.bucket_of(std::span(s).subspan(t, order))];
                }
            }
        }
        std::vector<std::uint32_t> buckets;
        for (const auto& [b, c] : bucket_counts)
            if (c >= config_.min_count) buckets.push_back(b);
        std::sort(buckets.begin(), buckets.end());
        for (std::uint32_t b : buckets) model_.keys_.push_back(EmbeddingModel::bucket_key(b));
        model_.rebuild_index();
    }

    void init_vectors() {
        const double bound = 1.0 / config_.dim;
        input_.resize(model_.keys_.size() * config_.dim);
        for (auto& v : input_) v = static_cast<float>((2.0 * unit_uniform(rng_) - 1.0) * bound);
        output_.assign(model_.unigrams_ * config_.dim, 0.0f);
    }

    void build_negative_table() {
        double z = 0;
        for (auto c : unigram_counts_) z += std::pow(static_cast<double>(c), 0.75);
        negative_table_.reserve(kNegativeTableSize);
        for (std::size_t w = 0; w < unigram_counts_.size(); ++w) {
            const double share = std::pow(static_cast<double>(unigram_counts_[w]), 0.75) / z;
            const auto copies = std::max<std::size_t>(
                1, static_cast<std::size_t>(share * static_cast<double>(kNegativeTableSize)));
            negative_table_.insert(negative_table_.end(), copies, static_cast<std::int32_t>(w));
        }
    }

    float learning_rate() const {
        const double progress = static_cast<double>(processed_.load(std::memory_order_relaxed)) /
                                (static_cast<double>(config_.epochs) * static_cast<double>(total_tokens_));
        return static_cast<float>(config_.learning_rate * std::max(1e-4, 1.0 - progress));
    }

    // Context vector = mean of every feature of the sentence except those
    // covering the target position. Input-vector updates are accumulated and
    // applied once per sentence; output vectors update immediately.
    template <class Access>
    void train_sentence(const Encoded& e, std::mt19937_64& rng, Scratch& s) {
        const std::size_t n = e.uni.size();
        const std::size_t dim = config_.dim;
        const float lr = learning_rate();
        processed_.fetch_add(n, std::memory_order_relaxed);

        std::size_t feature_count = 0;
        std::fill(s.sum.begin(), s.sum.end(), 0.0f);
        auto add_row = [&](std::vector<float>& acc, std::int32_t row, float scale) {
            const float* v = &input_[static_cast<std::size_t>(row) * dim];
            for (std::size_t d = 0; d < dim; ++d) acc[d] += scale * Access::load(v[d]);
        };
        for (std::size_t t = 0; t < n; ++t)
            for (std::int32_t r : {e.uni[t], e.bi[t], e.tri[t]})
                if (r >= 0) {
                    add_row(s.sum, r, 1.0f);
                    ++feature_count;
                }
        if (feature_count < 2) return;

        s.per_target.assign(n * dim, 0.0f);
        for (std::size_t t = 0; t < n; ++t) {
            const std::int32_t target = e.uni[t];
            if (target < 0) continue;

            s.ctx = s.sum;
            std::size_t covering = 0;
            auto remove = [&](std::int32_t row) {
                if (row < 0) return;
                add_row(s.ctx, row, -1.0f);
                ++covering;
            };
            remove(target);
            if (t >= 1) remove(e.bi[t - 1]);
            remove(e.bi[t]);
            if (t >= 2) remove(e.tri[t - 2]);
            if (t >= 1) remove(e.tri[t - 1]);
            remove(e.tri[t]);
            const std::size_t context = feature_count - covering;
            if (context == 0) continue;
            const float inv = 1.0f / static_cast<float>(context);
            for (auto& v : s.ctx) v *= inv;

            std::fill(s.grad.begin(), s.grad.end(), 0.0f);
            update_output<Access>(target, 1.0f, lr, s);
            for (std::uint32_t k = 0; k < config_.negatives; ++k) {
                std::int32_t neg = target;
                for (int tries = 0; neg == target && tries < 16; ++tries)
                    neg = negative_table_[rng() % negative_table_.size()];
                if (neg == target) continue;
                update_output<Access>(neg, 0.0f, lr, s);
            }
            float* g = &s.per_target[t * dim];
            for (std::size_t d = 0; d < dim; ++d) g[d] = s.grad[d] * inv;
        }

        std::fill(s.total.begin(), s.total.end(), 0.0f);
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t d = 0; d < dim; ++d) s.total[d] += s.per_target[t * dim + d];

        auto apply = [&](std::int32_t row, std::size_t first, std::size_t order) {
            float* v = &input_[static_cast<std::size_t>(row) * dim];
            for (std::size_t d = 0; d < dim; ++d) {
                float delta = s.total[d];
                for (std::size_t k = first; k < first + order; ++k) delta -= s.per_target[k * dim + d];
                Access::add(v[d], delta);
            }
        };
        for (std::size_t t = 0; t < n; ++t) {
            if (e.uni[t] >= 0) apply(e.uni[t], t, 1);
            if (e.bi[t] >= 0) apply(e.bi[t], t, 2);
            if (e.tri[t] >= 0) apply(e.tri[t], t, 3);
        }
    }

    template <class Access>
    void update_output(std::int32_t word, float label, float lr, Scratch& s) {
        const std::size_t dim = config_.dim;
        float* out = &output_[static_cast<std::size_t>(word) * dim];
        float dot = 0;
        for (std::size_t d = 0; d < dim; ++d) dot += Access::load(out[d]) * s.ctx[d];
        const float score = 1.0f / (1.0f + std::exp(-std::clamp(dot, -30.0f, 30.0f)));
        const float alpha = lr * (label - score);
        for (std::size_t d = 0; d < dim; ++d) {
            s.grad[d] += alpha * Access::load(out[d]);
            Access::add(out[d], alpha * s.ctx[d]);
        }
    }

    std::span<const std::vector<std::string>> sentences_;
    EmbedConfig config_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    EmbeddingModel model_;
    std::vector<std::uint64_t> unigram_counts_;
    std::vector<float> input_;
    std::vector<float> output_;
    std::vector<std::int32_t> negative_table_;
    std::vector<Encoded> encoded_;
    std::size_t total_tokens_ = 0;
    std::atomic<std::size_t> processed_{0};
};

EmbeddingModel train(std::span<const std::vector<std::string>> sentences, const EmbedConfig& config,
                     std::uint64_t seed) {
    return EmbeddingTrainer(sentences, config, seed).run();
}

EmbeddingModel train(const Corpus& corpus, const EmbedConfig& config, std::uint64_t seed) {
    if (corpus.empty()) throw DomainError("train: empty corpus");
    const auto sentences = training_sentences(corpus, config);
    return train(sentences, config, seed);
}

// ---------------------------------------------------------------------------
// Similarity

DocumentEmbedding embed_document(const EmbeddingModel& model, const TokenStream& stream) {
    std::span<const std::string> tokens = stream.tokens;
    const auto limit = model.config().max_doc_tokens;
    if (limit > 0 && tokens.size() > limit) {
        spdlog::debug("document {} truncated from {} to {} tokens for embedding", stream.doc_id,
                      tokens.size(), limit);
        tokens = tokens.first(limit);
    }
    DocumentEmbedding out;
    out.vector.assign(model.dim(), 0.0);
    const auto rows = model.feature_rows(tokens);
    if (rows.empty()) return out;
    for (auto row : rows) {
        const auto v = model.vector(row);
        for (std::size_t d = 0; d < v.size(); ++d) out.vector[d] += v[d];
    }
    for (auto& x : out.vector) x /= static_cast<double>(rows.size());
    out.embeddable = true;
    return out;
}

std::optional<double> cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return std::nullopt;
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

CorpusCentroid centroid_of(std::span<const std::vector<double>> vectors, std::size_t dim) {
    CorpusCentroid c;
    c.mean_unit.assign(dim, 0.0);
    for (const auto& v : vectors) {
        if (v.size() != dim) throw std::invalid_argument("centroid_of: dimension mismatch");
        double norm = 0;
        for (double x : v) norm += x * x;
        if (norm == 0.0) {
            ++c.unembeddable;
            continue;
        }
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < dim; ++d) c.mean_unit[d] += v[d] / norm;
        ++c.embeddable;
    }
    if (c.embeddable > 0)
        for (auto& x : c.mean_unit) x /= static_cast<double>(c.embeddable);
    return c;
}

CorpusCentroid corpus_centroid(const EmbeddingModel& model, const Corpus& corpus) {
    std::vector<std::vector<double>> vectors;
    vectors.reserve(corpus.size());
    std::size_t unembeddable = 0;
    for (const auto& doc : corpus.documents) {
        auto e = embed_document(model, tokenize(doc));
        if (e.embeddable) vectors.push_back(std::move(e.vector));
        else ++unembeddable;
    }
    auto c = centroid_of(vectors, model.dim());
    c.unembeddable += unembeddable;
    return c;
}

double semantic_similarity(const CorpusCentroid& candidate, const CorpusCentroid& target) {
    if (candidate.embeddable == 0) throw DomainError("semantic similarity: candidate has no embeddable document");
    if (target.embeddable == 0) throw DomainError("semantic similarity: target has no embeddable document");
    if (candidate.mean_unit.size() != target.mean_unit.size())
        throw std::invalid_argument("semantic similarity: dimension mismatch");
    double dot = 0;
    for (std::size_t d = 0; d < candidate.mean_unit.size(); ++d)
        dot += candidate.mean_unit[d] * target.mean_unit[d];
    return dot;
}

double semantic_similarity(const EmbeddingModel& model, const Corpus& candidate, const Corpus& target) {
    return semantic_similarity(corpus_centroid(model, candidate), corpus_centroid(model, target));
}

double mean_pairwise_cosine(std::span<const std::vector<double>> xs, std::span<const std::vector<double>> ys) {
    if (xs.empty() || ys.empty()) throw DomainError("mean_pairwise_cosine: empty side");
    const std::size_t dim = xs.front().size();
    return semantic_similarity(centroid_of(xs, dim), centroid_of(ys, dim));
}

SimilarityScoreMap normalize_scores(const std::map<std::string, double>& raw) {
    auto normalized = normalize_by_max(raw, "semantic similarity");
    return SimilarityScoreMap{raw, std::move(normalized)};
}

}  // namespace plsel
