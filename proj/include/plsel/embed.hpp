#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "plsel/corpus.hpp"
#include "plsel/token.hpp"

namespace plsel {

struct EmbedConfig {
    std::uint32_t dim = 100;
    std::uint32_t epochs = 5;
    std::uint32_t negatives = 5;
    double learning_rate = 0.05;  // decays linearly to 0 over training
    std::uint64_t min_count = 5;  // applies to unigrams and n-gram buckets alike
    std::uint32_t buckets = 1u << 20;
    std::uint64_t max_doc_tokens = 1024;
    bool include_docstrings = false;
    // 1 = deterministic. More threads update shared vectors without locking,
    // so results then vary from run to run.
    std::uint32_t threads = 1;
};

nlohmann::json to_json(const EmbedConfig& c);
EmbedConfig embed_config_from_json(const nlohmann::json& j, EmbedConfig defaults = {});

// Input vectors for unigrams and hashed bigram/trigram buckets. A document
// embeds as the mean of the vectors of its in-vocabulary n-grams; an n-gram is
// in vocabulary when all of its tokens are known unigrams and its bucket
// survived the min-count cut.
class EmbeddingModel {
public:
    EmbeddingModel() = default;

    // Builds a model from an explicit table. Keys are unigram tokens or bucket
    // keys as produced by bucket_key(). Intended for fixtures and tools.
    static EmbeddingModel from_table(std::vector<std::string> keys, std::vector<float> vectors,
                                     std::uint32_t dim, EmbedConfig config = {});

    std::uint32_t dim() const { return dim_; }
    std::size_t vocab_size() const { return keys_.size(); }
    std::size_t unigram_count() const { return unigrams_; }
    const EmbedConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }

    const std::string& key(std::size_t row) const { return keys_[row]; }
    std::optional<std::size_t> find(std::string_view key) const;
    std::span<const float> vector(std::size_t row) const;

    // Rows of every in-vocabulary unigram, bigram and trigram of `tokens`,
    // one entry per occurrence.
    std::vector<std::uint32_t> feature_rows(std::span<const std::string> tokens) const;

    // Bucket of an n-gram under this model's bucket count.
    std::uint32_t bucket_of(std::span<const std::string> ngram) const;
    static std::string bucket_key(std::uint32_t bucket);

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static EmbeddingModel load(std::istream& in);
    static EmbeddingModel load(const std::filesystem::path& path);

    // One "key v1 ... v_dim" line per vocabulary entry.
    void export_text(std::ostream& out) const;

private:
    friend class EmbeddingTrainer;

    void rebuild_index();

    std::uint32_t dim_ = 0;
    std::size_t unigrams_ = 0;        // rows [0, unigrams_) are unigrams
    std::vector<std::string> keys_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<float> vectors_;      // row-major, vocab_size() x dim_
    EmbedConfig config_;
    std::uint64_t seed_ = 0;
};

// Trains on the code (and optionally docstrings) of every document: for each
// in-vocabulary token, the mean of the document's other n-gram vectors
// predicts it against `negatives` sampled noise tokens.
EmbeddingModel train(const Corpus& corpus, const EmbedConfig& config, std::uint64_t seed);
EmbeddingModel train(std::span<const std::vector<std::string>> sentences, const EmbedConfig& config,
                     std::uint64_t seed);

struct DocumentEmbedding {
    std::vector<double> vector;
    bool embeddable = false;  // false when no n-gram is in vocabulary (vector is zero)
};

DocumentEmbedding embed_document(const EmbeddingModel& model, const TokenStream& stream);

// dot(u,v) / (|u||v|); nullopt when either norm is zero.
std::optional<double> cosine(std::span<const double> u, std::span<const double> v);

// Mean of unit-normalized vectors of the embeddable documents of a corpus.
struct CorpusCentroid {
    std::vector<double> mean_unit;
    std::size_t embeddable = 0;
    std::size_t unembeddable = 0;
};

CorpusCentroid corpus_centroid(const EmbeddingModel& model, const Corpus& corpus);
CorpusCentroid centroid_of(std::span<const std::vector<double>> vectors, std::size_t dim);

// Mean cosine over all cross pairs, as dot(mean unit candidate, mean unit
// target). Throws DomainError if either side has no embeddable document.
double semantic_similarity(const CorpusCentroid& candidate, const CorpusCentroid& target);
double semantic_similarity(const EmbeddingModel& model, const Corpus& candidate, const Corpus& target);
double mean_pairwise_cosine(std::span<const std::vector<double>> xs,
                            std::span<const std::vector<double>> ys);

struct SimilarityScoreMap {
    std::map<std::string, double> raw;
    std::map<std::string, double> normalized;
};

SimilarityScoreMap normalize_scores(const std::map<std::string, double>& raw);

}  // namespace plsel
