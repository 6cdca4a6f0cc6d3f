#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "plsel/embed.hpp"
#include "plsel/error.hpp"

using namespace plsel;

namespace {

Corpus corpus_of(const std::string& lang, const std::vector<std::string>& codes) {
    Corpus c;
    c.language = lang;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        CorpusDocument d;
        d.id = lang + std::to_string(i);
        d.language = lang;
        d.code = codes[i];
        c.documents.push_back(d);
    }
    return c;
}

std::vector<std::vector<std::string>> toy_sentences() {
    std::vector<std::vector<std::string>> out;
    std::mt19937_64 rng(1);
    const std::vector<std::vector<std::string>> topics = {
        {"open", "file", "read", "line", "close", "path"},
        {"socket", "connect", "send", "recv", "port", "host"},
    };
    for (int i = 0; i < 200; ++i) {
        const auto& words = topics[static_cast<std::size_t>(i % 2)];
        std::vector<std::string> s;
        for (int k = 0; k < 12; ++k) s.push_back(words[rng() % words.size()]);
        out.push_back(std::move(s));
    }
    return out;
}

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return s / std::sqrt(na * nb);
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("cosine basics") {
    const std::vector<double> x{1, 0}, y{0, 2}, z{3, 0}, zero{0, 0};
    CHECK(*cosine(x, y) == doctest::Approx(0.0));
    CHECK(*cosine(x, z) == doctest::Approx(1.0));
    CHECK_FALSE(cosine(x, zero).has_value());
    CHECK_THROWS_AS(cosine(x, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("closed-form mean pairwise cosine equals brute force") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 1 + trial % 16;
        auto draw = [&](std::size_t n) {
            std::vector<std::vector<double>> vs(n, std::vector<double>(dim));
            for (auto& v : vs)
                for (auto& x : v) x = g(rng);
            if (n > 1 && trial % 5 == 0) vs[0].assign(dim, 0.0);  // unembeddable
            return vs;
        };
        const auto xs = draw(1 + rng() % 20);
        const auto ys = draw(1 + rng() % 20);
        const auto brute = oracle::brute_mean_cosine(xs, ys);
        REQUIRE(brute.has_value());
        CHECK(std::abs(mean_pairwise_cosine(xs, ys) - *brute) < 1e-9);
    }
}

TEST_CASE("n-gram features need known unigrams and a surviving bucket") {
    const auto sentences = std::vector<std::vector<std::string>>{
        {"a", "b", "c"}, {"a", "b", "c"}, {"a", "b", "d"}};
    EmbedConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    cfg.min_count = 2;
    const EmbeddingModel m = train(sentences, cfg, 3);
    CHECK(m.unigram_count() == 3);  // a, b, c; d appears once
    CHECK(m.find("a").has_value());
    CHECK_FALSE(m.find("d").has_value());
    const std::vector<std::string> ab{"a", "b"}, bc{"b", "c"}, abc{"a", "b", "c"}, bd{"b", "d"};
    CHECK(m.find(EmbeddingModel::bucket_key(m.bucket_of(ab))).has_value());
    CHECK(m.find(EmbeddingModel::bucket_key(m.bucket_of(bc))).has_value());
    CHECK(m.find(EmbeddingModel::bucket_key(m.bucket_of(abc))).has_value());
    // 3 unigrams + {a b}, {b c}, {a b c} (unless buckets collide)
    CHECK(m.vocab_size() <= 6);
    // "a b d": unigrams a, b; bigram a b; b d and a b d are out of vocabulary
    const std::vector<std::string> doc{"a", "b", "d"};
    CHECK(m.feature_rows(doc).size() == 3);
    CHECK(m.feature_rows(std::vector<std::string>{"zzz"}).empty());
}

TEST_CASE("bucket keys cannot collide with tokens") {
    for (const auto& tok : normalize_plaintext("<ngram:12> x < ngram : 3 >"))
        CHECK((tok.find('<') == std::string::npos || tok == "<"));
}

TEST_CASE("single-threaded training is deterministic per seed") {
    const auto s = toy_sentences();
    EmbedConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 3;
    cfg.min_count = 1;
    std::ostringstream a, b, c;
    train(s, cfg, 42).save(a);
    train(s, cfg, 42).save(b);
    train(s, cfg, 43).save(c);
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
}

TEST_CASE("training pulls co-occurring tokens together") {
    const auto s = toy_sentences();
    EmbedConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 10;
    cfg.min_count = 1;
    cfg.learning_rate = 0.1;
    const EmbeddingModel m = train(s, cfg, 7);
    auto vec = [&](const char* w) { return m.vector(*m.find(w)); };
    const double same = dot(vec("open"), vec("read"));
    const double other = dot(vec("open"), vec("socket"));
    CHECK(same > other);
}

TEST_CASE("multi-threaded training runs and yields a usable model") {
    const auto s = toy_sentences();
    EmbedConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.min_count = 1;
    cfg.threads = 3;
    const EmbeddingModel m = train(s, cfg, 1);
    CHECK(m.unigram_count() == 12);
    for (std::size_t r = 0; r < m.vocab_size(); ++r)
        for (float x : m.vector(r)) REQUIRE(std::isfinite(x));
}

TEST_CASE("save and load round-trip") {
    const auto s = toy_sentences();
    EmbedConfig cfg;
    cfg.dim = 6;
    cfg.epochs = 1;
    cfg.min_count = 1;
    const EmbeddingModel m = train(s, cfg, 5);
    std::stringstream buf;
    m.save(buf);
    const EmbeddingModel back = EmbeddingModel::load(buf);
    REQUIRE(back.vocab_size() == m.vocab_size());
    CHECK(back.unigram_count() == m.unigram_count());
    CHECK(back.seed() == 5);
    for (std::size_t r = 0; r < m.vocab_size(); ++r) {
        CHECK(back.key(r) == m.key(r));
        const auto x = m.vector(r), y = back.vector(r);
        CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
    std::stringstream junk("not a model");
    CHECK_THROWS_AS(EmbeddingModel::load(junk), InputError);
}

TEST_CASE("empty training input is rejected") {
    EmbedConfig cfg;
    cfg.min_count = 1;
    CHECK_THROWS_AS(train(std::span<const std::vector<std::string>>{}, cfg, 1), DomainError);
    cfg.min_count = 100;
    const auto s = toy_sentences();
    CHECK_THROWS_AS(train(std::span(s).first(1), cfg, 1), DomainError);
}

TEST_CASE("document embedding averages feature rows") {
    const EmbeddingModel m = EmbeddingModel::from_table({"x", "y"}, {1, 0, 0, 1}, 2);
    const auto e = embed_document(m, TokenStream{"d", {"x", "y", "x", "unknown"}});
    REQUIRE(e.embeddable);
    CHECK(e.vector[0] == doctest::Approx(2.0 / 3));
    CHECK(e.vector[1] == doctest::Approx(1.0 / 3));
    CHECK_FALSE(embed_document(m, TokenStream{"d", {"unknown"}}).embeddable);
}

TEST_CASE("semantic similarity on corpora equals brute force over documents") {
    const EmbeddingModel m = EmbeddingModel::from_table({"x", "y", "z"}, {1, 0, 0, 1, -1, 1}, 2);
    const Corpus a = corpus_of("a", {"x", "x y", "z z x", "unseen"});
    const Corpus b = corpus_of("b", {"y", "z", "x z"});
    std::vector<std::vector<double>> va, vb;
    for (const auto& d : a.documents)
        if (auto e = embed_document(m, tokenize(d)); e.embeddable) va.push_back(e.vector);
    for (const auto& d : b.documents)
        if (auto e = embed_document(m, tokenize(d)); e.embeddable) vb.push_back(e.vector);
    CHECK(semantic_similarity(m, a, b) == doctest::Approx(*oracle::brute_mean_cosine(va, vb)).epsilon(1e-12));
    CHECK(corpus_centroid(m, a).unembeddable == 1);
    const Corpus dead = corpus_of("c", {"unseen"});
    CHECK_THROWS_AS(semantic_similarity(m, dead, b), DomainError);
}

TEST_CASE("normalize_scores divides by the maximum") {
    const auto s = normalize_scores({{"a", 0.2}, {"b", 0.8}, {"c", -0.1}});
    CHECK(s.raw.at("c") == -0.1);
    CHECK(s.normalized.at("a") == doctest::Approx(0.25));
    CHECK(s.normalized.at("b") == 1.0);
    CHECK(s.normalized.at("c") == 0.0);
    CHECK_THROWS_AS(normalize_scores({}), DomainError);
    CHECK_THROWS_AS(normalize_scores({{"a", 0.0}}), DomainError);
    CHECK_THROWS_AS(normalize_scores({{"a", -0.5}}), DomainError);
}

TEST_CASE("config JSON round-trip") {
    EmbedConfig c;
    c.dim = 7;
    c.min_count = 2;
    c.include_docstrings = true;
    const EmbedConfig back = embed_config_from_json(to_json(c));
    CHECK(back.dim == 7);
    CHECK(back.min_count == 2);
    CHECK(back.include_docstrings);
    CHECK(embed_config_from_json(nlohmann::json::object()).dim == 100);
}

}  // TEST_SUITE
