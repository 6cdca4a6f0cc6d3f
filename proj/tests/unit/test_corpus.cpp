#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "plsel/corpus.hpp"
#include "plsel/error.hpp"

using namespace plsel;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const char* name) { return fs::path(PLSEL_FIXTURE_DIR) / name; }

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path dir = fs::temp_directory_path() / "plsel-unit";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

Corpus make(const std::string& lang, std::initializer_list<const char*> ids) {
    Corpus c;
    c.language = lang;
    for (const char* id : ids) {
        CorpusDocument d;
        d.id = id;
        d.language = lang;
        d.split = Split::train;
        d.code = std::string("code of ") + id;
        c.documents.push_back(d);
    }
    return c;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("three-line fixture fields match byte for byte") {
    const Corpus c = load_jsonl(fixture("three_docs.jsonl"), "ruby", Split::train);
    REQUIRE(c.size() == 3);
    CHECK(c.language == "ruby");
    CHECK(c.documents[0].id == "rb-1");
    CHECK(c.documents[0].code == "def add(a, b)\n  a + b\nend");
    CHECK(c.documents[0].docstring == std::optional<std::string>("Adds two numbers."));
    CHECK(c.documents[0].code_tokens->size() == 11);
    CHECK(c.documents[0].is_bimodal());
    CHECK(c.documents[1].code == "def name\n  @name\nend");
    CHECK_FALSE(c.documents[1].is_bimodal());
    CHECK(c.documents[2].code == "puts \"h\xc3\xa9llo\" # unicode \xe2\x9c\x93");
    CHECK_FALSE(c.documents[2].docstring.has_value());
    CHECK(c.documents[2].split == Split::train);
}

TEST_CASE("empty file loads as an empty corpus") {
    const Corpus c = load_jsonl(temp_file("empty.jsonl", ""), "go", Split::test);
    CHECK(c.empty());
    const auto s = stats(c);
    CHECK(s.total == 0);
    CHECK(s.bimodal == 0);
    CHECK(s.unimodal == 0);
    CHECK_FALSE(s.token_length.has_value());
}

TEST_CASE("missing ids are derived from language, split and line") {
    const Corpus c = load_jsonl(temp_file("noid.jsonl", "{\"code\":\"a\"}\n\n{\"code\":\"b\"}\n"), "go", Split::valid);
    REQUIRE(c.size() == 2);
    CHECK(c.documents[0].id == "go:valid:1");
    CHECK(c.documents[1].id == "go:valid:3");
}

TEST_CASE("malformed lines fail strictly and are skipped leniently") {
    const auto p = temp_file("bad.jsonl", "{\"code\":\"a\",\"id\":\"1\"}\n{not json\n{\"id\":\"3\"}\n{\"code\":\"c\",\"id\":\"1\"}\n");
    CHECK_THROWS_WITH_AS(load_jsonl(p, "go", Split::train), doctest::Contains("line 2"), InputError);
    const Corpus c = load_jsonl(p, "go", Split::train, {.lenient = true});
    REQUIRE(c.size() == 1);
    CHECK(c.documents[0].id == "1");
}

TEST_CASE("missing file is an input error") {
    CHECK_THROWS_AS(load_jsonl("/nonexistent/file.jsonl", "go", Split::train), InputError);
}

TEST_CASE("write then load round-trips, plain and gzip") {
    const Corpus c = load_jsonl(fixture("three_docs.jsonl"), "ruby", Split::train);
    for (const char* name : {"rt.jsonl", "rt.jsonl.gz"}) {
        const fs::path p = fs::temp_directory_path() / "plsel-unit" / name;
        write_jsonl(c, p);
        const Corpus back = load_jsonl(p, "ruby", Split::test);
        CHECK(back.documents == c.documents);
    }
}

TEST_CASE("combine keeps order and prefixes colliding ids") {
    const Corpus a = make("python", {"1", "2"});
    const Corpus b = make("java", {"3", "1"});
    const std::vector<Corpus> both{a, b};
    const Corpus c = combine(both);
    CHECK(c.language == "combined");
    REQUIRE(c.size() == 4);
    CHECK(c.documents[0].id == "1");
    CHECK(c.documents[2].id == "3");
    CHECK(c.documents[3].id == "java:1");
    CHECK(c.documents[3].language == "java");

    const std::vector<Corpus> one{a};
    CHECK(combine(one).documents == a.documents);
    CHECK_THROWS_AS(combine(std::span<const Corpus>{}), DomainError);
}

TEST_CASE("stats: split counts, modality and median length") {
    Corpus c = make("ruby", {"a", "b", "c", "d", "e"});
    const char* codes[] = {"x", "x x", "x x x", "x x x x", "x x x x x"};
    for (int i = 0; i < 5; ++i) c.documents[i].code = codes[i];
    c.documents[0].docstring = "doc";
    c.documents[4].split = Split::test;
    const auto s = stats(c);
    CHECK(s.total == 5);
    CHECK(s.per_split[0] == 4);
    CHECK(s.per_split[2] == 1);
    CHECK(s.bimodal == 1);
    CHECK(s.unimodal == 4);
    REQUIRE(s.token_length);
    CHECK(s.token_length->median == 3.0);
    CHECK(s.token_length->min == 1.0);
    CHECK(s.token_length->max == 5.0);
    CHECK(bimodal_only(c).size() == 1);
}

TEST_CASE("fingerprint depends on content only") {
    Corpus a = make("go", {"1", "2"});
    Corpus b = make("go", {"1", "2"});
    b.provenance.push_back("elsewhere.jsonl");
    CHECK(fingerprint(a) == fingerprint(b));
    b.documents[1].code += " ";
    CHECK(fingerprint(a) != fingerprint(b));
}

TEST_CASE("split names") {
    for (Split s : kAllSplits) CHECK(parse_split(to_string(s)) == s);
    CHECK_THROWS_AS(parse_split("dev"), InputError);
}

}  // TEST_SUITE
