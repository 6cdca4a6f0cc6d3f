#include "plsel/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>
#include <zlib.h>

#include "plsel/error.hpp"
#include "plsel/fingerprint.hpp"
#include "plsel/quantile.hpp"
#include "plsel/token.hpp"

namespace plsel {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
        case Split::unsplit: return "unsplit";
    }
    return "unsplit";
}

Split parse_split(std::string_view name) {
    for (Split s : kAllSplits)
        if (to_string(s) == name) return s;
    throw InputError("unknown split '" + std::string(name) + "' (expected train|valid|test|unsplit)");
}

bool operator==(const CorpusDocument& a, const CorpusDocument& b) {
    return a.id == b.id && a.language == b.language && a.split == b.split && a.code == b.code &&
           a.docstring == b.docstring && a.code_tokens == b.code_tokens &&
           a.docstring_tokens == b.docstring_tokens;
}

namespace {

bool has_gz_extension(const fs::path& path) { return path.extension() == ".gz"; }

std::string read_all(const fs::path& path) {
    if (has_gz_extension(path)) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (gz == nullptr) throw InputError("cannot open " + path.string());
        std::string data;
        char buf[1 << 16];
        int n = 0;
        while ((n = gzread(gz, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(n));
        int err = 0;
        const char* msg = gzerror(gz, &err);
        gzclose(gz);
        if (n < 0 || (err != Z_OK && err != Z_STREAM_END))
            throw InputError("gzip read error in " + path.string() + ": " + msg);
        return data;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::optional<std::vector<std::string>> string_list(const json& record, const char* key,
                                                    std::size_t line_no) {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_array())
        throw InputError("line " + std::to_string(line_no) + ": field '" + key + "' is not an array");
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string())
            throw InputError("line " + std::to_string(line_no) + ": field '" + key +
                             "' holds a non-string element");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

CorpusDocument parse_document(const json& record, const std::string& language, Split split,
                              std::size_t line_no) {
    const auto where = [&] { return "line " + std::to_string(line_no); };
    if (!record.is_object()) throw InputError(where() + ": record is not a JSON object");

    CorpusDocument doc;
    doc.language = language;
    doc.split = split;
    doc.source_line = line_no;
    if (auto it = record.find("split"); it != record.end() && it->is_string()) {
        try {
            doc.split = parse_split(it->get<std::string>());
        } catch (const InputError& e) {
            throw InputError(where() + ": " + e.what());
        }
    }

    const json* code = nullptr;
    if (auto it = record.find("code"); it != record.end() && it->is_string()) code = &*it;
    else if (auto it2 = record.find("original_string"); it2 != record.end() && it2->is_string())
        code = &*it2;
    if (code == nullptr) throw InputError(where() + ": missing \"code\"/\"original_string\" field");
    doc.code = code->get<std::string>();
    if (doc.code.empty()) throw InputError(where() + ": empty code field");

    if (auto it = record.find("id"); it != record.end() && !it->is_null()) {
        doc.id = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
        doc.id = language + ":" + std::string(to_string(doc.split)) + ":" + std::to_string(line_no);
    }

    if (auto it = record.find("docstring"); it != record.end() && !it->is_null()) {
        if (!it->is_string()) throw InputError(where() + ": field 'docstring' is not a string");
        doc.docstring = it->get<std::string>();
    }
    doc.code_tokens = string_list(record, "code_tokens", line_no);
    doc.docstring_tokens = string_list(record, "docstring_tokens", line_no);
    return doc;
}

Corpus load_jsonl(const fs::path& path, std::string language, Split split,
                  const LoadOptions& options) {
    const std::string data = read_all(path);

    Corpus corpus;
    corpus.language = std::move(language);
    corpus.provenance.push_back(path.string());

    std::unordered_set<std::string> seen;
    std::size_t skipped = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        std::string_view line(data.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        try {
            json record;
            try {
                record = json::parse(line);
            } catch (const json::parse_error& e) {
                throw InputError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
            }
            CorpusDocument doc = parse_document(record, corpus.language, split, line_no);
            if (!seen.insert(doc.id).second)
                throw InputError("line " + std::to_string(line_no) + ": duplicate id '" + doc.id + "'");
            corpus.documents.push_back(std::move(doc));
        } catch (const InputError& e) {
            if (!options.lenient) throw InputError(path.string() + ": " + e.what());
            spdlog::warn("{}: {} (skipped)", path.string(), e.what());
            ++skipped;
        }
    }
    if (skipped > 0) spdlog::warn("{}: skipped {} malformed line(s)", path.string(), skipped);
    return corpus;
}

json to_json(const CorpusDocument& doc) {
    json j;
    j["id"] = doc.id;
    j["language"] = doc.language;
    j["split"] = std::string(to_string(doc.split));
    j["code"] = doc.code;
    if (doc.docstring) j["docstring"] = *doc.docstring;
    if (doc.code_tokens) j["code_tokens"] = *doc.code_tokens;
    if (doc.docstring_tokens) j["docstring_tokens"] = *doc.docstring_tokens;
    return j;
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
    for (const auto& doc : corpus.documents) out << to_json(doc).dump() << '\n';
}

void write_jsonl(const Corpus& corpus, const fs::path& path) {
    std::ostringstream ss;
    write_jsonl(corpus, ss);
    const std::string data = std::move(ss).str();
    if (has_gz_extension(path)) {
        gzFile gz = gzopen(path.c_str(), "wb");
        if (gz == nullptr) throw InputError("cannot write " + path.string());
        const bool ok = data.empty() ||
                        gzwrite(gz, data.data(), static_cast<unsigned>(data.size())) ==
                            static_cast<int>(data.size());
        if (gzclose(gz) != Z_OK || !ok) throw InputError("gzip write error in " + path.string());
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << data;
    if (!out) throw InputError("write error in " + path.string());
}

Corpus combine(std::span<const Corpus> corpora) {
    if (corpora.empty()) throw DomainError("combine: empty list of corpora");
    Corpus out;
    out.language = std::string(kCombinedTag);
    std::size_t total = 0;
    for (const auto& c : corpora) total += c.size();
    out.documents.reserve(total);

    std::unordered_set<std::string> ids;
    for (const auto& c : corpora) {
        out.provenance.insert(out.provenance.end(), c.provenance.begin(), c.provenance.end());
        for (const auto& doc : c.documents) {
            CorpusDocument copy = doc;
            if (!ids.insert(copy.id).second) {
                copy.id = copy.language + ":" + copy.id;
                if (!ids.insert(copy.id).second)
                    throw DomainError("combine: id '" + doc.id +
                                      "' collides even after language prefixing");
            }
            out.documents.push_back(std::move(copy));
        }
    }
    return out;
}

Corpus bimodal_only(const Corpus& corpus) {
    Corpus out;
    out.language = corpus.language;
    out.provenance = corpus.provenance;
    std::copy_if(corpus.documents.begin(), corpus.documents.end(), std::back_inserter(out.documents),
                 [](const CorpusDocument& d) { return d.is_bimodal(); });
    return out;
}

CorpusStats stats(const Corpus& corpus) {
    CorpusStats s;
    s.total = corpus.size();
    std::vector<double> lengths;
    lengths.reserve(corpus.size());
    for (const auto& doc : corpus.documents) {
        ++s.per_split[static_cast<std::size_t>(doc.split)];
        (doc.is_bimodal() ? s.bimodal : s.unimodal) += 1;
        lengths.push_back(static_cast<double>(length_of(doc)));
    }
    if (!lengths.empty()) {
        std::sort(lengths.begin(), lengths.end());
        s.token_length = LengthSummary{lengths.front(), linear_percentile(lengths, 0.25),
                                       linear_percentile(lengths, 0.5),
                                       linear_percentile(lengths, 0.75), lengths.back()};
    }
    return s;
}

json to_json(const CorpusStats& s) {
    json j;
    j["total"] = s.total;
    json splits = json::object();
    for (Split sp : kAllSplits) splits[std::string(to_string(sp))] = s.per_split[static_cast<std::size_t>(sp)];
    j["splits"] = splits;
    j["bimodal"] = s.bimodal;
    j["unimodal"] = s.unimodal;
    j["length_unit"] = std::string(kCodeLengthUnit);
    if (s.token_length) {
        const auto& l = *s.token_length;
        j["token_length"] = {{"min", l.min}, {"q1", l.q1}, {"median", l.median}, {"q3", l.q3},
                             {"max", l.max}};
    } else {
        j["token_length"] = nullptr;
    }
    return j;
}

std::string fingerprint(const Corpus& corpus) {
    Fingerprinter fp;
    fp.add(corpus.language).add(static_cast<std::uint64_t>(corpus.size()));
    for (const auto& doc : corpus.documents) fp.add(to_json(doc).dump());
    return fp.hex();
}

}  // namespace plsel
