#include "solmover/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

using nlohmann::json;

namespace {
constexpr int kIndexFormatVersion = 1;

double idf(const Bm25Index& index, size_t n_t) {
    double N = static_cast<double>(index.doc_count);
    double n = static_cast<double>(n_t);
    return std::log((N - n + 0.5) / (n + 0.5) + 1.0);
}

double term_weight(const Bm25Index& index, size_t n_t, int tf, size_t doc_len) {
    double norm = index.k1 * (1.0 - index.b + index.b * static_cast<double>(doc_len) /
                                                  index.avg_doc_length);
    return idf(index, n_t) * (static_cast<double>(tf) * (index.k1 + 1.0)) /
           (static_cast<double>(tf) + norm);
}
}  // namespace

Bm25Index build_bm25_index(const std::vector<Fragment>& fragments, double k1, double b) {
    if (fragments.empty()) throw EmptyCorpus("cannot index an empty fragment list");
    if (k1 <= 0.0) throw Error("bm25 k1 must be positive");
    if (b < 0.0 || b > 1.0) throw Error("bm25 b must lie in [0, 1]");

    Bm25Index index;
    index.k1 = k1;
    index.b = b;

    size_t total_len = 0;
    for (const auto& frag : fragments) {
        auto tokens = index_tokens(index_text(frag));
        index.doc_lengths[frag.id] = tokens.size();
        total_len += tokens.size();
        std::map<std::string, int> tf;
        for (const auto& tok : tokens) ++tf[tok];
        for (const auto& [term, count] : tf) index.postings[term].emplace_back(frag.id, count);
    }
    for (auto& [term, posting] : index.postings) {
        std::sort(posting.begin(), posting.end());
    }
    index.doc_count = index.doc_lengths.size();
    index.avg_doc_length =
        static_cast<double>(total_len) / static_cast<double>(index.doc_count);
    return index;
}

std::vector<ScoredFragment> search_bm25(const Bm25Index& index,
                                        const std::vector<std::string>& query, size_t k) {
    if (k < 1) throw Error("bm25 search needs k >= 1");
    std::unordered_map<std::string, double> scores;
    for (const auto& term : query) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        size_t n_t = it->second.size();
        for (const auto& [id, tf] : it->second) {
            scores[id] += term_weight(index, n_t, tf, index.doc_lengths.at(id));
        }
    }
    std::vector<ScoredFragment> ranked;
    ranked.reserve(scores.size());
    for (const auto& [id, score] : scores) ranked.push_back({id, score});
    std::sort(ranked.begin(), ranked.end(), [](const ScoredFragment& a, const ScoredFragment& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fragment_id < b.fragment_id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

double bm25_score(const Bm25Index& index, const std::vector<std::string>& query,
                  const std::string& fragment_id) {
    auto len_it = index.doc_lengths.find(fragment_id);
    if (len_it == index.doc_lengths.end()) return 0.0;
    double score = 0.0;
    for (const auto& term : query) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const auto& posting = it->second;
        auto p = std::lower_bound(posting.begin(), posting.end(),
                                  std::make_pair(fragment_id, 0),
                                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (p == posting.end() || p->first != fragment_id) continue;
        score += term_weight(index, posting.size(), p->second, len_it->second);
    }
    return score;
}

std::string Bm25Index::serialize() const {
    json doc;
    doc["format_version"] = kIndexFormatVersion;
    doc["k1"] = k1;
    doc["b"] = b;
    json lengths = json::object();
    for (const auto& [id, len] : doc_lengths) lengths[id] = len;
    doc["doc_lengths"] = std::move(lengths);
    json post = json::object();
    for (const auto& [term, entries] : postings) {
        json arr = json::array();
        for (const auto& [id, tf] : entries) arr.push_back(json::array({id, tf}));
        post[term] = std::move(arr);
    }
    doc["postings"] = std::move(post);
    return doc.dump(2);
}

Bm25Index Bm25Index::deserialize(const std::string& json_text) {
    json doc = json::parse(json_text);
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kIndexFormatVersion) {
        throw FormatVersionMismatch("bm25 index format version mismatch");
    }
    Bm25Index index;
    index.k1 = doc.at("k1").get<double>();
    index.b = doc.at("b").get<double>();
    size_t total = 0;
    for (const auto& [id, len] : doc.at("doc_lengths").items()) {
        index.doc_lengths[id] = len.get<size_t>();
        total += len.get<size_t>();
    }
    for (const auto& [term, entries] : doc.at("postings").items()) {
        auto& posting = index.postings[term];
        for (const auto& e : entries) posting.emplace_back(e[0].get<std::string>(), e[1].get<int>());
    }
    index.doc_count = index.doc_lengths.size();
    if (index.doc_count == 0) throw EmptyCorpus("bm25 index has no documents");
    index.avg_doc_length = static_cast<double>(total) / static_cast<double>(index.doc_count);
    return index;
}

void Bm25Index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write bm25 index: " + path);
    out << serialize();
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read bm25 index: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace solmover
