#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "solmover/bm25.hpp"
#include "solmover/errors.hpp"
#include "solmover/text.hpp"
#include "support/helpers.hpp"

using namespace solmover;

namespace {

Fragment make_frag(const std::string& source, int seq, const std::string& text) {
    Fragment f;
    f.source_id = source;
    f.seq = seq;
    f.text = text;
    f.id = make_fragment_id(source, seq, 0, text);
    return f;
}

// Brute-force per-fragment Okapi evaluation, recomputing every statistic
// from the fragment list itself. Shares nothing with Bm25Index.
std::vector<ScoredFragment> oracle_search(const std::vector<Fragment>& frags,
                                          const std::vector<std::string>& query, double k1,
                                          double b, size_t k) {
    std::map<std::string, std::vector<std::string>> doc_tokens;
    double total_len = 0;
    for (const auto& f : frags) {
        doc_tokens[f.id] = index_tokens(index_text(f));
        total_len += static_cast<double>(doc_tokens[f.id].size());
    }
    double n_docs = static_cast<double>(frags.size());
    double avgdl = total_len / n_docs;

    auto docs_with = [&](const std::string& term) {
        double n = 0;
        for (const auto& [id, toks] : doc_tokens)
            if (std::count(toks.begin(), toks.end(), term) > 0) n += 1;
        return n;
    };

    std::vector<ScoredFragment> out;
    for (const auto& f : frags) {
        const auto& toks = doc_tokens[f.id];
        double dl = static_cast<double>(toks.size());
        double score = 0;
        bool any = false;
        for (const auto& term : query) {
            double tf = static_cast<double>(std::count(toks.begin(), toks.end(), term));
            if (tf == 0) continue;
            any = true;
            double n_t = docs_with(term);
            double idf = std::log((n_docs - n_t + 0.5) / (n_t + 0.5) + 1.0);
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if (any) out.push_back({f.id, score});
    }
    std::sort(out.begin(), out.end(), [](const ScoredFragment& a, const ScoredFragment& b2) {
        if (a.score != b2.score) return a.score > b2.score;
        return a.fragment_id < b2.fragment_id;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

std::vector<Fragment> random_corpus(std::mt19937& rng, size_t n) {
    static const char* vocab[] = {"move",  "module", "coin",   "struct", "ability", "signer",
                                  "table", "vector", "borrow", "global", "entry",   "script",
                                  "mint",  "burn",   "event",  "field"};
    std::uniform_int_distribution<int> len(2, 24);
    std::uniform_int_distribution<int> pick(0, 15);
    std::vector<Fragment> frags;
    for (size_t i = 0; i < n; ++i) {
        std::string text;
        int n_tokens = len(rng);
        for (int t = 0; t < n_tokens; ++t) {
            if (t) text += " ";
            text += vocab[pick(rng)];
        }
        frags.push_back(make_frag("rand", static_cast<int>(i), text));
    }
    return frags;
}

}  // namespace

TEST_SUITE("bm25") {

TEST_CASE("hand-countable index statistics") {
    std::vector<Fragment> frags = {make_frag("d", 0, "move module"), make_frag("d", 1, "module coin")};
    auto index = build_bm25_index(frags, 1.2, 0.75);
    CHECK(index.doc_count == 2);
    CHECK(index.avg_doc_length == doctest::Approx(2.0));
    REQUIRE(index.postings.count("module") == 1);
    CHECK(index.postings["module"].size() == 2);
    CHECK(index.postings["move"].size() == 1);
    CHECK(index.doc_lengths[frags[0].id] == 2);

    SUBCASE("hand-computed score for the shared term") {
        auto hits = search_bm25(index, {"module"}, 10);
        REQUIRE(hits.size() == 2);
        // idf = ln((2-2+0.5)/(2+0.5)+1) = ln(1.2); equal lengths make the
        // tf part collapse to (k1+1)/(1+k1), so score = idf exactly.
        double expected = std::log(1.2);
        CHECK(hits[0].score == doctest::Approx(expected).epsilon(1e-12));
        CHECK(hits[1].score == doctest::Approx(expected).epsilon(1e-12));
        // tie broken by ascending id
        CHECK(hits[0].fragment_id < hits[1].fragment_id);
    }

    SUBCASE("k = 1 returns the argmax fragment") {
        auto hits = search_bm25(index, {"coin"}, 1);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].fragment_id == frags[1].id);
    }

    SUBCASE("no term overlap yields an empty result") {
        CHECK(search_bm25(index, {"nonexistent"}, 5).empty());
        CHECK(search_bm25(index, {}, 5).empty());
    }
}

TEST_CASE("duplicate fragment texts stay distinct") {
    std::vector<Fragment> frags = {make_frag("d", 0, "coin coin"), make_frag("d", 1, "coin coin")};
    CHECK(frags[0].id != frags[1].id);
    auto index = build_bm25_index(frags, 1.2, 0.75);
    CHECK(index.doc_count == 2);
    CHECK(search_bm25(index, {"coin"}, 10).size() == 2);
}

TEST_CASE("doc lengths match an independent recount") {
    std::mt19937 rng(7);
    auto frags = random_corpus(rng, 50);
    auto index = build_bm25_index(frags, 1.2, 0.75);
    size_t total = 0;
    for (const auto& f : frags) {
        size_t n = index_tokens(index_text(f)).size();
        CHECK(index.doc_lengths[f.id] == n);
        total += n;
    }
    CHECK(index.avg_doc_length == doctest::Approx(static_cast<double>(total) / 50.0));
}

TEST_CASE("build preconditions") {
    CHECK_THROWS_AS(build_bm25_index({}, 1.2, 0.75), EmptyCorpus);
    auto frag = make_frag("d", 0, "x y");
    CHECK_THROWS_AS(build_bm25_index({frag}, 0.0, 0.75), Error);
    CHECK_THROWS_AS(build_bm25_index({frag}, 1.2, 1.5), Error);
}

TEST_CASE("ranking and scores match the brute-force oracle") {
    std::mt19937 rng(20240518);
    auto frags = random_corpus(rng, 50);
    auto index = build_bm25_index(frags, 1.2, 0.75);

    static const char* vocab[] = {"move", "module", "coin", "struct", "ability", "signer",
                                  "table", "vector", "borrow", "global", "entry", "script",
                                  "mint", "burn", "event", "field", "missing"};
    std::uniform_int_distribution<int> qlen(1, 4);
    std::uniform_int_distribution<int> pick(0, 16);
    for (int round = 0; round < 100; ++round) {
        std::vector<std::string> query;
        int n = qlen(rng);
        for (int t = 0; t < n; ++t) query.push_back(vocab[pick(rng)]);
        auto expected = oracle_search(frags, query, 1.2, 0.75, 10);
        auto actual = search_bm25(index, query, 10);
        REQUIRE(actual.size() == expected.size());
        for (size_t i = 0; i < actual.size(); ++i) {
            CHECK(actual[i].fragment_id == expected[i].fragment_id);
            CHECK(actual[i].score ==
                  doctest::Approx(expected[i].score).epsilon(1e-9));
        }
    }
}

TEST_CASE("serialization round-trip preserves scores byte-for-byte") {
    std::mt19937 rng(3);
    auto frags = random_corpus(rng, 20);
    auto index = build_bm25_index(frags, 1.4, 0.6);
    std::string blob = index.serialize();
    auto reloaded = Bm25Index::deserialize(blob);
    CHECK(reloaded.serialize() == blob);
    CHECK(reloaded.k1 == index.k1);
    CHECK(reloaded.doc_count == index.doc_count);
    auto a = search_bm25(index, {"coin", "move"}, 5);
    auto b = search_bm25(reloaded, {"coin", "move"}, 5);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].fragment_id == b[i].fragment_id);
        CHECK(a[i].score == b[i].score);
    }
    std::string tampered = blob;
    auto pos = tampered.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 19, "\"format_version\": 2");
    CHECK_THROWS_AS(Bm25Index::deserialize(tampered), FormatVersionMismatch);
}

}  // TEST_SUITE
