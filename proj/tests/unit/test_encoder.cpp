#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "solmover/encoder.hpp"
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

// Loss value frozen from an arbitrary-precision evaluation of
// ln(1 + e^-10): the Eq. 1 loss for sim+=10 against one zero negative.
constexpr double kLossTenZero = 4.539889921686465e-05;

struct GradCheckInstance {
    Encoder query_encoder;
    Encoder context_encoder;
    ContrastiveBatch batch;
};

GradCheckInstance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<size_t> vocab_size(4, 10);
    std::uniform_int_distribution<size_t> dim(2, 8);
    std::uniform_int_distribution<size_t> text_len(1, 3);
    std::uniform_int_distribution<size_t> n_neg(1, 3);
    std::uniform_real_distribution<double> value(-1.0, 1.0);

    size_t v = vocab_size(rng);
    std::vector<std::string> vocab;
    for (size_t i = 0; i < v; ++i) vocab.push_back("tok" + std::to_string(i));

    GradCheckInstance inst;
    inst.query_encoder = Encoder(vocab, dim(rng));
    inst.context_encoder = Encoder(vocab, inst.query_encoder.dim());
    for (auto& row : inst.query_encoder.rows())
        for (auto& x : row) x = value(rng);
    for (auto& row : inst.context_encoder.rows())
        for (auto& x : row) x = value(rng);

    auto text = [&](size_t salt) {
        std::string out;
        size_t n = text_len(rng);
        for (size_t i = 0; i < n; ++i) {
            if (i) out += " ";
            out += vocab[(salt + i * 3 + rng() % v) % v];
        }
        return out;
    };
    inst.batch.query = text(0);
    inst.batch.positive = text(1);
    size_t negs = n_neg(rng);
    while (inst.batch.negatives.size() < negs) {
        std::string neg = text(2 + inst.batch.negatives.size());
        if (neg != inst.batch.positive) inst.batch.negatives.push_back(neg);
    }
    return inst;
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("encode is the mean of in-vocab rows") {
    Encoder enc({"aa", "bb"}, 2);
    enc.rows()[enc.vocab().at("aa")] = {1.0, 2.0};
    enc.rows()[enc.vocab().at("bb")] = {3.0, 4.0};
    CHECK(enc.encode("aa") == std::vector<double>{1.0, 2.0});
    CHECK(enc.encode("aa bb") == std::vector<double>{2.0, 3.0});
    CHECK(enc.encode("aa aa bb") == std::vector<double>{5.0 / 3, 8.0 / 3});
    CHECK(enc.encode("zz qq") == std::vector<double>{0.0, 0.0});  // all OOV
    CHECK(enc.encode("aa zz") == std::vector<double>{1.0, 2.0});  // OOV ignored
}

TEST_CASE("sim is the dot product") {
    CHECK(sim({1, 0}, {0, 1}) == 0.0);
    CHECK(sim({1, 2}, {3, 4}) == 11.0);
    std::vector<double> v{1.5, -2.0, 0.5};
    CHECK(sim(v, v) == doctest::Approx(1.5 * 1.5 + 4.0 + 0.25));
    CHECK_THROWS_AS(sim({1, 2}, {1, 2, 3}), DimensionMismatch);
}

TEST_CASE("loss closed forms at equal similarities") {
    Encoder zq({"qa"}, 3);
    Encoder zc({"ca", "cb", "cc", "cd"}, 3);
    ContrastiveBatch one{"qa", "ca", {"cb"}};
    CHECK(contrastive_loss(one, zq, zc) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    ContrastiveBatch three{"qa", "ca", {"cb", "cc", "cd"}};
    CHECK(contrastive_loss(three, zq, zc) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("loss for a well-separated positive matches the frozen oracle value") {
    // Single-token texts make encode return the raw rows: pick rows so
    // sim(q, c+) = 10 and sim(q, c-) = 0.
    Encoder q({"qq"}, 2);
    Encoder c({"pos", "neg"}, 2);
    q.rows()[q.vocab().at("qq")] = {10.0, 0.0};
    c.rows()[c.vocab().at("pos")] = {1.0, 0.0};
    c.rows()[c.vocab().at("neg")] = {0.0, 1.0};
    ContrastiveBatch batch{"qq", "pos", {"neg"}};
    CHECK(contrastive_loss(batch, q, c) == doctest::Approx(kLossTenZero).epsilon(1e-9));
}

TEST_CASE("loss is invariant under a constant shift of all similarities") {
    // Extra dimension: query carries 1, contexts carry the offset c, so
    // every similarity moves by exactly c.
    for (double offset : {0.0, 3.5, -200.0, 700.0}) {
        Encoder q2({"qq"}, 3);
        Encoder c2({"pos", "nega", "negb"}, 3);
        q2.rows()[q2.vocab().at("qq")] = {0.8, -0.3, 1.0};
        c2.rows()[c2.vocab().at("pos")] = {0.5, 0.1, offset};
        c2.rows()[c2.vocab().at("nega")] = {-0.2, 0.9, offset};
        c2.rows()[c2.vocab().at("negb")] = {0.3, 0.3, offset};

        Encoder q0 = q2;
        Encoder c0 = c2;
        c0.rows()[c0.vocab().at("pos")][2] = 0;
        c0.rows()[c0.vocab().at("nega")][2] = 0;
        c0.rows()[c0.vocab().at("negb")][2] = 0;

        ContrastiveBatch batch{"qq", "pos", {"nega", "negb"}};
        double base = contrastive_loss(batch, q0, c0);
        double shifted = contrastive_loss(batch, q2, c2);
        CHECK(shifted == doctest::Approx(base).epsilon(1e-9));
        CHECK(base >= 0.0);
    }
}

TEST_CASE("batch invariants enforced") {
    Encoder q({"q"}, 2);
    Encoder c({"x", "y"}, 2);
    CHECK_THROWS_AS(contrastive_loss({"q", "x", {}}, q, c), Error);
    CHECK_THROWS_AS(contrastive_loss({"q", "x", {"x"}}, q, c), Error);
}

TEST_CASE("training starts at ln(1+m) and pushes the positive up") {
    ContrastiveBatch batch{"q1", "p1", {"n1", "n2"}};

    // Exactly zero matrices sit on the symmetric point: loss is ln(1+m).
    Encoder zq({"q1"}, 4);
    Encoder zc({"p1", "n1", "n2"}, 4);
    CHECK(train_step(batch, zq, zc, 0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    // The bilinear score needs a nonzero start for gradients to flow.
    Encoder q = Encoder::random({"q1"}, 4, 21);
    Encoder c = Encoder::random({"p1", "n1", "n2"}, 4, 22);
    double first = train_step(batch, q, c, 0.5);
    double last = first;
    for (int i = 0; i < 20; ++i) last = train_step(batch, q, c, 0.5);
    CHECK(last < first);
    auto qv = q.encode("q1");
    CHECK(sim(qv, c.encode("p1")) > sim(qv, c.encode("n1")));
    CHECK(sim(qv, c.encode("p1")) > sim(qv, c.encode("n2")));
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(424242);
    const double eps = 1e-5;
    for (int round = 0; round < 20; ++round) {
        auto inst = random_instance(rng);
        CAPTURE(round);

        // Analytic gradient recovered from one unit-lr step.
        Encoder q_after = inst.query_encoder;
        Encoder c_after = inst.context_encoder;
        train_step(inst.batch, q_after, c_after, 1.0);

        double max_rel = 0.0;
        auto check_matrix = [&](const Encoder& before, const Encoder& after, bool is_query) {
            for (size_t r = 0; r < before.rows().size(); ++r) {
                for (size_t d = 0; d < before.dim(); ++d) {
                    double analytic = before.rows()[r][d] - after.rows()[r][d];
                    Encoder q_plus = inst.query_encoder;
                    Encoder c_plus = inst.context_encoder;
                    Encoder q_minus = inst.query_encoder;
                    Encoder c_minus = inst.context_encoder;
                    (is_query ? q_plus : c_plus).rows()[r][d] += eps;
                    (is_query ? q_minus : c_minus).rows()[r][d] -= eps;
                    double fd = (contrastive_loss(inst.batch, q_plus, c_plus) -
                                 contrastive_loss(inst.batch, q_minus, c_minus)) /
                                (2 * eps);
                    double rel = std::fabs(analytic - fd) /
                                 std::max({std::fabs(analytic), std::fabs(fd), 1.0});
                    max_rel = std::max(max_rel, rel);
                }
            }
        };
        check_matrix(inst.query_encoder, q_after, true);
        check_matrix(inst.context_encoder, c_after, false);
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("dense search is an exhaustive exact ranking") {
    std::mt19937_64 rng(11);
    std::vector<Fragment> frags;
    static const char* words[] = {"alpha", "beta", "gamma", "delta", "omega"};
    for (int i = 0; i < 200; ++i) {
        std::string text;
        for (int t = 0; t < 4; ++t) {
            if (t) text += " ";
            text += words[rng() % 5];
        }
        frags.push_back(make_frag("dense", i, text));
    }
    FragmentStore store(frags);
    std::vector<std::string> vocab(words, words + 5);
    Encoder q = Encoder::random(vocab, 6, 1);
    Encoder c = Encoder::random(vocab, 6, 2);

    std::string query = "alpha omega";
    auto ranked = search_dense(q, c, store, query, store.size());
    REQUIRE(ranked.size() == store.size());

    // brute-force dot-product scan
    auto qv = q.encode(query);
    std::vector<ScoredFragment> expected;
    for (const auto& f : frags) expected.push_back({f.id, sim(qv, c.encode(index_text(f)))});
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fragment_id < b.fragment_id;
    });
    std::set<std::string> seen;
    for (size_t i = 0; i < ranked.size(); ++i) {
        CHECK(ranked[i].fragment_id == expected[i].fragment_id);
        CHECK(ranked[i].score == expected[i].score);
        seen.insert(ranked[i].fragment_id);
    }
    CHECK(seen.size() == store.size());  // a permutation of all ids

    auto top3 = search_dense(q, c, store, query, 3);
    REQUIRE(top3.size() == 3);
    CHECK(top3[0].fragment_id == ranked[0].fragment_id);
}

TEST_CASE("hard negative mining matches the brute-force ranking") {
    std::mt19937_64 rng(5150);
    static const char* words[] = {"move", "coin", "mint", "table", "vector", "entry"};
    for (int round = 0; round < 50; ++round) {
        CAPTURE(round);
        std::uniform_int_distribution<size_t> n_frags(4, 24);
        size_t n = n_frags(rng);
        std::vector<Fragment> frags;
        for (size_t i = 0; i < n; ++i) {
            std::string text = "doc" + std::to_string(i);  // unique anchor keeps texts distinct
            size_t extra = rng() % 6;
            for (size_t t = 0; t < extra; ++t) text += std::string(" ") + words[rng() % 6];
            frags.push_back(make_frag("hn", static_cast<int>(i), text));
        }
        FragmentStore store(frags);
        auto index = build_bm25_index(frags, 1.2, 0.75);

        std::string prompt;
        size_t plen = 1 + rng() % 4;
        for (size_t t = 0; t < plen; ++t) prompt += std::string(t ? " " : "") + words[rng() % 6];

        std::set<std::string> positives;
        size_t n_pos = 1 + rng() % 2;
        while (positives.size() < n_pos) positives.insert(frags[rng() % n].id);
        size_t m = 1 + rng() % (n - n_pos);

        // brute-force: score every non-positive with the index formula
        std::vector<ScoredFragment> scored;
        for (const auto& f : frags) {
            if (positives.count(f.id)) continue;
            scored.push_back({f.id, bm25_score(index, index_tokens(prompt), f.id)});
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.fragment_id < b.fragment_id;
        });
        std::vector<std::string> expected;
        for (size_t i = 0; i < m; ++i) expected.push_back(store.find(scored[i].fragment_id)->text);

        auto mined = mine_in_file_hard_negatives(prompt, index, store, positives, m);
        CHECK(mined == expected);
    }
}

TEST_CASE("hard negative mining edge cases") {
    std::vector<Fragment> frags;
    for (int i = 0; i < 4; ++i) frags.push_back(make_frag("e", i, "text " + std::to_string(i)));
    FragmentStore store(frags);
    auto index = build_bm25_index(frags, 1.2, 0.75);

    CHECK_THROWS_AS(
        mine_in_file_hard_negatives("text", index, store, {frags[0].id}, 4),
        InsufficientCorpus);

    // zero term overlap: any m non-positives, tie broken by id
    auto mined = mine_in_file_hard_negatives("zzz qqq", index, store, {frags[0].id}, 2);
    std::vector<std::string> ids;
    for (size_t i = 1; i < frags.size(); ++i) ids.push_back(frags[i].id);
    std::sort(ids.begin(), ids.end());
    CHECK(mined == std::vector<std::string>{store.find(ids[0])->text, store.find(ids[1])->text});
}

TEST_CASE("encoder serialization round-trip and validation") {
    Encoder enc = Encoder::random({"aa", "bb", "cc"}, 4, 9);
    std::string blob = enc.serialize();
    Encoder back = Encoder::deserialize(blob);
    CHECK(back.serialize() == blob);
    CHECK(back.encode("aa bb") == enc.encode("aa bb"));

    std::string tampered = blob;
    auto pos = tampered.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 18, "\"format_version\":3");
    CHECK_THROWS_AS(Encoder::deserialize(tampered), FormatVersionMismatch);
}

}  // TEST_SUITE
