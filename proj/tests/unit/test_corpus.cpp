#include <random>

#include "doctest.h"
#include "solmover/bm25.hpp"
#include "solmover/errors.hpp"
#include "solmover/fragments.hpp"
#include "solmover/text.hpp"
#include "support/helpers.hpp"

using namespace solmover;

namespace {

// HTML-walking oracle: counts h1..h6 openers and whether any text
// precedes the first one.
std::pair<int, bool> heading_shape(const std::string& html) {
    int headings = 0;
    bool text_before_first = false;
    bool in_tag = false;
    bool seen_heading = false;
    bool suppressed = false;  // inside title/script/style
    std::string tag;
    for (size_t i = 0; i < html.size(); ++i) {
        char c = html[i];
        if (c == '<') {
            in_tag = true;
            tag.clear();
            continue;
        }
        if (c == '>') {
            in_tag = false;
            if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') {
                ++headings;
                seen_heading = true;
            }
            if (tag == "title" || tag == "script" || tag == "style") suppressed = true;
            if (tag == "/title" || tag == "/script" || tag == "/style") suppressed = false;
            continue;
        }
        if (in_tag) {
            if (tag.size() < 8 && !std::isspace(static_cast<unsigned char>(c)))
                tag.push_back(static_cast<char>(std::tolower(c)));
        } else if (!suppressed && !seen_heading &&
                   !std::isspace(static_cast<unsigned char>(c))) {
            text_before_first = true;
        }
    }
    return {headings, text_before_first};
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("segment on headings") {
    DocPage page{"doc", "<h2>Structs</h2><p>about structs</p><h2>Abilities</h2><p>about abilities</p>",
                 DocOrigin::Textbook};
    auto frags = segment_html(page);
    REQUIRE(frags.size() == 2);
    CHECK(frags[0].heading == "Structs");
    CHECK(frags[0].text == "about structs");
    CHECK(frags[1].heading == "Abilities");
    CHECK(frags[0].seq == 0);
    CHECK(frags[1].seq == 1);
    CHECK(frags[0].id != frags[1].id);
}

TEST_CASE("code routed into snippets, not text") {
    DocPage page{"doc", "<h3>Coins</h3><pre>module coin {}</pre>", DocOrigin::Tutorial};
    auto frags = segment_html(page);
    REQUIRE(frags.size() == 1);
    CHECK(frags[0].heading == "Coins");
    CHECK(frags[0].code_snippets == std::vector<std::string>{"module coin {}"});
    CHECK(frags[0].text.find("module") == std::string::npos);
}

TEST_CASE("nested pre/code yields one snippet; entities decode") {
    DocPage page{"doc",
                 "<h3>T</h3><p>x &amp; y</p><pre><code>a &lt; b</code></pre>",
                 DocOrigin::Tutorial};
    auto frags = segment_html(page);
    REQUIRE(frags.size() == 1);
    CHECK(frags[0].text == "x & y");
    REQUIRE(frags[0].code_snippets.size() == 1);
    CHECK(frags[0].code_snippets[0] == "a < b");
}

TEST_CASE("no headings: one preamble fragment") {
    std::string html = "<p>one</p><p>two</p><p>three</p>";
    auto [headings, has_preamble] = heading_shape(html);
    CHECK(headings == 0);
    CHECK(has_preamble);
    auto frags = segment_html({"doc", html, DocOrigin::Blog});
    REQUIRE(frags.size() == 1);
    CHECK(frags[0].heading == "preamble");
    CHECK(frags[0].text == "one two three");
}

TEST_CASE("preamble takes the page title when present") {
    auto frags = segment_html(
        {"doc", "<head><title>The Move Book</title></head><body><p>intro</p><h1>A</h1><p>x</p></body>",
         DocOrigin::Textbook});
    REQUIRE(frags.size() == 2);
    CHECK(frags[0].heading == "The Move Book");
    CHECK(frags[0].text == "intro");
    CHECK(frags[1].heading == "A");
}

TEST_CASE("fragment count matches the walking oracle on fixture docs") {
    for (const char* name : {"structs.html", "coins.html", "storage.html"}) {
        std::string html = testutil::read_file(testutil::fixtures_dir() + "/docs/" + name);
        auto [headings, preamble] = heading_shape(html);
        auto frags = segment_html({name, html, DocOrigin::Tutorial});
        CHECK(frags.size() == static_cast<size_t>(headings) + (preamble ? 1 : 0));
        size_t snippetless = 0;
        for (const auto& frag : frags)
            if (frag.code_snippets.empty()) ++snippetless;
        CHECK(snippetless <= (preamble ? 1u : 0u));  // every heading section carries code
    }
}

TEST_CASE("empty documents rejected") {
    CHECK_THROWS_AS(segment_html({"doc", "<div></div>", DocOrigin::Blog}), EmptyDocument);
    CHECK_THROWS_AS(segment_html({"doc", "<script>var x=1;</script>", DocOrigin::Blog}),
                    EmptyDocument);
}

TEST_CASE("unclosed tags tolerated") {
    auto frags = segment_html({"doc", "<h2>Open<p>body text", DocOrigin::Blog});
    REQUIRE(frags.size() == 1);
    CHECK(frags[0].heading == "Open");
    CHECK(frags[0].text == "body text");
}

TEST_CASE("chunking: 100 tokens at width 40 gives 40/40/20") {
    Fragment frag;
    frag.source_id = "doc";
    frag.seq = 3;
    frag.heading = "H";
    frag.code_snippets = {"snippet"};
    for (int i = 0; i < 100; ++i) frag.text += (i ? " tok" : "tok") + std::to_string(i);
    frag.id = make_fragment_id("doc", 3, 0, frag.text);

    auto chunks = chunk_fragment(frag, 40);
    REQUIRE(chunks.size() == 3);
    CHECK(count_whitespace_tokens(chunks[0].text) == 40);
    CHECK(count_whitespace_tokens(chunks[1].text) == 40);
    CHECK(count_whitespace_tokens(chunks[2].text) == 20);
    CHECK(chunks[0].sub == 1);
    CHECK(chunks[2].sub == 3);
    for (const auto& c : chunks) {
        CHECK(c.heading == "H");
        CHECK(c.code_snippets == frag.code_snippets);
        CHECK(c.seq == 3);
    }
    CHECK(chunks[0].text + chunks[1].text + chunks[2].text == frag.text);
}

TEST_CASE("chunking a short fragment is the identity") {
    Fragment frag;
    frag.source_id = "doc";
    frag.text = "just ten tokens of text in this tiny fragment here";
    frag.id = make_fragment_id("doc", 0, 0, frag.text);
    auto chunks = chunk_fragment(frag, 40);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].text == frag.text);
    CHECK(chunks[0].id == frag.id);
    CHECK_THROWS_AS(chunk_fragment(frag, 8), Error);  // width floor
}

TEST_CASE("chunk round-trip property on random fragments") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> tokens(0, 300);
    std::uniform_int_distribution<int> width(16, 64);
    std::uniform_int_distribution<int> wordlen(1, 9);
    for (int round = 0; round < 40; ++round) {
        Fragment frag;
        frag.source_id = "rand";
        frag.seq = round;
        int n = tokens(rng);
        for (int i = 0; i < n; ++i) {
            frag.text += std::string(static_cast<size_t>(wordlen(rng)), 'a' + (i % 26));
            frag.text += (i % 7 == 0) ? "\n" : " ";
        }
        size_t w = static_cast<size_t>(width(rng));
        auto chunks = chunk_fragment(frag, w);
        std::string joined;
        for (const auto& c : chunks) {
            joined += c.text;
            CHECK(count_whitespace_tokens(c.text) <= w);
        }
        CHECK(joined == frag.text);
    }
}

TEST_CASE("store lookup and serialization round-trip") {
    auto frags = segment_html(
        {"doc", testutil::read_file(testutil::fixtures_dir() + "/docs/structs.html"),
         DocOrigin::Textbook});
    FragmentStore store(frags);
    CHECK(store.size() == frags.size());
    CHECK(store.find(frags[1].id)->heading == frags[1].heading);
    CHECK(store.find("no-such-id") == nullptr);

    std::string blob = store.serialize();
    FragmentStore reloaded = FragmentStore::deserialize(blob);
    CHECK(reloaded.serialize() == blob);
    CHECK(reloaded.size() == store.size());

    SUBCASE("version mismatch rejected") {
        std::string tampered = blob;
        auto pos = tampered.find("\"format_version\": 1");
        REQUIRE(pos != std::string::npos);
        tampered.replace(pos, 19, "\"format_version\": 9");
        CHECK_THROWS_AS(FragmentStore::deserialize(tampered), FormatVersionMismatch);
    }
}

TEST_CASE("segment/chunk/index pipeline is deterministic") {
    auto build = [] {
        std::vector<Fragment> all;
        for (const char* name : {"structs.html", "coins.html", "storage.html"}) {
            auto page = DocPage{name, testutil::read_file(testutil::fixtures_dir() +
                                                          std::string("/docs/") + name),
                                DocOrigin::Tutorial};
            for (const auto& seg : segment_html(page))
                for (auto& chunk : chunk_fragment(seg, 16)) all.push_back(chunk);
        }
        FragmentStore store(all);
        Bm25Index index = build_bm25_index(all, 1.2, 0.75);
        return store.serialize() + "\x1e" + index.serialize();
    };
    CHECK(build() == build());
}

TEST_CASE("docs manifest parsing") {
    auto entries = read_docs_manifest(testutil::fixtures_dir() + "/docs/manifest.ndjson");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].source_id == "move-book-structs");
    CHECK(entries[0].origin == DocOrigin::Textbook);
    CHECK(entries[2].origin == DocOrigin::Blog);
}

}  // TEST_SUITE
