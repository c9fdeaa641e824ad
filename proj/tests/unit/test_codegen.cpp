#include <algorithm>
#include <random>

#include "doctest.h"
#include "solmover/codegen.hpp"
#include "solmover/errors.hpp"
#include "support/helpers.hpp"

using namespace solmover;

namespace {

CodeChunk chunk_of(size_t index, const std::string& code) {
    return {index, code, "```move\n" + code + "\n```"};
}

}  // namespace

TEST_SUITE("codegen") {

TEST_CASE("fenced block extraction") {
    CHECK(extract_fenced_block("```move\nmodule m {}\n```") == "module m {}");
    CHECK(extract_fenced_block("prose\n```rust\nlet x;\n```\ntail") == "let x;");
    CHECK(extract_fenced_block("```\nbare fence\n```") == "bare fence");

    SUBCASE("first of two blocks wins") {
        std::string two = "```move\nfirst block\n```\nmiddle\n```move\nsecond block\n```";
        CHECK(extract_fenced_block(two) == "first block");
    }
    SUBCASE("unterminated fence keeps the tail") {
        CHECK(extract_fenced_block("```move\nline one\nline two") == "line one\nline two");
    }
    SUBCASE("no fence at all") {
        CHECK_THROWS_AS(extract_fenced_block("just prose, no code"), NoCodeBlock);
        try {
            extract_fenced_block("still no code");
        } catch (const NoCodeBlock& e) {
            CHECK(e.raw_response == "still no code");
        }
    }
}

TEST_CASE("generate_chunk builds the prompt and extracts the first block") {
    SubTask task;
    task.index = 2;
    task.instruction = "Implement the transfer entry function";
    task.snippet = "public entry fun transfer() {}";

    ReplayBackend llm({"Sure.\n```move\nmodule translation::t {}\n```"});
    auto chunk = generate_chunk(llm, task);
    CHECK(chunk.subtask_index == 2);
    CHECK(chunk.code == "module translation::t {}");
    CHECK(chunk.raw_response.find("Sure.") == 0);

    REQUIRE(llm.captured_prompts().size() == 1);
    const std::string& prompt = llm.captured_prompts()[0];
    CHECK(prompt.find(task.instruction) != std::string::npos);
    CHECK(prompt.find(*task.snippet) != std::string::npos);
    CHECK(prompt.find("fenced code block") != std::string::npos);

    SUBCASE("prose-only response raises NoCodeBlock") {
        ReplayBackend bad({"I would rather explain the approach."});
        CHECK_THROWS_AS(generate_chunk(bad, task), NoCodeBlock);
    }
    SUBCASE("exemplars wrap the generation prompt") {
        ReplayBackend fewshot({"```move\nx\n```"});
        generate_chunk(fewshot, task, {{"example in", "example out"}});
        const std::string& sent = fewshot.captured_prompts()[0];
        CHECK(sent.find("example in") != std::string::npos);
        CHECK(sent.find("example out") != std::string::npos);
    }
}

TEST_CASE("assembly follows the task sequence regardless of arrival order") {
    auto c1 = chunk_of(1, "module a {}");
    auto c2 = chunk_of(2, "module b {\n  fun f() {}\n}");
    auto candidate = assemble({c2, c1});
    CHECK(candidate.move_source == "module a {}\n\nmodule b {\n  fun f() {}\n}");
    CHECK(candidate.revision == 0);
    REQUIRE(candidate.chunks.size() == 2);
    CHECK(candidate.chunks[0].subtask_index == 1);

    SUBCASE("single chunk is the identity") {
        auto single = assemble({c1});
        CHECK(single.move_source == c1.code);
    }
    SUBCASE("duplicate index rejected") {
        CHECK_THROWS_AS(assemble({c1, chunk_of(1, "other")}), DuplicateIndex);
    }
    SUBCASE("empty plan rejected") {
        CHECK_THROWS_AS(assemble({}), EmptyPlan);
    }
}

TEST_CASE("provenance line ranges slice the assembled file back to the chunks") {
    auto c1 = chunk_of(1, "line a1\nline a2");
    auto c3 = chunk_of(3, "line c1");
    auto c7 = chunk_of(7, "line d1\nline d2\nline d3");
    auto candidate = assemble({c7, c1, c3});

    auto lines = [&] {
        std::vector<std::string> out;
        std::string cur;
        for (char c : candidate.move_source) {
            if (c == '\n') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    }();

    size_t prev_end = 0;
    for (const auto& [index, range] : candidate.provenance) {
        CHECK(range.first > prev_end);  // disjoint and ordered
        prev_end = range.second;
        std::string joined;
        for (size_t l = range.first; l <= range.second; ++l) {
            if (!joined.empty()) joined += "\n";
            joined += lines[l - 1];
        }
        for (const auto& chunk : candidate.chunks) {
            if (chunk.subtask_index == index) CHECK(joined == chunk.code);
        }
    }
}

TEST_CASE("assembly is byte-identical under 50 random permutations") {
    std::vector<CodeChunk> base;
    for (size_t i = 1; i <= 6; ++i)
        base.push_back(chunk_of(i, "module m" + std::to_string(i) + " {\n  // body " +
                                       std::to_string(i) + "\n}"));
    std::string reference = assemble(base).move_source;

    std::mt19937 rng(1234);
    for (int round = 0; round < 50; ++round) {
        auto shuffled = base;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto candidate = assemble(shuffled);
        CHECK(candidate.move_source == reference);
        for (size_t i = 0; i < candidate.chunks.size(); ++i)
            CHECK(candidate.chunks[i].subtask_index == i + 1);
    }
}

TEST_CASE("repair returns a whole-file candidate with the next revision") {
    auto candidate = assemble({chunk_of(1, "module broken {}")});
    ReplayBackend llm({"Fixed:\n```move\nmodule fixed {}\n```"});
    auto repaired = repair(llm, candidate, "translation.move:1: error: broken module");
    CHECK(repaired.revision == 1);
    REQUIRE(repaired.chunks.size() == 1);
    CHECK(repaired.move_source == "module fixed {}");

    ReplayBackend llm2({"```move\nmodule fixed2 {}\n```"});
    auto again = repair(llm2, repaired, "another error");
    CHECK(again.revision == 2);

    SUBCASE("empty diagnostics rejected") {
        ReplayBackend idle({"```move\nx\n```"});
        CHECK_THROWS_AS(repair(idle, candidate, "   "), Error);
    }
}

TEST_CASE("repair prompt embeds the current source and every diagnostic line") {
    auto candidate = assemble({chunk_of(1, "module m { fun f() {} }")});
    std::string digest =
        "sources/translation.move:3: unexpected token\nsources/translation.move:9: unbound module";
    ReplayBackend llm({"```move\nmodule m2 {}\n```"});
    repair(llm, candidate, digest);
    REQUIRE(llm.captured_prompts().size() == 1);
    const std::string& prompt = llm.captured_prompts()[0];
    CHECK(prompt.find(candidate.move_source) != std::string::npos);
    CHECK(prompt.find("unexpected token") != std::string::npos);
    CHECK(prompt.find("unbound module") != std::string::npos);
}

}  // TEST_SUITE
