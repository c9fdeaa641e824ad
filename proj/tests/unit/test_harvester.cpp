#include "doctest.h"
#include "solmover/errors.hpp"
#include "solmover/harvester.hpp"
#include "support/helpers.hpp"

using namespace solmover;

TEST_SUITE("harvester") {

TEST_CASE("star floor and language tag filter the search results") {
    FixtureHostingClient client(testutil::fixtures_dir() + "/github");
    HarvestCriteria criteria;  // min_stars 50, Solidity
    auto repos = query_repos(client, criteria, 3);
    REQUIRE(repos.size() == 2);
    CHECK(repos[0].full_name == "bravo/tokens");   // exactly 50 stars accepted
    CHECK(repos[1].full_name == "charlie/defi");   // 120 stars, multi-language
    // alpha/lowstar (49) and delta/rustonly (no Solidity tag) are gone

    SUBCASE("license allow-list applies when enabled") {
        criteria.permissive_licenses_only = true;
        auto permissive = query_repos(client, criteria, 3);
        CHECK(permissive.size() == 2);  // MIT and Apache-2.0 both pass
        CHECK(license_is_permissive("MIT"));
        CHECK(license_is_permissive("Apache-2.0"));
        CHECK_FALSE(license_is_permissive("GPL-3.0"));
    }
    SUBCASE("raising the floor rejects the 50-star repo") {
        criteria.min_stars = 51;
        auto repos51 = query_repos(client, criteria, 3);
        REQUIRE(repos51.size() == 1);
        CHECK(repos51[0].full_name == "charlie/defi");
    }
    SUBCASE("empty search pages end pagination") {
        CHECK(query_repos(client, criteria, 0).empty());
    }
}

TEST_CASE("only .sol files outside node_modules are extracted") {
    FixtureHostingClient client(testutil::fixtures_dir() + "/github");
    RepoRecord bravo;
    bravo.full_name = "bravo/tokens";
    auto files = extract_sol_files(client, bravo);
    REQUIRE(files.size() == 1);
    CHECK(files[0].first == "a.sol");
    CHECK(files[0].second.find("contract FixtureToken") != std::string::npos);
}

TEST_CASE("comment density boundaries") {
    CHECK(comment_density("// only a comment\n/* and a block */") == doctest::Approx(1.0));
    CHECK(comment_density("contract A { uint x; }") == doctest::Approx(0.0));
    CHECK(comment_density("") == doctest::Approx(0.0));

    SUBCASE("50 comment chars in 500 non-whitespace chars is exactly 0.1") {
        std::string comment = "//" + std::string(48, 'c');  // 50 non-ws chars with delimiters
        std::string code(450, 'x');
        std::string content = comment + "\n" + code;

        // character-count oracle
        size_t non_ws = 0;
        for (char c : content)
            if (!std::isspace(static_cast<unsigned char>(c))) ++non_ws;
        REQUIRE(non_ws == 500);

        CHECK(comment_density(content) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("string literals containing slashes are not comments") {
        CHECK(comment_density("contract A { string s = \"// nope\"; }") == doctest::Approx(0.0));
    }
}

TEST_CASE("manifest building: density filter, dedup, sorting, quarantine") {
    std::string commented =
        "// a well commented contract explaining everything about it\n"
        "// with a second line of commentary for density\n"
        "contract C { function f() public {} }";
    std::string bare = "contract D { uint x; }";
    std::string broken = "// just a comment, nothing parseable behind it\n#pragma once\nint y;";

    std::vector<HarvestedFile> files = {
        {"zeta/repo", "b.sol", commented, std::string("MIT")},
        {"alpha/repo", "a.sol", commented, std::string("MIT")},   // duplicate content
        {"alpha/repo", "low.sol", bare, std::string("MIT")},      // density 0
        {"alpha/repo", "odd.sol", broken, std::string("MIT")},
    };
    HarvestCriteria criteria;
    auto manifest = build_manifest(files, criteria);

    REQUIRE(manifest.entries.size() == 2);
    // sorted by (repo, path); duplicate resolved to the first in sort order
    CHECK(manifest.entries[0].repo == "alpha/repo");
    CHECK(manifest.entries[0].path == "a.sol");
    CHECK_FALSE(manifest.entries[0].quarantined);
    CHECK(manifest.entries[1].path == "odd.sol");
    CHECK(manifest.entries[1].quarantined);  // fails to re-parse, flagged not dropped
    CHECK(!manifest.created_at.empty());

    SUBCASE("density threshold excludes borderline files") {
        CHECK(comment_density(bare) < criteria.min_comment_density);
        for (const auto& entry : manifest.entries) CHECK(entry.path != "low.sol");
    }
    SUBCASE("manifest io round-trip") {
        testutil::TempDir tmp;
        std::string path = (tmp / "manifest.ndjson").string();
        write_manifest(manifest, path);
        auto back = read_manifest(path);
        REQUIRE(back.entries.size() == manifest.entries.size());
        CHECK(back.created_at == manifest.created_at);
        CHECK(back.entries[0].content_hash == manifest.entries[0].content_hash);
        CHECK(back.entries[1].quarantined);
    }
    SUBCASE("empty input yields an empty manifest with a timestamp") {
        auto empty = build_manifest({}, criteria);
        CHECK(empty.entries.empty());
        CHECK(!empty.created_at.empty());
    }
}

TEST_CASE("fixture harvest end to end deduplicates across repos") {
    FixtureHostingClient client(testutil::fixtures_dir() + "/github");
    HarvestCriteria criteria;
    auto repos = query_repos(client, criteria, 3);
    std::vector<HarvestedFile> files;
    for (const auto& repo : repos) {
        for (auto& [path, content] : extract_sol_files(client, repo)) {
            files.push_back({repo.full_name, path, content, repo.license_id});
        }
    }
    // bravo/a.sol, charlie/token.sol (identical bytes), charlie/pool.sol (low density)
    REQUIRE(files.size() == 3);
    auto manifest = build_manifest(files, criteria);
    REQUIRE(manifest.entries.size() == 1);
    CHECK(manifest.entries[0].repo == "bravo/tokens");
    CHECK(manifest.entries[0].path == "a.sol");
    CHECK(manifest.entries[0].comment_density >= criteria.min_comment_density);
}

}  // TEST_SUITE
