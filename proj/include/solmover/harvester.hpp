#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace solmover {

struct RepoRecord {
    std::string full_name;
    long stars = 0;
    std::set<std::string> languages;
    std::optional<std::string> license_id;
    std::string default_branch = "main";
};

struct HarvestCriteria {
    long min_stars = 50;
    std::string required_language = "Solidity";
    double min_comment_density = 0.05;
    bool permissive_licenses_only = false;
};

// Minimal hosting-API surface: repo search pages, a file tree, raw file
// contents. Implemented over HTTPS for GitHub and over recorded fixture
// files for tests.
class HostingClient {
  public:
    virtual ~HostingClient() = default;
    // One page of search results; empty when past the last page.
    virtual std::vector<RepoRecord> search_page(const HarvestCriteria& criteria, int page) = 0;
    virtual std::vector<std::string> list_paths(const RepoRecord& repo) = 0;
    virtual std::string fetch_file(const RepoRecord& repo, const std::string& path) = 0;
};

class GithubClient : public HostingClient {
  public:
    GithubClient(std::string api_base, std::string token_env);
    std::vector<RepoRecord> search_page(const HarvestCriteria& criteria, int page) override;
    std::vector<std::string> list_paths(const RepoRecord& repo) override;
    std::string fetch_file(const RepoRecord& repo, const std::string& path) override;

  private:
    std::string get(const std::string& path);
    std::string api_base_;
    std::string token_env_;
};

// Replays recorded API responses from a fixture directory:
//   search_page_<n>.json, tree_<owner>__<repo>.json, blobs/<owner>__<repo>/<path>
class FixtureHostingClient : public HostingClient {
  public:
    explicit FixtureHostingClient(std::string dir);
    std::vector<RepoRecord> search_page(const HarvestCriteria& criteria, int page) override;
    std::vector<std::string> list_paths(const RepoRecord& repo) override;
    std::string fetch_file(const RepoRecord& repo, const std::string& path) override;

  private:
    std::string dir_;
};

// Server-side filters re-validated client-side: star floor, language
// tag, and (when enabled) the permissive-license allow list.
std::vector<RepoRecord> query_repos(HostingClient& client, const HarvestCriteria& criteria,
                                    int page_limit);

bool license_is_permissive(const std::string& spdx_id);

// Only `.sol` paths, skipping anything under node_modules/.
std::vector<std::pair<std::string, std::string>> extract_sol_files(HostingClient& client,
                                                                   const RepoRecord& repo);

// Comment characters over total non-whitespace characters, both counted
// with the Solidity scanner's comment spans (delimiters included).
double comment_density(const std::string& content);

struct HarvestedFile {
    std::string repo;
    std::string path;
    std::string content;
    std::optional<std::string> license_id;
};

struct ManifestEntry {
    std::string repo;
    std::string path;
    std::string content_hash;
    double comment_density = 0.0;
    std::optional<std::string> license_id;
    bool quarantined = false;  // failed to re-parse through the frontend
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;  // sorted by (repo, path)
    std::string created_at;
};

CorpusManifest build_manifest(const std::vector<HarvestedFile>& files,
                              const HarvestCriteria& criteria);

void write_manifest(const CorpusManifest& manifest, const std::string& path);
CorpusManifest read_manifest(const std::string& path);

}  // namespace solmover
