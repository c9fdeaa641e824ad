#include "solmover/harvester.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"
#include "solmover/errors.hpp"
#include "solmover/solidity.hpp"
#include "solmover/text.hpp"

namespace solmover {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RepoRecord repo_from_json(const json& j) {
    RepoRecord repo;
    repo.full_name = j.at("full_name").get<std::string>();
    repo.stars = j.value("stargazers_count", 0L);
    if (j.contains("languages")) {
        for (const auto& lang : j["languages"]) repo.languages.insert(lang.get<std::string>());
    }
    if (j.contains("language") && j["language"].is_string()) {
        repo.languages.insert(j["language"].get<std::string>());
    }
    if (j.contains("license") && j["license"].is_object() && j["license"].contains("spdx_id")) {
        repo.license_id = j["license"]["spdx_id"].get<std::string>();
    }
    repo.default_branch = j.value("default_branch", std::string("main"));
    return repo;
}

std::vector<RepoRecord> repos_from_search_json(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ApiError(std::string("unparseable search response: ") + e.what());
    }
    std::vector<RepoRecord> repos;
    for (const auto& item : doc.value("items", json::array())) repos.push_back(repo_from_json(item));
    return repos;
}

std::vector<std::string> paths_from_tree_json(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ApiError(std::string("unparseable tree response: ") + e.what());
    }
    std::vector<std::string> paths;
    for (const auto& node : doc.value("tree", json::array())) {
        if (node.value("type", std::string()) == "blob")
            paths.push_back(node.at("path").get<std::string>());
    }
    return paths;
}

std::string sanitize_repo_name(const std::string& full_name) {
    std::string out = full_name;
    std::replace(out.begin(), out.end(), '/', '_');
    return out;
}

bool under_node_modules(const std::string& path) {
    return path.rfind("node_modules/", 0) == 0 ||
           path.find("/node_modules/") != std::string::npos;
}

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

GithubClient::GithubClient(std::string api_base, std::string token_env)
    : api_base_(std::move(api_base)), token_env_(std::move(token_env)) {
    if (api_base_.empty()) api_base_ = "https://api.github.com";
}

std::string GithubClient::get(const std::string& path) {
    httplib::Client client(api_base_);
    client.set_follow_location(true);
    httplib::Headers headers{{"Accept", "application/vnd.github+json"},
                             {"User-Agent", "solmover-harvester"}};
    if (!token_env_.empty()) {
        if (const char* token = std::getenv(token_env_.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = client.Get(path, headers);
    if (!res) throw ApiError("api request failed: " + path);
    if (res->status == 403 || res->status == 429) {
        int retry_after = 60;
        if (res->has_header("Retry-After"))
            retry_after = std::atoi(res->get_header_value("Retry-After").c_str());
        throw RateLimited("rate limited on " + path, retry_after);
    }
    if (res->status != 200)
        throw ApiError("api status " + std::to_string(res->status) + " for " + path);
    return res->body;
}

std::vector<RepoRecord> GithubClient::search_page(const HarvestCriteria& criteria, int page) {
    std::string q = "language:" + criteria.required_language +
                    "+stars:%3E=" + std::to_string(criteria.min_stars);
    return repos_from_search_json(get("/search/repositories?q=" + q +
                                      "&per_page=50&page=" + std::to_string(page)));
}

std::vector<std::string> GithubClient::list_paths(const RepoRecord& repo) {
    return paths_from_tree_json(get("/repos/" + repo.full_name + "/git/trees/" +
                                    repo.default_branch + "?recursive=1"));
}

std::string GithubClient::fetch_file(const RepoRecord& repo, const std::string& path) {
    httplib::Client client("https://raw.githubusercontent.com");
    client.set_follow_location(true);
    auto res = client.Get("/" + repo.full_name + "/" + repo.default_branch + "/" + path);
    if (!res || res->status != 200)
        throw ApiError("cannot fetch " + repo.full_name + "/" + path);
    return res->body;
}

FixtureHostingClient::FixtureHostingClient(std::string dir) : dir_(std::move(dir)) {}

std::vector<RepoRecord> FixtureHostingClient::search_page(const HarvestCriteria&, int page) {
    fs::path file = fs::path(dir_) / ("search_page_" + std::to_string(page) + ".json");
    if (!fs::exists(file)) return {};
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return repos_from_search_json(ss.str());
}

std::vector<std::string> FixtureHostingClient::list_paths(const RepoRecord& repo) {
    fs::path file = fs::path(dir_) / ("tree_" + sanitize_repo_name(repo.full_name) + ".json");
    std::ifstream in(file);
    if (!in) throw ApiError("no tree fixture for " + repo.full_name);
    std::stringstream ss;
    ss << in.rdbuf();
    return paths_from_tree_json(ss.str());
}

std::string FixtureHostingClient::fetch_file(const RepoRecord& repo, const std::string& path) {
    fs::path file = fs::path(dir_) / "blobs" / sanitize_repo_name(repo.full_name) / path;
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ApiError("no blob fixture for " + repo.full_name + "/" + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool license_is_permissive(const std::string& spdx_id) {
    static const std::unordered_set<std::string> allowed = {
        "MIT", "Apache-2.0", "BSD-2-Clause", "BSD-3-Clause", "ISC", "Unlicense", "0BSD"};
    return allowed.count(spdx_id) > 0;
}

std::vector<RepoRecord> query_repos(HostingClient& client, const HarvestCriteria& criteria,
                                    int page_limit) {
    std::vector<RepoRecord> accepted;
    for (int page = 1; page <= page_limit; ++page) {
        auto repos = client.search_page(criteria, page);
        if (repos.empty()) break;
        for (auto& repo : repos) {
            if (repo.stars < criteria.min_stars) continue;
            if (!repo.languages.count(criteria.required_language)) continue;
            if (criteria.permissive_licenses_only &&
                (!repo.license_id || !license_is_permissive(*repo.license_id)))
                continue;
            accepted.push_back(std::move(repo));
        }
    }
    return accepted;
}

std::vector<std::pair<std::string, std::string>> extract_sol_files(HostingClient& client,
                                                                   const RepoRecord& repo) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& path : client.list_paths(repo)) {
        if (path.size() < 4 || path.substr(path.size() - 4) != ".sol") continue;
        if (under_node_modules(path)) continue;
        files.emplace_back(path, client.fetch_file(repo, path));
    }
    return files;
}

double comment_density(const std::string& content) {
    auto spans = comment_spans(content);
    size_t comment_chars = 0;
    for (const auto& [start, end] : spans) {
        for (size_t i = start; i < end; ++i) {
            if (!std::isspace(static_cast<unsigned char>(content[i]))) ++comment_chars;
        }
    }
    size_t total_chars = 0;
    for (char c : content) {
        if (!std::isspace(static_cast<unsigned char>(c))) ++total_chars;
    }
    if (total_chars == 0) return 0.0;
    return static_cast<double>(comment_chars) / static_cast<double>(total_chars);
}

CorpusManifest build_manifest(const std::vector<HarvestedFile>& files,
                              const HarvestCriteria& criteria) {
    std::vector<const HarvestedFile*> ordered;
    ordered.reserve(files.size());
    for (const auto& f : files) ordered.push_back(&f);
    std::sort(ordered.begin(), ordered.end(), [](const HarvestedFile* a, const HarvestedFile* b) {
        if (a->repo != b->repo) return a->repo < b->repo;
        return a->path < b->path;
    });

    CorpusManifest manifest;
    manifest.created_at = iso8601_now();
    std::unordered_set<std::string> seen_hashes;
    for (const auto* file : ordered) {
        double density = comment_density(file->content);
        if (density < criteria.min_comment_density) continue;
        if (criteria.permissive_licenses_only &&
            (!file->license_id || !license_is_permissive(*file->license_id)))
            continue;
        std::string hash = hash_hex(file->content);
        if (!seen_hashes.insert(hash).second) continue;

        ManifestEntry entry;
        entry.repo = file->repo;
        entry.path = file->path;
        entry.content_hash = hash;
        entry.comment_density = density;
        entry.license_id = file->license_id;
        try {
            parse_source(file->content, file->path);
        } catch (const Error&) {
            entry.quarantined = true;
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_manifest(const CorpusManifest& manifest, const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest: " + path);
    json header;
    header["format_version"] = 1;
    header["type"] = "manifest";
    header["created_at"] = manifest.created_at;
    out << header.dump() << "\n";
    for (const auto& e : manifest.entries) {
        json j;
        j["repo"] = e.repo;
        j["path"] = e.path;
        j["content_hash"] = e.content_hash;
        j["comment_density"] = e.comment_density;
        if (e.license_id) j["license"] = *e.license_id;
        j["quarantined"] = e.quarantined;
        out << j.dump() << "\n";
    }
}

CorpusManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read manifest: " + path);
    CorpusManifest manifest;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        if (first) {
            first = false;
            if (j.value("type", std::string()) == "manifest") {
                if (j.value("format_version", 0) != 1)
                    throw FormatVersionMismatch("manifest format version mismatch");
                manifest.created_at = j.value("created_at", std::string());
                continue;
            }
        }
        ManifestEntry e;
        e.repo = j.at("repo").get<std::string>();
        e.path = j.at("path").get<std::string>();
        e.content_hash = j.at("content_hash").get<std::string>();
        e.comment_density = j.at("comment_density").get<double>();
        if (j.contains("license")) e.license_id = j["license"].get<std::string>();
        e.quarantined = j.value("quarantined", false);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

}  // namespace solmover
