#pragma once

#include <map>
#include <string>

#include "solmover/errors.hpp"
#include "solmover/harvester.hpp"
#include "solmover/llm.hpp"
#include "solmover/toolchain.hpp"

namespace solmover {

struct ConfigError : Error {
    using Error::Error;
};

// Everything a run needs, with the defaults the CLI help advertises.
// Loaded from a dotted key = value file; ${VAR} interpolates from the
// environment; command-line flags override file values.
struct PipelineConfig {
    // paths
    std::string corpus_dir = "corpus";
    std::string docs_manifest = "docs/manifest.ndjson";
    std::string index_dir = "index";
    std::string ledger_path = "runs/ledger.ndjson";
    std::string reports_dir = "reports";
    std::string artifacts_dir = "artifacts";

    // llm endpoints (planner "LLM tasker" and generator "Sol-Mover")
    LlmConfig planner;
    LlmConfig generator;
    std::string llm_backend = "live";  // live | replay
    std::string replay_dir;            // replay scripts, one json per contract

    // toolchain
    std::string toolchain_kind = "process";  // process | script
    ToolchainConfig toolchain;
    std::string toolchain_script_dir;
    bool prover_enabled = true;

    // retrieval
    size_t retrieval_k = 5;
    size_t fragment_width = 256;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    bool dense_enabled = false;

    // retriever training
    int train_steps = 200;
    double train_lr = 0.5;
    size_t train_dim = 32;
    std::uint64_t train_seed = 7;
    size_t train_negatives = 4;
    std::string train_pairs_path;

    // run shape
    int max_attempts = 5;
    int workers = 1;
    std::string shots = "zero";  // zero | five
    std::string exemplars_path;
    size_t prompt_budget = 4000;
    size_t max_keywords = 12;
    std::string task_template_path;
    std::string planner_template_path;
    std::string stopwords_path;
    long contract_budget_s = 1800;

    // harvest
    HarvestCriteria harvest;
    std::string harvest_fixtures_dir;
    std::string harvest_token_env = "GITHUB_TOKEN";
    std::string harvest_api_base = "https://api.github.com";
    int harvest_page_limit = 10;
    size_t harvest_sample = 0;  // 0 = keep everything
    std::uint64_t harvest_seed = 0;
};

PipelineConfig default_config();

// Parses the key=value file and applies it over the defaults. Relative
// paths stay relative to the process working directory. Every template
// or data file named in the config must exist.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config_text(const std::string& text, const std::string& origin);

// ${VAR} -> environment value; unset variables become empty.
std::string interpolate_env(const std::string& value);

// Built-in fallbacks used when no template files are configured; the
// same content ships under data/.
const std::string& builtin_task_template();
const std::string& builtin_planner_template();
const std::string& builtin_manifest_template();

}  // namespace solmover
