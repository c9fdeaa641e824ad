#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "solmover/commands.hpp"
#include "solmover/config.hpp"

namespace {

using solmover::PipelineConfig;

// Flag overrides are applied on top of the config file only when the
// user actually passed them, so file values and defaults survive.
struct Overrides {
    std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> entries;

    template <typename T>
    void bind(CLI::Option* opt, T* slot, std::function<void(PipelineConfig&, const T&)> apply) {
        entries.emplace_back(opt, [slot, apply](PipelineConfig& cfg) { apply(cfg, *slot); });
    }

    void apply(PipelineConfig& cfg) const {
        for (const auto& [opt, fn] : entries) {
            if (opt->count() > 0) fn(cfg);
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solmover: Solidity -> Move translation orchestration"};
    app.require_subcommand(1);

    std::string config_path;
    bool verbose = false;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_flag("--verbose", verbose, "chatty progress output");

    const PipelineConfig defaults = solmover::default_config();

    // ---- harvest ----------------------------------------------------
    auto* harvest = app.add_subcommand("harvest", "collect Solidity contracts into a corpus");
    Overrides harvest_ov;
    auto h_stars = defaults.harvest.min_stars;
    auto h_lang = defaults.harvest.required_language;
    auto h_density = defaults.harvest.min_comment_density;
    bool h_permissive = defaults.harvest.permissive_licenses_only;
    std::string h_fixtures, h_out = defaults.corpus_dir;
    auto h_pages = defaults.harvest_page_limit;
    auto h_sample = defaults.harvest_sample;
    auto h_seed = defaults.harvest_seed;
    auto h_token = defaults.harvest_token_env;
    harvest_ov.bind<long>(
        harvest->add_option("--min-stars", h_stars, "minimum GitHub stars")->capture_default_str(),
        &h_stars, [](PipelineConfig& c, const long& v) { c.harvest.min_stars = v; });
    harvest_ov.bind<std::string>(
        harvest->add_option("--language", h_lang, "required language tag")->capture_default_str(),
        &h_lang, [](PipelineConfig& c, const std::string& v) { c.harvest.required_language = v; });
    harvest_ov.bind<double>(
        harvest->add_option("--min-comment-density", h_density, "minimum comment density")
            ->capture_default_str(),
        &h_density, [](PipelineConfig& c, const double& v) { c.harvest.min_comment_density = v; });
    harvest_ov.bind<bool>(
        harvest->add_flag("--permissive-only", h_permissive, "keep permissively licensed repos only"),
        &h_permissive,
        [](PipelineConfig& c, const bool& v) { c.harvest.permissive_licenses_only = v; });
    harvest_ov.bind<std::string>(
        harvest->add_option("--fixtures", h_fixtures, "recorded API fixture directory"),
        &h_fixtures, [](PipelineConfig& c, const std::string& v) { c.harvest_fixtures_dir = v; });
    harvest_ov.bind<std::string>(
        harvest->add_option("--out", h_out, "corpus output directory")->capture_default_str(),
        &h_out, [](PipelineConfig& c, const std::string& v) { c.corpus_dir = v; });
    harvest_ov.bind<int>(
        harvest->add_option("--page-limit", h_pages, "search pages to fetch")->capture_default_str(),
        &h_pages, [](PipelineConfig& c, const int& v) { c.harvest_page_limit = v; });
    harvest_ov.bind<size_t>(
        harvest->add_option("--sample", h_sample, "deterministic sample size (0 keeps all)")
            ->capture_default_str(),
        &h_sample, [](PipelineConfig& c, const size_t& v) { c.harvest_sample = v; });
    harvest_ov.bind<std::uint64_t>(
        harvest->add_option("--seed", h_seed, "sampling seed")->capture_default_str(), &h_seed,
        [](PipelineConfig& c, const std::uint64_t& v) { c.harvest_seed = v; });
    harvest_ov.bind<std::string>(
        harvest->add_option("--token-env", h_token, "env var holding the API token")
            ->capture_default_str(),
        &h_token, [](PipelineConfig& c, const std::string& v) { c.harvest_token_env = v; });

    // ---- index ------------------------------------------------------
    auto* index = app.add_subcommand("index", "segment documentation and build retrieval indexes");
    Overrides index_ov;
    std::string i_docs = defaults.docs_manifest, i_out = defaults.index_dir;
    auto i_width = defaults.fragment_width;
    auto i_k1 = defaults.bm25_k1;
    auto i_b = defaults.bm25_b;
    index_ov.bind<std::string>(
        index->add_option("--docs", i_docs, "docs manifest (ndjson)")->capture_default_str(),
        &i_docs, [](PipelineConfig& c, const std::string& v) { c.docs_manifest = v; });
    index_ov.bind<std::string>(
        index->add_option("--out", i_out, "index output directory")->capture_default_str(), &i_out,
        [](PipelineConfig& c, const std::string& v) { c.index_dir = v; });
    index_ov.bind<size_t>(
        index->add_option("--fragment-width", i_width, "fragment width in tokens")
            ->capture_default_str(),
        &i_width, [](PipelineConfig& c, const size_t& v) { c.fragment_width = v; });
    index_ov.bind<double>(
        index->add_option("--k1", i_k1, "BM25 k1")->capture_default_str(), &i_k1,
        [](PipelineConfig& c, const double& v) { c.bm25_k1 = v; });
    index_ov.bind<double>(index->add_option("--b", i_b, "BM25 b")->capture_default_str(), &i_b,
                          [](PipelineConfig& c, const double& v) { c.bm25_b = v; });

    // ---- train-retriever ---------------------------------------------
    auto* train = app.add_subcommand("train-retriever", "train the dual encoder at desk scale");
    Overrides train_ov;
    std::string t_index = defaults.index_dir, t_pairs;
    auto t_steps = defaults.train_steps;
    auto t_lr = defaults.train_lr;
    auto t_dim = defaults.train_dim;
    auto t_seed = defaults.train_seed;
    auto t_neg = defaults.train_negatives;
    train_ov.bind<std::string>(
        train->add_option("--index", t_index, "index directory")->capture_default_str(), &t_index,
        [](PipelineConfig& c, const std::string& v) { c.index_dir = v; });
    train_ov.bind<std::string>(
        train->add_option("--pairs", t_pairs, "training pairs ndjson (query, positive_id)"),
        &t_pairs, [](PipelineConfig& c, const std::string& v) { c.train_pairs_path = v; });
    train_ov.bind<int>(
        train->add_option("--steps", t_steps, "training steps")->capture_default_str(), &t_steps,
        [](PipelineConfig& c, const int& v) { c.train_steps = v; });
    train_ov.bind<double>(
        train->add_option("--lr", t_lr, "learning rate")->capture_default_str(), &t_lr,
        [](PipelineConfig& c, const double& v) { c.train_lr = v; });
    train_ov.bind<size_t>(
        train->add_option("--dim", t_dim, "embedding dimension")->capture_default_str(), &t_dim,
        [](PipelineConfig& c, const size_t& v) { c.train_dim = v; });
    train_ov.bind<std::uint64_t>(
        train->add_option("--seed", t_seed, "init seed")->capture_default_str(), &t_seed,
        [](PipelineConfig& c, const std::uint64_t& v) { c.train_seed = v; });
    train_ov.bind<size_t>(
        train->add_option("--negatives", t_neg, "hard negatives per batch")->capture_default_str(),
        &t_neg, [](PipelineConfig& c, const size_t& v) { c.train_negatives = v; });

    // ---- translate ----------------------------------------------------
    auto* translate = app.add_subcommand("translate", "run the five-phase pipeline over contracts");
    Overrides translate_ov;
    std::string x_contracts = defaults.corpus_dir, x_index = defaults.index_dir;
    std::string x_ledger = defaults.ledger_path, x_artifacts = defaults.artifacts_dir;
    auto x_attempts = defaults.max_attempts;
    auto x_workers = defaults.workers;
    std::string x_shots = defaults.shots, x_exemplars, x_backend = defaults.llm_backend;
    std::string x_replay, x_toolchain = defaults.toolchain_kind, x_scripts;
    auto x_budget = defaults.prompt_budget;
    auto x_keywords = defaults.max_keywords;
    auto x_k = defaults.retrieval_k;
    bool x_dense = defaults.dense_enabled;
    bool x_no_prover = false;
    translate_ov.bind<std::string>(
        translate->add_option("--contracts", x_contracts, "directory of .sol inputs")
            ->capture_default_str(),
        &x_contracts, [](PipelineConfig& c, const std::string& v) { c.corpus_dir = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--index", x_index, "index directory")->capture_default_str(),
        &x_index, [](PipelineConfig& c, const std::string& v) { c.index_dir = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--ledger", x_ledger, "run ledger path")->capture_default_str(),
        &x_ledger, [](PipelineConfig& c, const std::string& v) { c.ledger_path = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--artifacts", x_artifacts, "artifact output directory")
            ->capture_default_str(),
        &x_artifacts, [](PipelineConfig& c, const std::string& v) { c.artifacts_dir = v; });
    translate_ov.bind<int>(
        translate->add_option("--max-attempts", x_attempts, "compile/prove loop bound")
            ->capture_default_str(),
        &x_attempts, [](PipelineConfig& c, const int& v) { c.max_attempts = v; });
    translate_ov.bind<int>(
        translate->add_option("--workers", x_workers, "parallel contract workers")
            ->capture_default_str(),
        &x_workers, [](PipelineConfig& c, const int& v) { c.workers = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--shots", x_shots, "zero or five")->capture_default_str(), &x_shots,
        [](PipelineConfig& c, const std::string& v) { c.shots = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--exemplars", x_exemplars, "few-shot exemplar file"), &x_exemplars,
        [](PipelineConfig& c, const std::string& v) { c.exemplars_path = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--backend", x_backend, "llm backend: live or replay")
            ->capture_default_str(),
        &x_backend, [](PipelineConfig& c, const std::string& v) { c.llm_backend = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--replay-dir", x_replay, "replay scripts directory"), &x_replay,
        [](PipelineConfig& c, const std::string& v) { c.replay_dir = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--toolchain", x_toolchain, "toolchain: process or script")
            ->capture_default_str(),
        &x_toolchain, [](PipelineConfig& c, const std::string& v) { c.toolchain_kind = v; });
    translate_ov.bind<std::string>(
        translate->add_option("--script-dir", x_scripts, "scripted toolchain directory"),
        &x_scripts, [](PipelineConfig& c, const std::string& v) { c.toolchain_script_dir = v; });
    translate_ov.bind<bool>(
        translate->add_flag("--no-prover", x_no_prover, "skip the prover phase"), &x_no_prover,
        [](PipelineConfig& c, const bool& v) { c.prover_enabled = !v; });
    translate_ov.bind<size_t>(
        translate->add_option("--prompt-budget", x_budget, "task prompt budget in chars")
            ->capture_default_str(),
        &x_budget, [](PipelineConfig& c, const size_t& v) { c.prompt_budget = v; });
    translate_ov.bind<size_t>(
        translate->add_option("--max-keywords", x_keywords, "keyword cap per contract")
            ->capture_default_str(),
        &x_keywords, [](PipelineConfig& c, const size_t& v) { c.max_keywords = v; });
    translate_ov.bind<size_t>(
        translate->add_option("--retrieval-k", x_k, "concepts per retrieval channel")
            ->capture_default_str(),
        &x_k, [](PipelineConfig& c, const size_t& v) { c.retrieval_k = v; });
    translate_ov.bind<bool>(
        translate->add_flag("--dense", x_dense, "enable the dense retrieval channel"), &x_dense,
        [](PipelineConfig& c, const bool& v) { c.dense_enabled = v; });

    // ---- report -------------------------------------------------------
    auto* report = app.add_subcommand("report", "aggregate the ledger into SC/IC tables");
    Overrides report_ov;
    std::string r_ledger = defaults.ledger_path, r_out = defaults.reports_dir;
    report_ov.bind<std::string>(
        report->add_option("--ledger", r_ledger, "run ledger path")->capture_default_str(),
        &r_ledger, [](PipelineConfig& c, const std::string& v) { c.ledger_path = v; });
    report_ov.bind<std::string>(
        report->add_option("--out", r_out, "reports output directory")->capture_default_str(),
        &r_out, [](PipelineConfig& c, const std::string& v) { c.reports_dir = v; });

    CLI11_PARSE(app, argc, argv);

    PipelineConfig cfg;
    try {
        cfg = config_path.empty() ? solmover::default_config() : solmover::load_config(config_path);
    } catch (const solmover::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solmover::kExitConfig;
    }

    try {
        if (harvest->parsed()) {
            harvest_ov.apply(cfg);
            return solmover::cmd_harvest(cfg, std::cout, std::cerr);
        }
        if (index->parsed()) {
            index_ov.apply(cfg);
            return solmover::cmd_index(cfg, std::cout, std::cerr);
        }
        if (train->parsed()) {
            train_ov.apply(cfg);
            return solmover::cmd_train_retriever(cfg, std::cout, std::cerr);
        }
        if (translate->parsed()) {
            translate_ov.apply(cfg);
            return solmover::cmd_translate(cfg, std::cout, std::cerr);
        }
        if (report->parsed()) {
            report_ov.apply(cfg);
            return solmover::cmd_report(cfg, std::cout, std::cerr);
        }
    } catch (const solmover::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solmover::kExitConfig;
    }
    return solmover::kExitConfig;
}
