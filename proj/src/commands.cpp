#include "solmover/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "solmover/bm25.hpp"
#include "solmover/encoder.hpp"
#include "solmover/errors.hpp"
#include "solmover/fragments.hpp"
#include "solmover/metrics.hpp"
#include "solmover/pipeline.hpp"
#include "solmover/text.hpp"

namespace solmover {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << content;
}

std::string load_template(const std::string& path, const std::string& fallback) {
    return path.empty() ? fallback : read_file(path);
}

std::unordered_set<std::string> load_stopword_set(const PipelineConfig& cfg) {
    return cfg.stopwords_path.empty() ? builtin_stopwords() : load_stopwords(cfg.stopwords_path);
}

}  // namespace

int cmd_harvest(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        std::unique_ptr<HostingClient> client;
        if (!cfg.harvest_fixtures_dir.empty()) {
            client = std::make_unique<FixtureHostingClient>(cfg.harvest_fixtures_dir);
        } else {
            const char* token = std::getenv(cfg.harvest_token_env.c_str());
            if (!token || !*token) {
                err << "error: environment variable " << cfg.harvest_token_env
                    << " is not set (required for live API access)\n";
                return kExitConfig;
            }
            client = std::make_unique<GithubClient>(cfg.harvest_api_base, cfg.harvest_token_env);
        }

        auto repos = query_repos(*client, cfg.harvest, cfg.harvest_page_limit);
        std::vector<HarvestedFile> files;
        for (const auto& repo : repos) {
            for (auto& [path, content] : extract_sol_files(*client, repo)) {
                files.push_back({repo.full_name, path, std::move(content), repo.license_id});
            }
        }
        CorpusManifest manifest = build_manifest(files, cfg.harvest);

        if (cfg.harvest_sample > 0 && cfg.harvest_sample < manifest.entries.size()) {
            std::mt19937_64 rng(cfg.harvest_seed);
            std::shuffle(manifest.entries.begin(), manifest.entries.end(), rng);
            manifest.entries.resize(cfg.harvest_sample);
            std::sort(manifest.entries.begin(), manifest.entries.end(),
                      [](const ManifestEntry& a, const ManifestEntry& b) {
                          if (a.repo != b.repo) return a.repo < b.repo;
                          return a.path < b.path;
                      });
        }

        fs::create_directories(cfg.corpus_dir);
        write_manifest(manifest, (fs::path(cfg.corpus_dir) / "manifest.ndjson").string());
        std::map<std::string, const std::string*> by_hash;
        for (const auto& file : files) by_hash[hash_hex(file.content)] = &file.content;
        size_t stored = 0;
        for (const auto& entry : manifest.entries) {
            auto it = by_hash.find(entry.content_hash);
            if (it == by_hash.end()) continue;
            write_file(fs::path(cfg.corpus_dir) / (entry.content_hash + ".sol"), *it->second);
            ++stored;
        }
        out << "harvested " << manifest.entries.size() << " manifest entries from "
            << repos.size() << " repos; stored " << stored << " files under " << cfg.corpus_dir
            << "\n";
        return kExitOk;
    } catch (const RateLimited& e) {
        err << "error: " << e.what() << " (retry after " << e.retry_after_s << "s)\n";
        return kExitTool;
    } catch (const ApiError& e) {
        err << "error: " << e.what() << "\n";
        return kExitTool;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_index(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        auto entries = read_docs_manifest(cfg.docs_manifest);
        fs::path manifest_dir = fs::path(cfg.docs_manifest).parent_path();

        std::vector<Fragment> fragments;
        for (const auto& entry : entries) {
            fs::path html_path(entry.path);
            if (html_path.is_relative()) html_path = manifest_dir / html_path;
            DocPage page{entry.source_id, read_file(html_path.string()), entry.origin};
            for (const auto& segment : segment_html(page)) {
                for (auto& chunk : chunk_fragment(segment, cfg.fragment_width)) {
                    fragments.push_back(std::move(chunk));
                }
            }
        }
        if (fragments.empty()) throw EmptyCorpus("docs manifest produced no fragments");

        FragmentStore store(fragments);
        Bm25Index index = build_bm25_index(fragments, cfg.bm25_k1, cfg.bm25_b);

        fs::create_directories(cfg.index_dir);
        store.save((fs::path(cfg.index_dir) / "fragments.json").string());
        index.save((fs::path(cfg.index_dir) / "bm25.json").string());
        out << "indexed " << fragments.size() << " fragments from " << entries.size()
            << " documents into " << cfg.index_dir << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

namespace {

struct TrainingPair {
    std::string query;
    std::string positive_id;
};

std::vector<TrainingPair> read_training_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read training pairs: " + path);
    std::vector<TrainingPair> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        pairs.push_back({j.at("query").get<std::string>(), j.at("positive_id").get<std::string>()});
    }
    return pairs;
}

}  // namespace

int cmd_train_retriever(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.train_pairs_path.empty())
            throw ConfigError("train.pairs must point to a query/positive_id file");
        FragmentStore store = FragmentStore::load((fs::path(cfg.index_dir) / "fragments.json").string());
        Bm25Index index = Bm25Index::load((fs::path(cfg.index_dir) / "bm25.json").string());
        auto pairs = read_training_pairs(cfg.train_pairs_path);
        if (pairs.empty()) throw Error("training pair file is empty");
        for (const auto& pair : pairs) {
            if (!store.find(pair.positive_id))
                throw Error("training pair references unknown fragment " + pair.positive_id);
        }

        std::set<std::string> vocab_set;
        for (const auto& frag : store.fragments())
            for (auto& tok : index_tokens(index_text(frag))) vocab_set.insert(std::move(tok));
        for (const auto& pair : pairs)
            for (auto& tok : index_tokens(pair.query)) vocab_set.insert(std::move(tok));
        std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());

        Encoder query_encoder = Encoder::random(vocab, cfg.train_dim, cfg.train_seed);
        Encoder context_encoder = Encoder::random(vocab, cfg.train_dim, cfg.train_seed + 1);

        size_t negatives = std::min(cfg.train_negatives, store.size() - 1);
        if (negatives == 0) throw Error("store too small to mine negatives");

        std::ostringstream curve;
        curve << "step,loss\n";
        for (int step = 0; step < cfg.train_steps; ++step) {
            const TrainingPair& pair = pairs[static_cast<size_t>(step) % pairs.size()];
            const Fragment* positive = store.find(pair.positive_id);
            ContrastiveBatch batch;
            batch.query = pair.query;
            batch.positive = positive->text;
            batch.negatives = mine_in_file_hard_negatives(pair.query, index, store,
                                                          {pair.positive_id}, negatives);
            double loss = train_step(batch, query_encoder, context_encoder, cfg.train_lr);
            curve << step << "," << loss << "\n";
        }

        fs::create_directories(cfg.index_dir);
        query_encoder.save((fs::path(cfg.index_dir) / "encoder_q.json").string());
        context_encoder.save((fs::path(cfg.index_dir) / "encoder_c.json").string());
        write_file(fs::path(cfg.index_dir) / "loss_curve.csv", curve.str());
        out << "trained retriever for " << cfg.train_steps << " steps over " << pairs.size()
            << " pairs; encoders written to " << cfg.index_dir << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

namespace {

std::vector<std::string> replay_script(const json& doc, const char* key) {
    std::vector<std::string> script;
    for (const auto& item : doc.value(key, json::array())) script.push_back(item.get<std::string>());
    return script;
}

std::vector<MockStep> mock_plan(const json& doc, const char* key) {
    std::vector<MockStep> plan;
    for (const auto& item : doc.value(key, json::array())) {
        plan.push_back({item.value("pass", false), item.value("stderr", std::string())});
    }
    return plan;
}

void write_artifact(const fs::path& dir, const CandidateTranslation& candidate) {
    write_file(dir / (std::to_string(candidate.revision) + ".move"),
               candidate.move_source + "\n");
    json sidecar;
    sidecar["revision"] = candidate.revision;
    json ranges = json::object();
    for (const auto& [index, range] : candidate.provenance) {
        ranges[std::to_string(index)] = json::array({range.first, range.second});
    }
    sidecar["line_ranges"] = std::move(ranges);
    write_file(dir / (std::to_string(candidate.revision) + ".provenance.json"),
               sidecar.dump(2) + "\n");
}

}  // namespace

int cmd_translate(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        FragmentStore store = FragmentStore::load((fs::path(cfg.index_dir) / "fragments.json").string());
        Bm25Index index = Bm25Index::load((fs::path(cfg.index_dir) / "bm25.json").string());

        Encoder query_encoder;
        Encoder context_encoder;
        DenseChannel dense;
        bool has_dense = false;
        if (cfg.dense_enabled) {
            query_encoder = Encoder::load((fs::path(cfg.index_dir) / "encoder_q.json").string());
            context_encoder = Encoder::load((fs::path(cfg.index_dir) / "encoder_c.json").string());
            dense = {&query_encoder, &context_encoder};
            has_dense = true;
        }

        const std::string task_template =
            load_template(cfg.task_template_path, builtin_task_template());
        const std::string planner_template =
            load_template(cfg.planner_template_path, builtin_planner_template());
        const auto stopwords = load_stopword_set(cfg);

        std::vector<FewShotExemplar> exemplars;
        if (cfg.shots == "five") {
            if (cfg.exemplars_path.empty())
                throw ConfigError("run.shots = five requires run.exemplars");
            exemplars = load_exemplars(cfg.exemplars_path);
            if (exemplars.size() > 5)
                throw ConfigError("exemplar file holds more than five entries");
        }

        std::vector<fs::path> contracts;
        if (!fs::is_directory(cfg.corpus_dir))
            throw ConfigError("contract directory does not exist: " + cfg.corpus_dir);
        for (const auto& dirent : fs::directory_iterator(cfg.corpus_dir)) {
            if (dirent.is_regular_file() && dirent.path().extension() == ".sol")
                contracts.push_back(dirent.path());
        }
        std::sort(contracts.begin(), contracts.end());

        auto done = RunLedger::terminal_ids(cfg.ledger_path);
        std::vector<fs::path> pending;
        for (const auto& path : contracts) {
            if (!done.count(path.stem().string())) pending.push_back(path);
        }
        out << pending.size() << " of " << contracts.size() << " contracts pending\n";

        RunLedger ledger(cfg.ledger_path);
        PipelineOptions opts;
        opts.max_keywords = cfg.max_keywords;
        opts.prompt_budget = cfg.prompt_budget;
        opts.retrieval_k = cfg.retrieval_k;
        opts.max_attempts = cfg.max_attempts;
        opts.prover_enabled = cfg.prover_enabled;
        opts.contract_budget_ms = cfg.contract_budget_s * 1000;

        std::atomic<size_t> next{0};
        std::atomic<int> infra_failures{0};
        std::mutex io_mu;

        auto worker = [&]() {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= pending.size()) break;
                const fs::path& path = pending[i];
                const std::string contract_id = path.stem().string();
                try {
                    std::unique_ptr<LlmBackend> planner;
                    std::unique_ptr<LlmBackend> generator;
                    std::unique_ptr<Toolchain> toolchain;
                    if (cfg.llm_backend == "replay") {
                        json script = json::parse(
                            read_file((fs::path(cfg.replay_dir) / (contract_id + ".json")).string()));
                        planner = std::make_unique<ReplayBackend>(replay_script(script, "planner"));
                        generator =
                            std::make_unique<ReplayBackend>(replay_script(script, "generator"));
                    } else {
                        planner = std::make_unique<HttpLlmClient>(cfg.planner);
                        generator = std::make_unique<HttpLlmClient>(cfg.generator);
                    }
                    if (cfg.toolchain_kind == "script") {
                        json script = json::parse(read_file(
                            (fs::path(cfg.toolchain_script_dir) / (contract_id + ".json")).string()));
                        toolchain = std::make_unique<ScriptedToolchain>(mock_plan(script, "compile"),
                                                                        mock_plan(script, "prove"));
                    } else {
                        ToolchainConfig tc = cfg.toolchain;
                        tc.workdir_root =
                            (fs::path(cfg.toolchain.workdir_root) / contract_id).string();
                        toolchain = std::make_unique<ProcessToolchain>(tc);
                    }

                    SoliditySource source;
                    TranslationRecord record;
                    bool parsed = false;
                    try {
                        source = parse_source(read_file(path.string()), path.string());
                        parsed = true;
                    } catch (const Error& e) {
                        record.contract_id = contract_id;
                        record.model_name = cfg.generator.model_name;
                        record.status = Status::FailedPlanning;
                        record.timeline.push_back({system_clock_ms()(), "failed", e.what()});
                    }
                    if (parsed) {
                        PipelineDeps deps;
                        deps.sparse = &index;
                        deps.store = &store;
                        deps.dense = has_dense ? &dense : nullptr;
                        deps.planner = planner.get();
                        deps.generator = generator.get();
                        deps.toolchain = toolchain.get();
                        deps.stopwords = &stopwords;
                        deps.task_template = task_template;
                        deps.planner_template = planner_template;
                        deps.model_label = cfg.generator.model_name;
                        deps.exemplars = exemplars;
                        fs::path artifact_dir = fs::path(cfg.artifacts_dir) / contract_id;
                        deps.on_revision = [artifact_dir](const CandidateTranslation& candidate) {
                            write_artifact(artifact_dir, candidate);
                        };
                        record = translate_contract(source, deps, opts);
                    }
                    ledger.append(record);
                    std::lock_guard<std::mutex> lk(io_mu);
                    out << contract_id << ": " << status_to_string(record.status)
                        << " (compile attempts " << record.compile_attempts << ", prove attempts "
                        << record.prove_attempts << ")\n";
                } catch (const std::exception& e) {
                    ++infra_failures;
                    std::lock_guard<std::mutex> lk(io_mu);
                    err << contract_id << ": not run: " << e.what() << "\n";
                }
            }
        };

        if (cfg.workers <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        return infra_failures.load() > 0 ? kExitPartial : kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ToolNotFound& e) {
        err << "error: " << e.what() << "\n";
        return kExitTool;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_report(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        auto records = RunLedger::read_all(cfg.ledger_path);
        std::map<std::string, std::vector<TranslationRecord>> by_model;
        for (auto& rec : records) {
            std::string label = rec.model_name.empty() ? "unknown" : rec.model_name;
            by_model[label].push_back(std::move(rec));
        }
        std::vector<MetricsReport> reports;
        if (by_model.empty()) {
            reports.push_back(aggregate_metrics({}, "all"));
        } else {
            for (const auto& [label, group] : by_model)
                reports.push_back(aggregate_metrics(group, label));
        }
        std::string csv = render_report(reports, ReportFormat::Csv);
        std::string md = render_report(reports, ReportFormat::Markdown);
        write_file(fs::path(cfg.reports_dir) / "report.csv", csv);
        write_file(fs::path(cfg.reports_dir) / "report.md", md);
        out << md;
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace solmover
