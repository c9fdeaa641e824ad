#include "solmover/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "solmover/text.hpp"

namespace solmover {

namespace {

const char* kTaskTemplate =
    "You are translating a Solidity smart contract into Move.\n"
    "\n"
    "TOPIC: {topic}\n"
    "KEYWORDS: {keywords}\n"
    "\n"
    "FUNCTIONS:\n"
    "{functions}\n"
    "\n"
    "COMMENTS:\n"
    "{comments}\n";

const char* kPlannerTemplate =
    "Plan the translation of a Solidity contract into Move.\n"
    "\n"
    "TASK:\n"
    "{task}\n"
    "CONCEPTS:\n"
    "{concepts}\n"
    "OUTPUT FORMAT: a numbered list of sub-tasks, one per line, starting with \"1.\".\n"
    "Name the concept heading a sub-task relies on inside its line.\n";

const char* kManifestTemplate =
    "[package]\n"
    "name = \"{name}\"\n"
    "version = \"0.0.1\"\n"
    "\n"
    "[addresses]\n"
    "translation = \"0x42\"\n";

}  // namespace

const std::string& builtin_task_template() {
    static const std::string tmpl = kTaskTemplate;
    return tmpl;
}

const std::string& builtin_planner_template() {
    static const std::string tmpl = kPlannerTemplate;
    return tmpl;
}

const std::string& builtin_manifest_template() {
    static const std::string tmpl = kManifestTemplate;
    return tmpl;
}

PipelineConfig default_config() {
    PipelineConfig cfg;
    cfg.planner.model_name = "planner";
    cfg.planner.auth_env = "LLM_API_TOKEN";
    cfg.generator.model_name = "generator";
    cfg.generator.auth_env = "LLM_API_TOKEN";
    cfg.toolchain.compile_cmd = "move build --path {package_dir}";
    cfg.toolchain.prove_cmd = "move prove --path {package_dir}";
    cfg.toolchain.workdir_root = "work";
    return cfg;
}

std::string interpolate_env(const std::string& value) {
    std::string out;
    size_t i = 0;
    while (i < value.size()) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            size_t close = value.find('}', i + 2);
            if (close != std::string::npos) {
                std::string var = value.substr(i + 2, close - i - 2);
                if (const char* env = std::getenv(var.c_str())) out += env;
                i = close + 1;
                continue;
            }
        }
        out.push_back(value[i]);
        ++i;
    }
    return out;
}

namespace {

struct KeyValueFile {
    std::map<std::string, std::string> values;
    std::string origin;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    long integer(const std::string& key, long fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            return std::stol(it->second);
        } catch (...) {
            throw ConfigError(origin + ": key " + key + " is not an integer: " + it->second);
        }
    }

    double real(const std::string& key, double fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw ConfigError(origin + ": key " + key + " is not a number: " + it->second);
        }
    }

    bool boolean(const std::string& key, bool fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::string v = to_lower(it->second);
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        throw ConfigError(origin + ": key " + key + " is not a boolean: " + it->second);
    }
};

KeyValueFile parse_key_values(const std::string& text, const std::string& origin) {
    KeyValueFile kv;
    kv.origin = origin;
    int lineno = 0;
    for (const auto& raw_line : split_lines(text)) {
        ++lineno;
        std::string_view line = trim(raw_line);
        if (line.empty() || line.front() == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        kv.values[key] = interpolate_env(value);
    }
    return kv;
}

void fill_llm(const KeyValueFile& kv, const std::string& prefix, LlmConfig& cfg) {
    cfg.endpoint_url = kv.str(prefix + ".endpoint_url", cfg.endpoint_url);
    cfg.model_name = kv.str(prefix + ".model", cfg.model_name);
    cfg.temperature = kv.real(prefix + ".temperature", cfg.temperature);
    cfg.max_output_tokens =
        static_cast<int>(kv.integer(prefix + ".max_output_tokens", cfg.max_output_tokens));
    cfg.timeout_s = static_cast<int>(kv.integer(prefix + ".timeout_s", cfg.timeout_s));
    cfg.retry.max_retries =
        static_cast<int>(kv.integer(prefix + ".max_retries", cfg.retry.max_retries));
    cfg.retry.backoff_ms =
        static_cast<int>(kv.integer(prefix + ".backoff_ms", cfg.retry.backoff_ms));
    cfg.auth_env = kv.str(prefix + ".auth_env", cfg.auth_env);
}

void require_file(const std::string& key, const std::string& path) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path)) {
        throw ConfigError("configured file for " + key + " does not exist: " + path);
    }
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
    KeyValueFile kv = parse_key_values(text, origin);
    PipelineConfig cfg = default_config();

    cfg.corpus_dir = kv.str("paths.corpus", cfg.corpus_dir);
    cfg.docs_manifest = kv.str("paths.docs_manifest", cfg.docs_manifest);
    cfg.index_dir = kv.str("paths.index", cfg.index_dir);
    cfg.ledger_path = kv.str("paths.ledger", cfg.ledger_path);
    cfg.reports_dir = kv.str("paths.reports", cfg.reports_dir);
    cfg.artifacts_dir = kv.str("paths.artifacts", cfg.artifacts_dir);

    fill_llm(kv, "planner", cfg.planner);
    fill_llm(kv, "generator", cfg.generator);
    cfg.llm_backend = kv.str("llm.backend", cfg.llm_backend);
    cfg.replay_dir = kv.str("llm.replay_dir", cfg.replay_dir);
    if (cfg.llm_backend != "live" && cfg.llm_backend != "replay") {
        throw ConfigError(origin + ": llm.backend must be live or replay");
    }

    cfg.toolchain_kind = kv.str("toolchain.kind", cfg.toolchain_kind);
    if (cfg.toolchain_kind != "process" && cfg.toolchain_kind != "script") {
        throw ConfigError(origin + ": toolchain.kind must be process or script");
    }
    cfg.toolchain.compile_cmd = kv.str("toolchain.compile_cmd", cfg.toolchain.compile_cmd);
    cfg.toolchain.prove_cmd = kv.str("toolchain.prove_cmd", cfg.toolchain.prove_cmd);
    cfg.toolchain.workdir_root = kv.str("toolchain.workdir", cfg.toolchain.workdir_root);
    cfg.toolchain.timeout_s =
        static_cast<int>(kv.integer("toolchain.timeout_s", cfg.toolchain.timeout_s));
    cfg.toolchain_script_dir = kv.str("toolchain.script_dir", cfg.toolchain_script_dir);
    cfg.prover_enabled = kv.boolean("toolchain.prover", cfg.prover_enabled);
    std::string manifest_path = kv.str("toolchain.manifest_template", "");
    if (!manifest_path.empty()) {
        require_file("toolchain.manifest_template", manifest_path);
        std::ifstream in(manifest_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg.toolchain.manifest_template = ss.str();
    } else {
        cfg.toolchain.manifest_template = builtin_manifest_template();
    }

    cfg.retrieval_k = static_cast<size_t>(kv.integer("retrieval.k", (long)cfg.retrieval_k));
    cfg.fragment_width =
        static_cast<size_t>(kv.integer("retrieval.fragment_width", (long)cfg.fragment_width));
    cfg.bm25_k1 = kv.real("retrieval.k1", cfg.bm25_k1);
    cfg.bm25_b = kv.real("retrieval.b", cfg.bm25_b);
    cfg.dense_enabled = kv.boolean("retrieval.dense", cfg.dense_enabled);

    cfg.train_steps = static_cast<int>(kv.integer("train.steps", cfg.train_steps));
    cfg.train_lr = kv.real("train.lr", cfg.train_lr);
    cfg.train_dim = static_cast<size_t>(kv.integer("train.dim", (long)cfg.train_dim));
    cfg.train_seed = static_cast<std::uint64_t>(kv.integer("train.seed", (long)cfg.train_seed));
    cfg.train_negatives =
        static_cast<size_t>(kv.integer("train.negatives", (long)cfg.train_negatives));
    cfg.train_pairs_path = kv.str("train.pairs", cfg.train_pairs_path);

    cfg.max_attempts = static_cast<int>(kv.integer("loop.max_attempts", cfg.max_attempts));
    if (cfg.max_attempts < 1) throw ConfigError(origin + ": loop.max_attempts must be >= 1");
    cfg.workers = static_cast<int>(kv.integer("run.workers", cfg.workers));
    if (cfg.workers < 1) throw ConfigError(origin + ": run.workers must be >= 1");
    cfg.shots = kv.str("run.shots", cfg.shots);
    if (cfg.shots != "zero" && cfg.shots != "five") {
        throw ConfigError(origin + ": run.shots must be zero or five");
    }
    cfg.exemplars_path = kv.str("run.exemplars", cfg.exemplars_path);
    cfg.prompt_budget = static_cast<size_t>(kv.integer("run.prompt_budget", (long)cfg.prompt_budget));
    cfg.max_keywords = static_cast<size_t>(kv.integer("run.max_keywords", (long)cfg.max_keywords));
    cfg.task_template_path = kv.str("run.task_template", cfg.task_template_path);
    cfg.planner_template_path = kv.str("run.planner_template", cfg.planner_template_path);
    cfg.stopwords_path = kv.str("run.stopwords", cfg.stopwords_path);
    cfg.contract_budget_s = kv.integer("run.contract_budget_s", cfg.contract_budget_s);

    cfg.harvest.min_stars = kv.integer("harvest.min_stars", cfg.harvest.min_stars);
    cfg.harvest.required_language = kv.str("harvest.language", cfg.harvest.required_language);
    cfg.harvest.min_comment_density =
        kv.real("harvest.min_comment_density", cfg.harvest.min_comment_density);
    cfg.harvest.permissive_licenses_only =
        kv.boolean("harvest.permissive_only", cfg.harvest.permissive_licenses_only);
    cfg.harvest_fixtures_dir = kv.str("harvest.fixtures_dir", cfg.harvest_fixtures_dir);
    cfg.harvest_token_env = kv.str("harvest.token_env", cfg.harvest_token_env);
    cfg.harvest_api_base = kv.str("harvest.api_base", cfg.harvest_api_base);
    cfg.harvest_page_limit =
        static_cast<int>(kv.integer("harvest.page_limit", cfg.harvest_page_limit));
    cfg.harvest_sample = static_cast<size_t>(kv.integer("harvest.sample", (long)cfg.harvest_sample));
    cfg.harvest_seed = static_cast<std::uint64_t>(kv.integer("harvest.seed", (long)cfg.harvest_seed));

    for (const auto& [key, path] : {std::pair<std::string, std::string>
                                        {"run.task_template", cfg.task_template_path},
                                    {"run.planner_template", cfg.planner_template_path},
                                    {"run.stopwords", cfg.stopwords_path},
                                    {"run.exemplars", cfg.exemplars_path},
                                    {"train.pairs", cfg.train_pairs_path}}) {
        require_file(key, path);
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace solmover
