#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace solmover {

enum class Role { System, User, Assistant };

std::string role_to_string(Role role);

struct ChatMessage {
    Role role;
    std::string content;
};

struct RetryPolicy {
    int max_retries = 3;   // additional attempts after the first
    int backoff_ms = 250;  // doubled per retry
};

struct LlmConfig {
    std::string endpoint_url;
    std::string model_name;
    double temperature = 0.0;
    int max_output_tokens = 2048;
    int timeout_s = 60;
    RetryPolicy retry;
    std::string auth_env;  // name of the env var holding the bearer token
};

struct LlmResponse {
    std::string content;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    long latency_ms = 0;
};

class LlmBackend {
  public:
    virtual ~LlmBackend() = default;
    virtual LlmResponse complete(const std::vector<ChatMessage>& messages) = 0;
};

// Chat-completions HTTP client. Posts {model, messages, temperature,
// max_tokens}, returns the first choice's content verbatim; response
// interpretation belongs to callers. Transient transport failures and
// 429/5xx are retried per the config's retry policy.
class HttpLlmClient : public LlmBackend {
  public:
    explicit HttpLlmClient(LlmConfig cfg);
    LlmResponse complete(const std::vector<ChatMessage>& messages) override;

    // Global cap on in-flight requests across all clients (default 4).
    static void set_global_concurrency_cap(int cap);

  private:
    LlmConfig cfg_;
};

// Deterministic scripted backend for tests and replayed runs. Consumes
// its response list in order and records every prompt it was asked.
class ReplayBackend : public LlmBackend {
  public:
    explicit ReplayBackend(std::vector<std::string> script);
    LlmResponse complete(const std::vector<ChatMessage>& messages) override;

    const std::vector<std::string>& captured_prompts() const { return captured_; }
    size_t remaining() const;

  private:
    std::vector<std::string> script_;
    std::vector<std::string> captured_;
    size_t next_ = 0;
    mutable std::mutex mu_;
};

// One transcript line per message, "role: content"; the capture format
// prompt-content assertions run against.
std::string render_transcript(const std::vector<ChatMessage>& messages);

struct FewShotExemplar {
    std::string input;
    std::string output;
};

std::vector<FewShotExemplar> load_exemplars(const std::string& path);

// [system] + per exemplar (user, assistant) + final user. Zero exemplars
// yields the zero-shot baseline shape; at most five are accepted.
std::vector<ChatMessage> build_fewshot_messages(const std::vector<FewShotExemplar>& exemplars,
                                                const std::string& input,
                                                const std::string& system_text);

}  // namespace solmover
