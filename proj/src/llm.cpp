#include "solmover/llm.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "solmover/errors.hpp"

namespace solmover {

using nlohmann::json;

std::string role_to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw LlmError(LlmError::Kind::Transport, "endpoint url missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// In-flight request gate shared by every client.
std::mutex g_cap_mu;
std::condition_variable g_cap_cv;
int g_cap = 4;
int g_in_flight = 0;

struct FlightSlot {
    FlightSlot() {
        std::unique_lock<std::mutex> lk(g_cap_mu);
        g_cap_cv.wait(lk, [] { return g_in_flight < g_cap; });
        ++g_in_flight;
    }
    ~FlightSlot() {
        {
            std::lock_guard<std::mutex> lk(g_cap_mu);
            --g_in_flight;
        }
        g_cap_cv.notify_one();
    }
};

}  // namespace

void HttpLlmClient::set_global_concurrency_cap(int cap) {
    std::lock_guard<std::mutex> lk(g_cap_mu);
    g_cap = cap > 0 ? cap : 1;
}

HttpLlmClient::HttpLlmClient(LlmConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint_url.empty())
        throw LlmError(LlmError::Kind::Transport, "llm endpoint url not configured");
}

LlmResponse HttpLlmClient::complete(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw LlmError(LlmError::Kind::BadResponse, "no messages to send");

    json body;
    body["model"] = cfg_.model_name;
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_output_tokens;
    json msgs = json::array();
    for (const auto& m : messages)
        msgs.push_back({{"role", role_to_string(m.role)}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    const std::string payload = body.dump();

    ParsedUrl url = parse_url(cfg_.endpoint_url);
    httplib::Headers headers;
    if (!cfg_.auth_env.empty()) {
        if (const char* token = std::getenv(cfg_.auth_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    std::string last_error = "transport failure";
    LlmError::Kind last_kind = LlmError::Kind::Transport;
    const int attempts = 1 + std::max(0, cfg_.retry.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            long delay = static_cast<long>(cfg_.retry.backoff_ms) << (attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        FlightSlot slot;
        httplib::Client client(url.base);
        client.set_connection_timeout(cfg_.timeout_s, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        client.set_write_timeout(cfg_.timeout_s, 0);

        auto start = std::chrono::steady_clock::now();
        auto res = client.Post(url.path, headers, payload, "application/json");
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();

        if (!res) {
            bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                             res.error() == httplib::Error::Read ||
                             res.error() == httplib::Error::Write;
            last_kind = timed_out ? LlmError::Kind::Timeout : LlmError::Kind::Transport;
            last_error = "http error: " + httplib::to_string(res.error());
            continue;  // transient; retry
        }
        if (res->status == 429) {
            last_kind = LlmError::Kind::RateLimited;
            last_error = "rate limited (429)";
            continue;
        }
        if (res->status >= 500) {
            last_kind = LlmError::Kind::Transport;
            last_error = "server error (" + std::to_string(res->status) + ")";
            continue;
        }
        if (res->status != 200) {
            throw LlmError(LlmError::Kind::BadResponse,
                           "unexpected status " + std::to_string(res->status));
        }
        json doc;
        try {
            doc = json::parse(res->body);
        } catch (const json::exception& e) {
            throw LlmError(LlmError::Kind::BadResponse,
                           std::string("unparseable response body: ") + e.what());
        }
        LlmResponse out;
        try {
            out.content = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw LlmError(LlmError::Kind::BadResponse, "response missing choices[0].message.content");
        }
        if (doc.contains("usage")) {
            out.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
            out.completion_tokens = doc["usage"].value("completion_tokens", 0L);
        }
        out.latency_ms = latency;
        return out;
    }
    throw LlmError(last_kind, last_error + " after " + std::to_string(attempts) + " attempts");
}

ReplayBackend::ReplayBackend(std::vector<std::string> script) : script_(std::move(script)) {}

LlmResponse ReplayBackend::complete(const std::vector<ChatMessage>& messages) {
    std::lock_guard<std::mutex> lk(mu_);
    captured_.push_back(render_transcript(messages));
    if (next_ >= script_.size()) {
        throw ScriptExhausted("replay script exhausted after " + std::to_string(script_.size()) +
                              " responses");
    }
    LlmResponse out;
    out.content = script_[next_++];
    return out;
}

size_t ReplayBackend::remaining() const {
    std::lock_guard<std::mutex> lk(mu_);
    return script_.size() - next_;
}

std::string render_transcript(const std::vector<ChatMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        out += role_to_string(m.role);
        out += ": ";
        out += m.content;
        out += "\n";
    }
    return out;
}

std::vector<FewShotExemplar> load_exemplars(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read exemplar file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("exemplar file " + path + ": " + e.what());
    }
    std::vector<FewShotExemplar> exemplars;
    for (const auto& j : doc) {
        FewShotExemplar ex{j.at("input").get<std::string>(), j.at("output").get<std::string>()};
        if (ex.input.empty() || ex.output.empty())
            throw Error("exemplar with empty input or output in " + path);
        exemplars.push_back(std::move(ex));
    }
    return exemplars;
}

std::vector<ChatMessage> build_fewshot_messages(const std::vector<FewShotExemplar>& exemplars,
                                                const std::string& input,
                                                const std::string& system_text) {
    if (exemplars.size() > 5) throw Error("at most five exemplars are supported");
    std::vector<ChatMessage> messages;
    messages.push_back({Role::System, system_text});
    for (const auto& ex : exemplars) {
        messages.push_back({Role::User, ex.input});
        messages.push_back({Role::Assistant, ex.output});
    }
    messages.push_back({Role::User, input});
    return messages;
}

}  // namespace solmover
