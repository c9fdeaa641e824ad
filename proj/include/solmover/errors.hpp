#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace solmover {

// Base for every error raised by the framework. Individual types exist so
// callers can catch exactly the failure class a contract names.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EncodingError : Error {
    using Error::Error;
};

struct UnparsableSource : Error {
    using Error::Error;
};

struct TemplateError : Error {
    using Error::Error;
};

struct EmptyDocument : Error {
    using Error::Error;
};

struct EmptyCorpus : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct InsufficientCorpus : Error {
    using Error::Error;
};

struct FormatVersionMismatch : Error {
    using Error::Error;
};

// Planner response with no parseable numbered list. Keeps the raw response
// so the run ledger can preserve what the model actually said.
struct PlanParseError : Error {
    std::string raw_response;
    PlanParseError(const std::string& what, std::string raw)
        : Error(what), raw_response(std::move(raw)) {}
};

// Generation response with no fenced code block.
struct NoCodeBlock : Error {
    std::string raw_response;
    NoCodeBlock(const std::string& what, std::string raw)
        : Error(what), raw_response(std::move(raw)) {}
};

struct EmptyPlan : Error {
    using Error::Error;
};

struct DuplicateIndex : Error {
    using Error::Error;
};

struct ToolNotFound : Error {
    using Error::Error;
};

struct ScriptExhausted : Error {
    using Error::Error;
};

struct LlmError : Error {
    enum class Kind { Transport, RateLimited, BadResponse, Timeout };
    Kind kind;
    LlmError(Kind k, const std::string& what) : Error(what), kind(k) {}
};

struct ApiError : Error {
    using Error::Error;
};

struct RateLimited : ApiError {
    int retry_after_s;
    RateLimited(const std::string& what, int retry_after)
        : ApiError(what), retry_after_s(retry_after) {}
};

}  // namespace solmover
