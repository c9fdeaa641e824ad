#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace solmover {

// A single-pass lexical scan is enough to recover comments and function
// signatures from a Solidity file, including partial or unparsable ones.
// No grammar, no AST: the scanner only tracks comment and string-literal
// state so markers inside literals never open a comment.

enum class CommentKind { Line, Block, NatSpec };

struct CommentBlock {
    std::string text;      // delimiters stripped, outer whitespace trimmed
    CommentKind kind;
    size_t start_offset;   // byte range in raw_text, delimiters included
    size_t end_offset;
};

enum class Visibility { Public, External, Internal, Private, Unspecified };

struct Param {
    std::string name;  // empty for unnamed parameters
    std::string type;
};

struct FunctionSig {
    std::string name;
    std::vector<Param> params;
    Visibility visibility = Visibility::Unspecified;
    std::optional<std::string> mutability;
    std::optional<size_t> doc_comment;  // index into SoliditySource::comments
    size_t start_offset = 0;            // offset of the `function` keyword
};

struct SoliditySource {
    std::string raw_text;
    std::string path;
    std::vector<CommentBlock> comments;
    std::vector<FunctionSig> functions;
    std::optional<std::string> pragma_version;
};

// Extracts comments (with exact byte offsets) and function signatures.
// Throws EncodingError on invalid UTF-8 and UnparsableSource when the
// text contains no contract/library/interface declaration and no function.
SoliditySource parse_source(const std::string& text, const std::string& path);

// Raw comment byte ranges (delimiters included, empty comments kept).
// Never throws; used for comment-density statistics.
std::vector<std::pair<size_t, size_t>> comment_spans(const std::string& text);

struct ContractSummary {
    std::string topic;
    std::vector<std::string> keywords;  // lowercase, deduplicated
    const SoliditySource* source = nullptr;
};

// Keywords are function names plus non-stopword comment tokens ranked by
// in-file frequency; topic is the first sentence of the first comment,
// falling back to the joined function names, else "unknown".
ContractSummary extract_keywords(const SoliditySource& src,
                                 size_t max_k,
                                 const std::unordered_set<std::string>& stopwords);

std::unordered_set<std::string> load_stopwords(const std::string& path);
const std::unordered_set<std::string>& builtin_stopwords();

struct TaskPrompt {
    std::string topic;
    std::string keyword_section;
    std::string comment_digest;
    std::string function_digest;
    std::string rendered;
};

// Renders the initial task prompt from a {topic}/{keywords}/{comments}/
// {functions} template. The comment digest is truncated at sentence
// boundaries first so keywords and function names survive the budget.
TaskPrompt build_task_prompt(const ContractSummary& summary,
                             const std::string& template_text,
                             size_t budget);

}  // namespace solmover
