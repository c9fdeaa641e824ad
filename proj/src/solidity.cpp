#include "solmover/solidity.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    return std::all_of(s.begin(), s.end(), is_ident_char);
}

// Strips comment markers and the conventional leading-asterisk decoration
// of multi-line blocks. Offsets stay untouched; only `text` is cleaned.
std::string clean_comment_text(std::string_view raw, CommentKind kind, bool is_block) {
    std::string_view body = raw;
    if (is_block) {
        body.remove_prefix(2);  // "/*"
        if (body.size() >= 2 && body.substr(body.size() - 2) == "*/") body.remove_suffix(2);
        std::string cleaned;
        for (auto& line : split_lines(body)) {
            std::string_view l = trim(line);
            while (!l.empty() && l.front() == '*') l.remove_prefix(1);
            l = trim(l);
            if (!cleaned.empty()) cleaned.push_back('\n');
            cleaned += std::string(l);
        }
        return std::string(trim(cleaned));
    }
    body.remove_prefix(kind == CommentKind::NatSpec ? 3 : 2);
    return std::string(trim(body));
}

struct ScanResult {
    std::vector<CommentBlock> comments;
    std::vector<std::pair<size_t, size_t>> raw_spans;  // every comment, empty ones included
    std::string code;  // raw text with comments and string contents blanked
};

// The one pass that matters: tracks string-literal state so "//" or "/*"
// inside a literal never opens a comment, and comment state so quotes
// inside comments never open a literal.
ScanResult scan(const std::string& text) {
    ScanResult out;
    out.code.assign(text.size(), ' ');
    const size_t n = text.size();
    size_t i = 0;
    while (i < n) {
        char c = text[i];
        if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            size_t start = i;
            size_t end = text.find('\n', i);
            if (end == std::string::npos) end = n;
            std::string_view raw(text.data() + start, end - start);
            CommentKind kind = (raw.size() >= 3 && raw[2] == '/' && (raw.size() == 3 || raw[3] != '/'))
                                   ? CommentKind::NatSpec
                                   : CommentKind::Line;
            std::string body = clean_comment_text(raw, kind, false);
            if (!body.empty()) out.comments.push_back({body, kind, start, end});
            out.raw_spans.emplace_back(start, end);
            i = end;
        } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            size_t start = i;
            size_t close = text.find("*/", i + 2);
            size_t end = (close == std::string::npos) ? n : close + 2;
            std::string_view raw(text.data() + start, end - start);
            bool natspec = raw.size() > 4 && raw[2] == '*' && raw[3] != '*' && raw[3] != '/';
            CommentKind kind = natspec ? CommentKind::NatSpec : CommentKind::Block;
            std::string body = clean_comment_text(raw, kind, true);
            if (!body.empty()) out.comments.push_back({body, kind, start, end});
            out.raw_spans.emplace_back(start, end);
            i = end;
        } else if (c == '"' || c == '\'') {
            char quote = c;
            ++i;
            while (i < n && text[i] != quote && text[i] != '\n') {
                if (text[i] == '\\' && i + 1 < n) ++i;
                ++i;
            }
            if (i < n && text[i] == quote) ++i;
        } else {
            out.code[i] = c;
            ++i;
        }
    }
    return out;
}

size_t skip_ws(const std::string& code, size_t i) {
    while (i < code.size() && std::isspace(static_cast<unsigned char>(code[i]))) ++i;
    return i;
}

std::string_view read_ident(const std::string& code, size_t i) {
    if (i >= code.size() || !is_ident_start(code[i])) return {};
    size_t j = i;
    while (j < code.size() && is_ident_char(code[j])) ++j;
    return std::string_view(code).substr(i, j - i);
}

Param parse_param(std::string_view piece) {
    static const std::unordered_set<std::string> non_names = {"memory", "storage", "calldata",
                                                              "payable", "indexed"};
    piece = trim(piece);
    auto spans = whitespace_token_spans(piece);
    if (spans.empty()) return {};
    std::string_view last = piece.substr(spans.back().begin, spans.back().end - spans.back().begin);
    if (spans.size() >= 2 && is_identifier(last) && !non_names.count(std::string(last))) {
        std::string type(trim(piece.substr(0, spans.back().begin)));
        return {std::string(last), type};
    }
    return {"", std::string(piece)};
}

std::vector<Param> parse_params(std::string_view inner) {
    std::vector<Param> params;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i <= inner.size(); ++i) {
        if (i == inner.size() || (inner[i] == ',' && depth == 0)) {
            std::string_view piece = trim(inner.substr(start, i - start));
            if (!piece.empty()) params.push_back(parse_param(piece));
            start = i + 1;
        } else if (inner[i] == '(') {
            ++depth;
        } else if (inner[i] == ')') {
            --depth;
        }
    }
    return params;
}

// Reads one `function` declaration starting at the keyword offset.
// Returns the scan position to resume from.
size_t parse_function(const std::string& code, size_t kw, std::vector<FunctionSig>& out) {
    size_t i = skip_ws(code, kw + 8);
    std::string_view name = read_ident(code, i);
    if (name.empty()) return kw + 8;  // function type or legacy fallback, not a declaration
    i          = skip_ws(code, i + name.size());
    if (i >= code.size() || code[i] != '(') return i;
    int depth = 0;
    size_t open = i;
    size_t close = i;
    for (; close < code.size(); ++close) {
        if (code[close] == '(') ++depth;
        if (code[close] == ')' && --depth == 0) break;
    }
    if (close >= code.size()) return i;

    FunctionSig sig;
    sig.name = std::string(name);
    sig.start_offset = kw;
    sig.params = parse_params(std::string_view(code).substr(open + 1, close - open - 1));

    i = close + 1;
    while (i < code.size() && code[i] != '{' && code[i] != ';') {
        i = skip_ws(code, i);
        if (i >= code.size() || code[i] == '{' || code[i] == ';') break;
        if (code[i] == '(') {  // modifier arguments or returns clause
            int d = 0;
            while (i < code.size()) {
                if (code[i] == '(') ++d;
                if (code[i] == ')' && --d == 0) {
                    ++i;
                    break;
                }
                ++i;
            }
            continue;
        }
        std::string_view tok = read_ident(code, i);
        if (tok.empty()) {
            ++i;
            continue;
        }
        if (tok == "public") sig.visibility = Visibility::Public;
        else if (tok == "external") sig.visibility = Visibility::External;
        else if (tok == "internal") sig.visibility = Visibility::Internal;
        else if (tok == "private") sig.visibility = Visibility::Private;
        else if (!sig.mutability && (tok == "pure" || tok == "view" || tok == "payable" || tok == "constant"))
            sig.mutability = std::string(tok);
        i += tok.size();
    }
    out.push_back(std::move(sig));
    return i;
}

bool has_token(const std::string& code, std::string_view word) {
    size_t pos = 0;
    while ((pos = code.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_ident_char(code[pos - 1]);
        size_t after = pos + word.size();
        bool right_ok = after >= code.size() || !is_ident_char(code[after]);
        if (left_ok && right_ok) return true;
        pos = after;
    }
    return false;
}

std::optional<std::string> find_pragma(const std::string& code) {
    size_t pos = 0;
    while ((pos = code.find("pragma", pos)) != std::string::npos) {
        if ((pos == 0 || !is_ident_char(code[pos - 1])) &&
            (pos + 6 >= code.size() || !is_ident_char(code[pos + 6]))) {
            size_t i = skip_ws(code, pos + 6);
            std::string_view kw = read_ident(code, i);
            if (kw == "solidity") {
                size_t end = code.find(';', i);
                if (end == std::string::npos) end = code.size();
                return std::string(trim(std::string_view(code).substr(i + kw.size(), end - i - kw.size())));
            }
        }
        pos += 6;
    }
    return std::nullopt;
}

size_t line_of_offset(const std::string& text, size_t offset) {
    return static_cast<size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

}  // namespace

std::vector<std::pair<size_t, size_t>> comment_spans(const std::string& text) {
    return scan(text).raw_spans;
}

SoliditySource parse_source(const std::string& text, const std::string& path) {
    if (!is_valid_utf8(text)) throw EncodingError("invalid UTF-8 in " + path);

    ScanResult scanned = scan(text);
    SoliditySource src;
    src.raw_text = text;
    src.path = path;
    src.comments = std::move(scanned.comments);

    const std::string& code = scanned.code;
    size_t pos = 0;
    while ((pos = code.find("function", pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_ident_char(code[pos - 1]);
        bool right_ok = pos + 8 >= code.size() || !is_ident_char(code[pos + 8]);
        if (left_ok && right_ok) {
            pos = parse_function(code, pos, src.functions);
        } else {
            pos += 8;
        }
    }

    bool has_container = has_token(code, "contract") || has_token(code, "library") ||
                         has_token(code, "interface");
    if (!has_container && src.functions.empty()) {
        throw UnparsableSource("no contract, library, interface or function declaration in " + path);
    }

    src.pragma_version = find_pragma(code);

    // Attach the nearest preceding comment ending within 2 lines above
    // each function as its doc comment.
    for (auto& fn : src.functions) {
        size_t fn_line = line_of_offset(text, fn.start_offset);
        for (size_t ci = src.comments.size(); ci-- > 0;) {
            const auto& cmt = src.comments[ci];
            if (cmt.end_offset > fn.start_offset) continue;
            size_t cmt_line = line_of_offset(text, cmt.end_offset);
            if (fn_line >= cmt_line && fn_line - cmt_line <= 2) fn.doc_comment = ci;
            break;
        }
    }
    return src;
}

const std::unordered_set<std::string>& builtin_stopwords() {
    static const std::unordered_set<std::string> words = {
        "the",  "a",     "an",    "and",  "or",    "but",   "if",    "then",  "else",  "when",
        "while", "for",  "to",    "of",   "in",    "on",    "at",    "by",    "with",  "from",
        "as",   "is",    "are",   "was",  "were",  "be",    "been",  "being", "it",    "its",
        "this", "that",  "these", "those", "not",  "no",    "we",    "you",   "they",  "he",
        "she",  "i",     "do",    "does", "did",   "can",   "could", "will",  "would", "should"};
    return words;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stopword list: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view w = trim(line);
        if (!w.empty()) words.insert(to_lower(w));
    }
    return words;
}

ContractSummary extract_keywords(const SoliditySource& src,
                                 size_t max_k,
                                 const std::unordered_set<std::string>& stopwords) {
    struct Entry {
        size_t count = 0;
        size_t first_seen = 0;
    };
    std::map<std::string, Entry> counts;
    size_t seq = 0;
    auto bump = [&](const std::string& token) {
        auto [it, inserted] = counts.try_emplace(token);
        if (inserted) it->second.first_seen = seq;
        ++it->second.count;
        ++seq;
    };

    for (const auto& cmt : src.comments) {
        for (const auto& tok : index_tokens(cmt.text)) {
            if (!stopwords.count(tok)) bump(tok);
        }
    }
    for (const auto& fn : src.functions) bump(to_lower(fn.name));

    std::vector<std::pair<std::string, Entry>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.count != b.second.count) return a.second.count > b.second.count;
        return a.second.first_seen < b.second.first_seen;
    });

    ContractSummary summary;
    summary.source = &src;
    for (const auto& [token, entry] : ranked) {
        if (summary.keywords.size() >= max_k) break;
        summary.keywords.push_back(token);
    }

    if (!src.comments.empty()) {
        summary.topic = first_sentence(src.comments.front().text);
    } else if (!src.functions.empty()) {
        std::string joined;
        for (const auto& fn : src.functions) {
            if (!joined.empty()) joined += ", ";
            joined += fn.name;
        }
        summary.topic = joined;
    } else {
        summary.topic = "unknown";
    }
    return summary;
}

namespace {

std::string visibility_name(Visibility v) {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::External: return "external";
        case Visibility::Internal: return "internal";
        case Visibility::Private: return "private";
        default: return "unspecified";
    }
}

std::string function_digest_of(const SoliditySource& src) {
    std::string digest;
    std::unordered_set<std::string> seen;
    for (const auto& fn : src.functions) {
        if (!seen.insert(fn.name).second) continue;  // one digest line per name
        std::string line = fn.name + "(";
        for (size_t i = 0; i < fn.params.size(); ++i) {
            if (i) line += ", ";
            line += fn.params[i].type;
            if (!fn.params[i].name.empty()) line += " " + fn.params[i].name;
        }
        line += ") " + visibility_name(fn.visibility);
        if (fn.mutability) line += " " + *fn.mutability;
        if (!digest.empty()) digest += "\n";
        digest += line;
    }
    return digest;
}

// Longest prefix of `digest` that fits in `limit` bytes and ends at a
// sentence or line boundary.
std::string truncate_at_sentences(const std::string& digest, size_t limit) {
    if (digest.size() <= limit) return digest;
    size_t best = 0;
    for (size_t i = 0; i < digest.size() && i < limit; ++i) {
        char c = digest[i];
        bool boundary = (c == '\n') ||
                        ((c == '.' || c == '!' || c == '?') &&
                         (i + 1 == digest.size() || std::isspace(static_cast<unsigned char>(digest[i + 1]))));
        if (boundary) best = i + 1;
    }
    std::string out(trim(std::string_view(digest).substr(0, best)));
    return out;
}

}  // namespace

TaskPrompt build_task_prompt(const ContractSummary& summary,
                             const std::string& template_text,
                             size_t budget) {
    for (const char* ph : {"{topic}", "{keywords}", "{comments}", "{functions}"}) {
        if (template_text.find(ph) == std::string::npos)
            throw TemplateError(std::string("task template missing placeholder ") + ph);
    }

    TaskPrompt prompt;
    prompt.topic = summary.topic;
    for (const auto& kw : summary.keywords) {
        if (!prompt.keyword_section.empty()) prompt.keyword_section += ", ";
        prompt.keyword_section += kw;
    }
    if (summary.source) {
        prompt.function_digest = function_digest_of(*summary.source);
        for (const auto& cmt : summary.source->comments) {
            if (!prompt.comment_digest.empty()) prompt.comment_digest += "\n";
            prompt.comment_digest += cmt.text;
        }
    }

    auto render = [&](const std::string& comments) {
        return render_template(template_text, {{"topic", prompt.topic},
                                               {"keywords", prompt.keyword_section},
                                               {"comments", comments},
                                               {"functions", prompt.function_digest}});
    };

    prompt.rendered = render(prompt.comment_digest);
    if (prompt.rendered.size() > budget) {
        size_t overhead = render("").size();
        size_t room = budget > overhead ? budget - overhead : 0;
        prompt.comment_digest = truncate_at_sentences(prompt.comment_digest, room);
        prompt.rendered = render(prompt.comment_digest);
        if (prompt.rendered.size() > budget) prompt.rendered.resize(budget);
    }
    return prompt;
}

}  // namespace solmover
