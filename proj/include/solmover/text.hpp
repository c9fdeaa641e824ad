#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace solmover {

// UTF-8 validity check (rejects overlong forms, surrogates, > U+10FFFF).
bool is_valid_utf8(std::string_view text);

std::string to_lower(std::string_view text);

std::string_view trim(std::string_view text);

// Index tokenization shared by BM25, keyword extraction and the toy
// encoders: lowercase, split on non-alphanumeric, drop tokens shorter
// than 2 characters.
std::vector<std::string> index_tokens(std::string_view text);

// Whitespace tokens with byte offsets, for width-bounded chunking that
// must reassemble to the original text.
struct TokenSpan {
    size_t begin;
    size_t end;
};
std::vector<TokenSpan> whitespace_token_spans(std::string_view text);

size_t count_whitespace_tokens(std::string_view text);

// FNV-1a 64-bit; stable content ids across platforms and runs.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::string_view data);

// First sentence of a text: up to the first '.', '!' or '?' followed by
// whitespace/end, else the whole (trimmed) text.
std::string first_sentence(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);

bool starts_with(std::string_view text, std::string_view prefix);

// {placeholder} substitution used by prompt templates. Unknown
// placeholders are left untouched; "{{" renders a literal brace.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace solmover
