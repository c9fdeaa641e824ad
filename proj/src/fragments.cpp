#include "solmover/fragments.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

using nlohmann::json;

DocOrigin origin_from_string(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "textbook") return DocOrigin::Textbook;
    if (n == "blog") return DocOrigin::Blog;
    if (n == "tutorial") return DocOrigin::Tutorial;
    if (n == "code_sample" || n == "codesample") return DocOrigin::CodeSample;
    throw Error("unknown doc origin: " + name);
}

std::string origin_to_string(DocOrigin origin) {
    switch (origin) {
        case DocOrigin::Textbook: return "textbook";
        case DocOrigin::Blog: return "blog";
        case DocOrigin::Tutorial: return "tutorial";
        case DocOrigin::CodeSample: return "code_sample";
    }
    return "tutorial";
}

std::string make_fragment_id(const std::string& source_id, int seq, int sub,
                             const std::string& text) {
    std::string key = source_id;
    key += '\x1f';
    key += std::to_string(seq);
    if (sub > 0) {
        key += '.';
        key += std::to_string(sub);
    }
    key += '\x1f';
    key += text;
    return hash_hex(key);
}

std::string index_text(const Fragment& frag) {
    if (frag.heading.empty()) return frag.text;
    if (frag.text.empty()) return frag.heading;
    return frag.heading + "\n" + frag.text;
}

namespace {

// Whitespace-collapsing sink for prose and headings.
struct CollapseBuf {
    std::string s;
    bool pending = false;
    void put(char c) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = true;
            return;
        }
        if (pending && !s.empty()) s.push_back(' ');
        s.push_back(c);
        pending = false;
    }
    void boundary() { pending = true; }
};

size_t decode_entity(std::string_view html, size_t amp, std::string& out) {
    size_t semi = html.find(';', amp + 1);
    if (semi == std::string_view::npos || semi - amp > 10) {
        out.push_back('&');
        return amp + 1;
    }
    std::string_view name = html.substr(amp + 1, semi - amp - 1);
    if (name == "amp") out.push_back('&');
    else if (name == "lt") out.push_back('<');
    else if (name == "gt") out.push_back('>');
    else if (name == "quot") out.push_back('"');
    else if (name == "apos") out.push_back('\'');
    else if (name == "nbsp") out.push_back(' ');
    else if (!name.empty() && name[0] == '#') {
        long cp = 0;
        try {
            cp = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                     ? std::stol(std::string(name.substr(2)), nullptr, 16)
                     : std::stol(std::string(name.substr(1)));
        } catch (...) {
            cp = 0;
        }
        if (cp > 0 && cp < 128) out.push_back(static_cast<char>(cp));
        else out.push_back(' ');
    } else {
        out.push_back('&');
        return amp + 1;
    }
    return semi + 1;
}

bool is_heading_tag(const std::string& name) {
    return name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
}

bool is_inline_tag(const std::string& name) {
    static const char* inl[] = {"a",  "b",   "i",    "em",  "strong", "span", "tt",
                                "u",  "sub", "sup",  "small", "abbr", "mark", "kbd"};
    for (const char* t : inl)
        if (name == t) return true;
    return false;
}

struct Segmenter {
    const DocPage& page;
    std::vector<Fragment> fragments;

    CollapseBuf title;
    CollapseBuf heading;
    CollapseBuf text;
    std::string snippet;
    std::vector<std::string> snippets;
    std::string current_heading;
    bool in_title = false;
    bool in_heading = false;
    int snippet_depth = 0;
    bool saw_text = false;

    explicit Segmenter(const DocPage& p) : page(p) {}

    void put_char(char c) {
        if (snippet_depth > 0) {
            snippet.push_back(c);
            if (!std::isspace(static_cast<unsigned char>(c))) saw_text = true;
            return;
        }
        if (in_title) {
            title.put(c);
            return;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) saw_text = true;
        if (in_heading) heading.put(c);
        else text.put(c);
    }

    void end_snippet() {
        std::string_view s = snippet;
        while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        if (!s.empty()) snippets.emplace_back(s);
        snippet.clear();
    }

    void end_heading() {
        in_heading = false;
        current_heading = heading.s;
        heading = CollapseBuf{};
    }

    void flush_fragment() {
        if (current_heading.empty() && text.s.empty() && snippets.empty()) return;
        Fragment frag;
        frag.heading = current_heading.empty()
                           ? (title.s.empty() ? std::string("preamble") : title.s)
                           : current_heading;
        frag.text = text.s;
        frag.code_snippets = std::move(snippets);
        frag.source_id = page.source_id;
        fragments.push_back(std::move(frag));
        snippets = {};
        text = CollapseBuf{};
        current_heading.clear();
    }

    void handle_tag(const std::string& name, bool closing) {
        if (is_heading_tag(name)) {
            if (!closing) {
                if (in_heading) end_heading();
                flush_fragment();
                in_heading = true;
                heading = CollapseBuf{};
            } else if (in_heading) {
                end_heading();
            }
            return;
        }
        if (name == "title") {
            in_title = !closing;
            return;
        }
        if (name == "pre" || name == "code") {
            if (in_heading) end_heading();
            if (!closing) {
                if (snippet_depth == 0) snippet.clear();
                ++snippet_depth;
            } else if (snippet_depth > 0 && --snippet_depth == 0) {
                end_snippet();
            }
            return;
        }
        if (!is_inline_tag(name)) {
            // A block tag inside an unclosed heading ends the heading.
            if (in_heading) end_heading();
            else text.boundary();
        }
    }

    void run() {
        const std::string& html = page.html;
        size_t i = 0;
        const size_t n = html.size();
        while (i < n) {
            char c = html[i];
            if (c == '<') {
                if (starts_with(std::string_view(html).substr(i), "<!--")) {
                    size_t end = html.find("-->", i + 4);
                    i = (end == std::string::npos) ? n : end + 3;
                    continue;
                }
                if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
                    size_t end = html.find('>', i);
                    i = (end == std::string::npos) ? n : end + 1;
                    continue;
                }
                size_t j = i + 1;
                bool closing = j < n && html[j] == '/';
                if (closing) ++j;
                std::string name;
                while (j < n && (std::isalnum(static_cast<unsigned char>(html[j])))) {
                    name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[j]))));
                    ++j;
                }
                size_t end = html.find('>', j);
                if (name.empty() || end == std::string::npos) {
                    // stray '<': treat as text
                    put_char(c);
                    ++i;
                    continue;
                }
                if (!closing && (name == "script" || name == "style")) {
                    std::string close = "</" + name;
                    size_t stop = html.find(close, end + 1);
                    if (stop == std::string::npos) {
                        i = n;
                    } else {
                        size_t gt = html.find('>', stop);
                        i = (gt == std::string::npos) ? n : gt + 1;
                    }
                    continue;
                }
                handle_tag(name, closing);
                i = end + 1;
                continue;
            }
            if (c == '&') {
                std::string decoded;
                size_t next = decode_entity(html, i, decoded);
                for (char d : decoded) put_char(d);
                i = next;
                continue;
            }
            put_char(c);
            ++i;
        }
        if (snippet_depth > 0) {
            snippet_depth = 0;
            end_snippet();
        }
        if (in_heading) end_heading();
        flush_fragment();
    }
};

}  // namespace

std::vector<Fragment> segment_html(const DocPage& page) {
    Segmenter seg(page);
    seg.run();
    if (seg.fragments.empty() || !seg.saw_text) {
        throw EmptyDocument("no text content in document " + page.source_id);
    }
    int seq = 0;
    for (auto& frag : seg.fragments) {
        frag.seq = seq++;
        frag.sub = 0;
        frag.id = make_fragment_id(frag.source_id, frag.seq, frag.sub, frag.text);
    }
    return seg.fragments;
}

std::vector<Fragment> chunk_fragment(const Fragment& frag, size_t width) {
    if (width < 16) throw Error("fragment width must be at least 16 tokens");
    auto spans = whitespace_token_spans(frag.text);
    if (spans.size() <= width) return {frag};

    std::vector<Fragment> chunks;
    size_t cut = 0;
    int sub = 1;
    for (size_t start_tok = 0; start_tok < spans.size(); start_tok += width) {
        size_t next_tok = start_tok + width;
        size_t end = (next_tok < spans.size()) ? spans[next_tok].begin : frag.text.size();
        Fragment chunk = frag;
        chunk.text = frag.text.substr(cut, end - cut);
        chunk.sub = sub++;
        chunk.id = make_fragment_id(chunk.source_id, chunk.seq, chunk.sub, chunk.text);
        chunks.push_back(std::move(chunk));
        cut = end;
    }
    return chunks;
}

namespace {

json fragment_to_json(const Fragment& f) {
    return json{{"id", f.id},           {"heading", f.heading},
                {"text", f.text},       {"code_snippets", f.code_snippets},
                {"source_id", f.source_id}, {"seq", f.seq},
                {"sub", f.sub}};
}

Fragment fragment_from_json(const json& j) {
    Fragment f;
    f.id = j.at("id").get<std::string>();
    f.heading = j.at("heading").get<std::string>();
    f.text = j.at("text").get<std::string>();
    f.code_snippets = j.at("code_snippets").get<std::vector<std::string>>();
    f.source_id = j.at("source_id").get<std::string>();
    f.seq = j.at("seq").get<int>();
    f.sub = j.at("sub").get<int>();
    return f;
}

constexpr int kStoreFormatVersion = 1;

}  // namespace

FragmentStore::FragmentStore(std::vector<Fragment> fragments) : fragments_(std::move(fragments)) {
    for (size_t i = 0; i < fragments_.size(); ++i) by_id_[fragments_[i].id] = i;
}

const Fragment* FragmentStore::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &fragments_[it->second];
}

std::string FragmentStore::serialize() const {
    json doc;
    doc["format_version"] = kStoreFormatVersion;
    json arr = json::array();
    for (const auto& f : fragments_) arr.push_back(fragment_to_json(f));
    doc["fragments"] = std::move(arr);
    return doc.dump(2);
}

FragmentStore FragmentStore::deserialize(const std::string& json_text) {
    json doc = json::parse(json_text);
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kStoreFormatVersion) {
        throw FormatVersionMismatch("fragment store format version mismatch");
    }
    std::vector<Fragment> frags;
    for (const auto& j : doc.at("fragments")) frags.push_back(fragment_from_json(j));
    return FragmentStore(std::move(frags));
}

void FragmentStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write fragment store: " + path);
    out << serialize();
}

FragmentStore FragmentStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read fragment store: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

std::vector<DocsManifestEntry> read_docs_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read docs manifest: " + path);
    std::vector<DocsManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error("docs manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        DocsManifestEntry entry;
        entry.source_id = j.at("source_id").get<std::string>();
        entry.origin = origin_from_string(j.at("origin").get<std::string>());
        entry.path = j.at("path").get<std::string>();
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace solmover
