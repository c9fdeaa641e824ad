#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace solmover {

enum class DocOrigin { Textbook, Blog, Tutorial, CodeSample };

DocOrigin origin_from_string(const std::string& name);
std::string origin_to_string(DocOrigin origin);

struct DocPage {
    std::string source_id;
    std::string html;
    DocOrigin origin = DocOrigin::Tutorial;
};

// One retrieval unit: a heading-delimited slice of a documentation page.
// Prose lands in `text`, anything inside <pre>/<code> in `code_snippets`.
struct Fragment {
    std::string id;  // content hash of (source_id, seq[.sub], text)
    std::string heading;
    std::string text;
    std::vector<std::string> code_snippets;
    std::string source_id;
    int seq = 0;
    int sub = 0;  // chunk sub-ordinal; 0 when the segment was never split
};

std::string make_fragment_id(const std::string& source_id, int seq, int sub,
                             const std::string& text);

// The text a fragment is searched by: heading plus prose.
std::string index_text(const Fragment& frag);

// Splits a page at H1..H6 headings; content before the first heading
// becomes a fragment headed by the page title (or "preamble").
// Throws EmptyDocument when the html carries no text at all.
std::vector<Fragment> segment_html(const DocPage& page);

// Splits a fragment into pieces of at most `width` whitespace tokens.
// Cuts happen only between tokens and each piece keeps its original
// bytes, so concatenating the chunk texts reproduces the input text.
std::vector<Fragment> chunk_fragment(const Fragment& frag, size_t width);

class FragmentStore {
  public:
    FragmentStore() = default;
    explicit FragmentStore(std::vector<Fragment> fragments);

    const std::vector<Fragment>& fragments() const { return fragments_; }
    const Fragment* find(const std::string& id) const;
    size_t size() const { return fragments_.size(); }
    bool empty() const { return fragments_.empty(); }

    std::string serialize() const;
    static FragmentStore deserialize(const std::string& json_text);
    void save(const std::string& path) const;
    static FragmentStore load(const std::string& path);

  private:
    std::vector<Fragment> fragments_;
    std::unordered_map<std::string, size_t> by_id_;
};

// Docs manifest: one {source_id, origin, path} object per line.
struct DocsManifestEntry {
    std::string source_id;
    DocOrigin origin;
    std::string path;
};
std::vector<DocsManifestEntry> read_docs_manifest(const std::string& path);

}  // namespace solmover
