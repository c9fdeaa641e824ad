#pragma once

#include <map>
#include <string>
#include <vector>

#include "solmover/fragments.hpp"

namespace solmover {

// Okapi BM25 over fragment index text. IDF uses the +1-inside-log form,
// ln((N - n_t + 0.5)/(n_t + 0.5) + 1), so scores stay non-negative even
// for terms present in every document of a tiny corpus.
struct Bm25Index {
    double k1 = 1.2;
    double b = 0.75;
    size_t doc_count = 0;
    double avg_doc_length = 0.0;
    // term -> (fragment_id, term frequency), sorted by fragment_id
    std::map<std::string, std::vector<std::pair<std::string, int>>> postings;
    std::map<std::string, size_t> doc_lengths;

    std::string serialize() const;
    static Bm25Index deserialize(const std::string& json_text);
    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);
};

Bm25Index build_bm25_index(const std::vector<Fragment>& fragments, double k1 = 1.2,
                           double b = 0.75);

struct ScoredFragment {
    std::string fragment_id;
    double score;
};

// Top-k by score, ties broken by ascending fragment_id. Fragments that
// share no term with the query are not returned.
std::vector<ScoredFragment> search_bm25(const Bm25Index& index,
                                        const std::vector<std::string>& query, size_t k);

// Score of one document for one query; 0 when no term matches.
double bm25_score(const Bm25Index& index, const std::vector<std::string>& query,
                  const std::string& fragment_id);

}  // namespace solmover
