#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "solmover/bm25.hpp"
#include "solmover/fragments.hpp"

namespace solmover {

// Trainable bag-of-words linear encoder: the text embedding is the mean
// of the embedding rows of its in-vocabulary tokens. It stands in for a
// transformer behind the same text -> vector contract, which is all the
// retrieval ranking and the contrastive trainer depend on.
class Encoder {
  public:
    Encoder() = default;
    // Zero-initialized embedding.
    Encoder(const std::vector<std::string>& vocab_terms, size_t dim);
    // Uniform random rows in [-scale, scale], seeded.
    static Encoder random(const std::vector<std::string>& vocab_terms, size_t dim,
                          std::uint64_t seed, double scale = 0.1);

    std::vector<double> encode(const std::string& text) const;

    size_t dim() const { return dim_; }
    const std::map<std::string, size_t>& vocab() const { return vocab_; }
    std::vector<std::vector<double>>& rows() { return embedding_; }
    const std::vector<std::vector<double>>& rows() const { return embedding_; }

    std::string serialize() const;
    static Encoder deserialize(const std::string& json_text);
    void save(const std::string& path) const;
    static Encoder load(const std::string& path);

  private:
    std::map<std::string, size_t> vocab_;
    std::vector<std::vector<double>> embedding_;
    size_t dim_ = 0;
};

// Inner-product similarity sim(q, c) = E_C(c)^T E_Q(q).
double sim(const std::vector<double>& a, const std::vector<double>& b);

struct ContrastiveBatch {
    std::string query;
    std::string positive;
    std::vector<std::string> negatives;
};

// -log( e^{sim(q,c+)} / (e^{sim(q,c+)} + sum_i e^{sim(q,c-_i)}) ),
// evaluated in log-sum-exp form.
double contrastive_loss(const ContrastiveBatch& batch, const Encoder& query_encoder,
                        const Encoder& context_encoder);

// One gradient-descent step on the loss w.r.t. both embedding matrices.
// Returns the loss before the update.
double train_step(const ContrastiveBatch& batch, Encoder& query_encoder,
                  Encoder& context_encoder, double lr);

// Exhaustive dense top-k, ties broken by ascending fragment_id.
std::vector<ScoredFragment> search_dense(const Encoder& query_encoder,
                                         const Encoder& context_encoder,
                                         const FragmentStore& store, const std::string& query,
                                         size_t k);

// In-file hard negatives: the m fragments ranking highest by BM25
// against the prompt among those not labeled positive for it. Fragments
// sharing no term still participate with score 0, tie-broken by id.
std::vector<std::string> mine_in_file_hard_negatives(const std::string& prompt_text,
                                                     const Bm25Index& index,
                                                     const FragmentStore& store,
                                                     const std::set<std::string>& positive_ids,
                                                     size_t m);

}  // namespace solmover
