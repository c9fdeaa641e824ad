#include "solmover/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "solmover/errors.hpp"
#include "solmover/text.hpp"

namespace solmover {

using nlohmann::json;

namespace {
constexpr int kEncoderFormatVersion = 1;
}

Encoder::Encoder(const std::vector<std::string>& vocab_terms, size_t dim) : dim_(dim) {
    for (const auto& term : vocab_terms) vocab_.emplace(term, 0);
    size_t idx = 0;
    for (auto& [term, i] : vocab_) i = idx++;
    embedding_.assign(vocab_.size(), std::vector<double>(dim_, 0.0));
}

Encoder Encoder::random(const std::vector<std::string>& vocab_terms, size_t dim,
                        std::uint64_t seed, double scale) {
    Encoder enc(vocab_terms, dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& row : enc.embedding_)
        for (auto& v : row) v = dist(rng);
    return enc;
}

std::vector<double> Encoder::encode(const std::string& text) const {
    std::vector<double> out(dim_, 0.0);
    size_t hits = 0;
    for (const auto& tok : index_tokens(text)) {
        auto it = vocab_.find(tok);
        if (it == vocab_.end()) continue;
        const auto& row = embedding_[it->second];
        for (size_t d = 0; d < dim_; ++d) out[d] += row[d];
        ++hits;
    }
    if (hits > 0) {
        for (auto& v : out) v /= static_cast<double>(hits);
    }
    return out;
}

double sim(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("sim over vectors of length " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
}

namespace {

void check_batch(const ContrastiveBatch& batch) {
    if (batch.negatives.empty()) throw Error("contrastive batch needs at least one negative");
    for (const auto& neg : batch.negatives) {
        if (neg == batch.positive)
            throw Error("contrastive batch positive also listed as a negative");
    }
}

// Scores: index 0 is the positive, 1..m the negatives.
std::vector<double> batch_scores(const ContrastiveBatch& batch, const Encoder& query_encoder,
                                 const Encoder& context_encoder,
                                 std::vector<double>* query_vec_out,
                                 std::vector<std::vector<double>>* ctx_vecs_out) {
    std::vector<double> qv = query_encoder.encode(batch.query);
    std::vector<std::vector<double>> cvs;
    cvs.push_back(context_encoder.encode(batch.positive));
    for (const auto& neg : batch.negatives) cvs.push_back(context_encoder.encode(neg));
    std::vector<double> scores;
    scores.reserve(cvs.size());
    for (const auto& cv : cvs) scores.push_back(sim(qv, cv));
    if (query_vec_out) *query_vec_out = std::move(qv);
    if (ctx_vecs_out) *ctx_vecs_out = std::move(cvs);
    return scores;
}

double loss_from_scores(const std::vector<double>& scores) {
    double hi = *std::max_element(scores.begin(), scores.end());
    double denom = 0.0;
    for (double s : scores) denom += std::exp(s - hi);
    double lse = hi + std::log(denom);
    return lse - scores[0];
}

// Token occurrence counts restricted to the encoder vocabulary.
std::map<size_t, double> vocab_occurrences(const Encoder& enc, const std::string& text,
                                           size_t* total) {
    std::map<size_t, double> counts;
    size_t hits = 0;
    for (const auto& tok : index_tokens(text)) {
        auto it = enc.vocab().find(tok);
        if (it == enc.vocab().end()) continue;
        counts[it->second] += 1.0;
        ++hits;
    }
    *total = hits;
    return counts;
}

}  // namespace

double contrastive_loss(const ContrastiveBatch& batch, const Encoder& query_encoder,
                        const Encoder& context_encoder) {
    check_batch(batch);
    auto scores = batch_scores(batch, query_encoder, context_encoder, nullptr, nullptr);
    return loss_from_scores(scores);
}

double train_step(const ContrastiveBatch& batch, Encoder& query_encoder,
                  Encoder& context_encoder, double lr) {
    check_batch(batch);
    if (lr <= 0.0) throw Error("learning rate must be positive");

    std::vector<double> qv;
    std::vector<std::vector<double>> cvs;
    auto scores = batch_scores(batch, query_encoder, context_encoder, &qv, &cvs);
    double loss = loss_from_scores(scores);

    // Softmax over [positive, negatives]; dL/ds_j = p_j - [j == 0].
    double hi = *std::max_element(scores.begin(), scores.end());
    double denom = 0.0;
    for (double s : scores) denom += std::exp(s - hi);
    std::vector<double> grad_s(scores.size());
    for (size_t j = 0; j < scores.size(); ++j) {
        grad_s[j] = std::exp(scores[j] - hi) / denom - (j == 0 ? 1.0 : 0.0);
    }

    const size_t dim = query_encoder.dim();

    // dL/dq = sum_j grad_s[j] * c_j
    std::vector<double> grad_q(dim, 0.0);
    for (size_t j = 0; j < cvs.size(); ++j)
        for (size_t d = 0; d < dim; ++d) grad_q[d] += grad_s[j] * cvs[j][d];

    // Backprop through the token means; accumulate, then apply.
    std::map<size_t, std::vector<double>> q_row_grads;
    size_t q_total = 0;
    for (const auto& [row, count] : vocab_occurrences(query_encoder, batch.query, &q_total)) {
        auto& g = q_row_grads.emplace(row, std::vector<double>(dim, 0.0)).first->second;
        double w = count / static_cast<double>(q_total);
        for (size_t d = 0; d < dim; ++d) g[d] += w * grad_q[d];
    }

    std::map<size_t, std::vector<double>> c_row_grads;
    auto accumulate_context = [&](const std::string& text, double grad_score) {
        size_t total = 0;
        auto occ = vocab_occurrences(context_encoder, text, &total);
        if (total == 0) return;
        for (const auto& [row, count] : occ) {
            auto& g = c_row_grads.emplace(row, std::vector<double>(dim, 0.0)).first->second;
            double w = grad_score * count / static_cast<double>(total);
            for (size_t d = 0; d < dim; ++d) g[d] += w * qv[d];
        }
    };
    accumulate_context(batch.positive, grad_s[0]);
    for (size_t i = 0; i < batch.negatives.size(); ++i)
        accumulate_context(batch.negatives[i], grad_s[i + 1]);

    for (const auto& [row, g] : q_row_grads)
        for (size_t d = 0; d < dim; ++d) query_encoder.rows()[row][d] -= lr * g[d];
    for (const auto& [row, g] : c_row_grads)
        for (size_t d = 0; d < dim; ++d) context_encoder.rows()[row][d] -= lr * g[d];

    return loss;
}

std::vector<ScoredFragment> search_dense(const Encoder& query_encoder,
                                         const Encoder& context_encoder,
                                         const FragmentStore& store, const std::string& query,
                                         size_t k) {
    if (k < 1) throw Error("dense search needs k >= 1");
    std::vector<double> qv = query_encoder.encode(query);
    std::vector<ScoredFragment> ranked;
    ranked.reserve(store.size());
    for (const auto& frag : store.fragments()) {
        ranked.push_back({frag.id, sim(qv, context_encoder.encode(index_text(frag)))});
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredFragment& a, const ScoredFragment& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fragment_id < b.fragment_id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::vector<std::string> mine_in_file_hard_negatives(const std::string& prompt_text,
                                                     const Bm25Index& index,
                                                     const FragmentStore& store,
                                                     const std::set<std::string>& positive_ids,
                                                     size_t m) {
    if (m < 1) throw Error("hard negative mining needs m >= 1");
    const auto query = index_tokens(prompt_text);
    std::vector<ScoredFragment> ranked;
    for (const auto& frag : store.fragments()) {
        if (positive_ids.count(frag.id)) continue;
        ranked.push_back({frag.id, bm25_score(index, query, frag.id)});
    }
    if (ranked.size() < m) {
        throw InsufficientCorpus("store has " + std::to_string(ranked.size()) +
                                 " non-positive fragments, need " + std::to_string(m));
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredFragment& a, const ScoredFragment& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fragment_id < b.fragment_id;
    });
    ranked.resize(m);
    std::vector<std::string> texts;
    texts.reserve(m);
    for (const auto& r : ranked) texts.push_back(store.find(r.fragment_id)->text);
    return texts;
}

std::string Encoder::serialize() const {
    json doc;
    doc["format_version"] = kEncoderFormatVersion;
    doc["dim"] = dim_;
    json vocab = json::object();
    for (const auto& [term, idx] : vocab_) vocab[term] = idx;
    doc["vocab"] = std::move(vocab);
    json rows = json::array();
    for (const auto& row : embedding_) rows.push_back(row);
    doc["embedding"] = std::move(rows);
    return doc.dump();
}

Encoder Encoder::deserialize(const std::string& json_text) {
    json doc = json::parse(json_text);
    if (!doc.contains("format_version") ||
        doc["format_version"].get<int>() != kEncoderFormatVersion) {
        throw FormatVersionMismatch("encoder format version mismatch");
    }
    Encoder enc;
    enc.dim_ = doc.at("dim").get<size_t>();
    for (const auto& [term, idx] : doc.at("vocab").items()) enc.vocab_[term] = idx.get<size_t>();
    for (const auto& row : doc.at("embedding"))
        enc.embedding_.push_back(row.get<std::vector<double>>());
    if (enc.embedding_.size() != enc.vocab_.size())
        throw Error("encoder embedding row count does not match vocabulary");
    for (const auto& row : enc.embedding_) {
        if (row.size() != enc.dim_) throw Error("encoder embedding row has wrong dimension");
        for (double v : row)
            if (!std::isfinite(v)) throw Error("encoder embedding contains non-finite values");
    }
    return enc;
}

void Encoder::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write encoder: " + path);
    out << serialize();
}

Encoder Encoder::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read encoder: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace solmover
