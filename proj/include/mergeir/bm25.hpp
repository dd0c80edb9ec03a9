#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mergeir/error.hpp"
#include "mergeir/ir_data.hpp"
#include "mergeir/tokenizer.hpp"

namespace mergeir {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const {
        require(k1 > 0.0, "BM25 k1 must be > 0");
        require(b >= 0.0 && b <= 1.0, "BM25 b must be in [0,1]");
    }
};

/// Immutable inverted index over the tokenized corpus (title + " " + text,
/// untruncated interior term ids).
class Bm25Index {
  public:
    Bm25Index(const Corpus& corpus, const TokenizerSpec& spec) {
        doc_ids_.reserve(corpus.docs.size());
        std::unordered_map<std::uint32_t, std::uint32_t> tf;
        for (const auto& [id, doc] : corpus.docs) {
            const auto terms = term_ids(Corpus::full_text(doc), spec);
            const auto doc_idx = static_cast<std::uint32_t>(doc_ids_.size());
            doc_ids_.push_back(id);
            doc_len_.push_back(static_cast<std::uint32_t>(terms.size()));
            tf.clear();
            for (std::uint32_t t : terms) {
                ++tf[t];
            }
            for (const auto& [term, freq] : tf) {
                postings_[term].push_back({doc_idx, freq});
            }
        }
        double total = 0.0;
        for (std::uint32_t len : doc_len_) {
            total += len;
        }
        avgdl_ = doc_len_.empty() ? 0.0 : total / static_cast<double>(doc_len_.size());
    }

    std::size_t num_docs() const { return doc_ids_.size(); }
    double avgdl() const { return avgdl_; }

    /// score(q,d) = sum over distinct query terms t present in d of
    ///   idf(t) * tf*(k1+1) / (tf + k1*(1 - b + b*|d|/avgdl))
    /// with idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)). Documents sharing no
    /// term with the query are omitted.
    std::vector<ScoredDoc> score_query(const std::string& query_text,
                                       const Bm25Params& params,
                                       const TokenizerSpec& spec,
                                       std::size_t k) const {
        const auto n = static_cast<double>(num_docs());
        std::set<std::uint32_t> query_terms;
        for (std::uint32_t t : term_ids(query_text, spec)) {
            query_terms.insert(t);
        }
        std::unordered_map<std::uint32_t, double> acc;
        for (std::uint32_t term : query_terms) {
            auto it = postings_.find(term);
            if (it == postings_.end()) {
                continue;
            }
            const auto df = static_cast<double>(it->second.size());
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            for (const auto& [doc_idx, tf] : it->second) {
                const double f = tf;
                const double len_norm =
                    1.0 - params.b + params.b * doc_len_[doc_idx] / avgdl_;
                acc[doc_idx] +=
                    idf * (f * (params.k1 + 1.0)) / (f + params.k1 * len_norm);
            }
        }
        std::vector<ScoredDoc> docs;
        docs.reserve(acc.size());
        for (const auto& [doc_idx, score] : acc) {
            docs.push_back({doc_ids_[doc_idx], score});
        }
        sort_ranking(docs);
        if (docs.size() > k) {
            docs.resize(k);
        }
        return docs;
    }

  private:
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_len_;
    std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>>
        postings_;
    double avgdl_ = 0.0;
};

inline Run bm25_retrieve(const Corpus& corpus, const QuerySet& queries,
                         const Bm25Params& params, const TokenizerSpec& spec,
                         std::size_t k) {
    params.validate();
    spec.validate();
    require(k > 0, "k must be positive");
    const Bm25Index index(corpus, spec);
    Run run;
    run.tag = "bm25";
    for (const auto& [qid, text] : queries.queries) {
        run.rankings[qid] = index.score_query(text, params, spec, k);
    }
    return run;
}

}  // namespace mergeir
