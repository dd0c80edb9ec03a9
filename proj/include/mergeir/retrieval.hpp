#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mergeir/encoder.hpp"
#include "mergeir/error.hpp"
#include "mergeir/ir_data.hpp"
#include "mergeir/parallel.hpp"

namespace mergeir {

/// Document embeddings in corpus (map) order; reusable across query sets.
struct CorpusEmbeddings {
    std::vector<std::string> doc_ids;
    std::vector<Embedding> embeddings;
};

inline CorpusEmbeddings embed_corpus(const TensorArchive& archive,
                                     const EncoderConfig& config,
                                     const TokenizerSpec& spec,
                                     const Corpus& corpus,
                                     unsigned threads = default_threads()) {
    CorpusEmbeddings ce;
    std::vector<std::string> texts;
    texts.reserve(corpus.docs.size());
    for (const auto& [id, doc] : corpus.docs) {
        ce.doc_ids.push_back(id);
        texts.push_back(Corpus::full_text(doc));
    }
    ce.embeddings = encode_batch(archive, config, spec, texts, threads);
    return ce;
}

/// Exhaustive cosine top-k over precomputed document embeddings. The query
/// prefix from the config is applied to query texts only.
inline Run dense_retrieve_precomputed(const TensorArchive& archive,
                                      const EncoderConfig& config,
                                      const TokenizerSpec& spec,
                                      const CorpusEmbeddings& docs,
                                      const QuerySet& queries, std::size_t k,
                                      unsigned threads = default_threads()) {
    require(k > 0, "k must be positive");
    std::vector<std::string> qids;
    std::vector<std::string> texts;
    qids.reserve(queries.queries.size());
    for (const auto& [qid, text] : queries.queries) {
        qids.push_back(qid);
        texts.push_back(config.query_prefix + text);
    }
    const auto query_embs = encode_batch(archive, config, spec, texts, threads);

    Run run;
    run.tag = "dense";
    std::vector<std::vector<ScoredDoc>> per_query(qids.size());
    parallel_for(qids.size(), threads, [&](std::size_t qi) {
        std::vector<ScoredDoc> scored(docs.doc_ids.size());
        for (std::size_t d = 0; d < docs.doc_ids.size(); ++d) {
            scored[d].doc_id = docs.doc_ids[d];
            scored[d].score = dot(query_embs[qi], docs.embeddings[d]);
        }
        const std::size_t keep = std::min(k, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                          scored_before);
        scored.resize(keep);
        per_query[qi] = std::move(scored);
    });
    for (std::size_t qi = 0; qi < qids.size(); ++qi) {
        run.rankings[qids[qi]] = std::move(per_query[qi]);
    }
    return run;
}

inline Run dense_retrieve(const TensorArchive& archive,
                          const EncoderConfig& config, const TokenizerSpec& spec,
                          const Corpus& corpus, const QuerySet& queries,
                          std::size_t k, unsigned threads = default_threads()) {
    const auto docs = embed_corpus(archive, config, spec, corpus, threads);
    return dense_retrieve_precomputed(archive, config, spec, docs, queries, k,
                                      threads);
}

struct MiningResult {
    /// Per query, the first n ranked docs judged 0 or unjudged.
    std::map<std::string, std::vector<std::string>> negatives;
    /// Queries absent from the qrels (all their docs counted as unjudged).
    std::vector<std::string> warnings;
};

inline MiningResult mine_hard_negatives(const Run& run, const Qrels& qrels,
                                        std::size_t n = 30) {
    require(n > 0, "n must be positive");
    MiningResult result;
    for (const auto& [qid, docs] : run.rankings) {
        if (qrels.judgments.find(qid) == qrels.judgments.end()) {
            result.warnings.push_back(qid);
        }
        auto& negatives = result.negatives[qid];
        for (const auto& sd : docs) {
            if (negatives.size() >= n) {
                break;
            }
            if (qrels.grade(qid, sd.doc_id) == 0) {
                negatives.push_back(sd.doc_id);
            }
        }
    }
    return result;
}

}  // namespace mergeir
