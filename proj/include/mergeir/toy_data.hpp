#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "mergeir/error.hpp"
#include "mergeir/ir_data.hpp"
#include "mergeir/report.hpp"
#include "mergeir/rng.hpp"

// Seeded synthetic retrieval data for desk-scale experiments: pseudo-word
// documents, queries built from topic words that get injected into their
// relevant documents, graded judgments plus a few explicit zero grades.

namespace mergeir {

struct SyntheticSpec {
    std::uint32_t n_docs = 500;
    std::uint32_t n_dev_queries = 50;
    std::uint32_t n_test_queries = 30;
    std::uint32_t vocab_words = 400;
    std::uint64_t seed = 0;

    void validate() const {
        require(n_docs >= 10, "synthetic corpus needs at least 10 docs");
        require(n_dev_queries > 0 && n_test_queries > 0,
                "query counts must be positive");
        require(vocab_words >= 20, "vocabulary too small");
    }
};

struct SyntheticDataset {
    Corpus corpus;
    QuerySet dev_queries;
    Qrels dev_qrels;
    QuerySet test_queries;
    Qrels test_qrels;
};

namespace detail {

inline std::vector<std::string> make_word_list(std::uint32_t count,
                                               Xoshiro256& rng) {
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        const std::size_t len = 3 + rng.below(6);
        std::string w;
        for (std::size_t i = 0; i < len; ++i) {
            w.push_back(static_cast<char>('a' + rng.below(26)));
        }
        if (seen.insert(w).second) {
            words.push_back(w);
        }
    }
    return words;
}

inline std::string doc_id_of(std::uint32_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%04u", i);
    return buf;
}

inline std::string join_words(const std::vector<std::string>& ws) {
    std::string out;
    for (const auto& w : ws) {
        if (!out.empty()) {
            out += " ";
        }
        out += w;
    }
    return out;
}

inline void add_query(const std::string& qid, QuerySet& queries, Qrels& qrels,
                      std::vector<std::vector<std::string>>& doc_words,
                      const std::vector<std::string>& vocab, Xoshiro256& rng) {
    const std::size_t n_topic = 2 + rng.below(2);
    std::vector<std::string> topic;
    for (std::size_t t = 0; t < n_topic; ++t) {
        topic.push_back(vocab[rng.below(vocab.size())]);
    }
    queries.queries[qid] = join_words(topic);

    const std::size_t n_rel = 1 + rng.below(3);
    std::set<std::size_t> rel_docs;
    while (rel_docs.size() < n_rel) {
        rel_docs.insert(rng.below(doc_words.size()));
    }
    for (std::size_t d : rel_docs) {
        auto& words = doc_words[d];
        for (const auto& w : topic) {
            words.insert(words.begin() + rng.below(words.size() + 1), w);
        }
        qrels.judgments[qid][doc_id_of(static_cast<std::uint32_t>(d))] =
            static_cast<int>(1 + rng.below(2));
    }
    // a couple of explicit non-relevant judgments
    std::size_t zeros = 0;
    while (zeros < 2) {
        const std::size_t d = rng.below(doc_words.size());
        if (rel_docs.count(d)) {
            continue;
        }
        auto& judged = qrels.judgments[qid];
        const std::string did = doc_id_of(static_cast<std::uint32_t>(d));
        if (!judged.count(did)) {
            judged[did] = 0;
            ++zeros;
        }
    }
}

}  // namespace detail

inline SyntheticDataset make_synthetic_dataset(const SyntheticSpec& spec) {
    spec.validate();
    Xoshiro256 rng(spec.seed ^ 0x746f79646174610aull);

    const auto vocab = detail::make_word_list(spec.vocab_words, rng);
    std::vector<std::vector<std::string>> doc_words(spec.n_docs);
    for (auto& words : doc_words) {
        const std::size_t len = 8 + rng.below(18);
        for (std::size_t i = 0; i < len; ++i) {
            words.push_back(vocab[rng.below(vocab.size())]);
        }
    }

    SyntheticDataset data;
    for (std::uint32_t q = 0; q < spec.n_dev_queries; ++q) {
        char qid[16];
        std::snprintf(qid, sizeof(qid), "qd%03u", q);
        detail::add_query(qid, data.dev_queries, data.dev_qrels, doc_words,
                          vocab, rng);
    }
    for (std::uint32_t q = 0; q < spec.n_test_queries; ++q) {
        char qid[16];
        std::snprintf(qid, sizeof(qid), "qt%03u", q);
        detail::add_query(qid, data.test_queries, data.test_qrels, doc_words,
                          vocab, rng);
    }

    for (std::uint32_t d = 0; d < spec.n_docs; ++d) {
        DocEntry entry;
        if (d % 3 == 0) {
            entry.title = vocab[rng.below(vocab.size())];
        }
        entry.text = detail::join_words(doc_words[d]);
        data.corpus.docs[detail::doc_id_of(d)] = std::move(entry);
    }
    return data;
}

namespace detail {

inline void write_jsonl_queries(const QuerySet& qs, const std::string& path) {
    std::string out;
    for (const auto& [qid, text] : qs.queries) {
        nlohmann::json j;
        j["_id"] = qid;
        j["text"] = text;
        out += j.dump() + "\n";
    }
    write_text_file(path, out);
}

inline void write_qrels(const Qrels& qrels, const std::string& path) {
    std::string out;
    for (const auto& [qid, judged] : qrels.judgments) {
        for (const auto& [did, grade] : judged) {
            out += qid + " 0 " + did + " " + std::to_string(grade) + "\n";
        }
    }
    write_text_file(path, out);
}

}  // namespace detail

/// Writes corpus.jsonl, {dev,test}_queries.jsonl and {dev,test}.qrels.
inline void write_synthetic_dataset(const SyntheticDataset& data,
                                    const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto at = [&](const std::string& name) {
        return (std::filesystem::path(dir) / name).string();
    };
    std::string corpus;
    for (const auto& [id, doc] : data.corpus.docs) {
        nlohmann::json j;
        j["_id"] = id;
        j["title"] = doc.title;
        j["text"] = doc.text;
        corpus += j.dump() + "\n";
    }
    write_text_file(at("corpus.jsonl"), corpus);
    detail::write_jsonl_queries(data.dev_queries, at("dev_queries.jsonl"));
    detail::write_jsonl_queries(data.test_queries, at("test_queries.jsonl"));
    detail::write_qrels(data.dev_qrels, at("dev.qrels"));
    detail::write_qrels(data.test_qrels, at("test.qrels"));
}

}  // namespace mergeir
