#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mergeir/ir_data.hpp"

// Independent oracles for the derived expected values. These deliberately
// avoid the library's code paths: nDCG enumerates ideal orderings by
// permutation, BM25 scans raw token lists with no index, the Student-t CDF
// comes from Boost.Math, and top-k is a full sort.

namespace oracles {

/// DCG of a ranked grade sequence at cutoff k.
inline double dcg_at_k(const std::vector<int>& grades, std::size_t k) {
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
        dcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg;
}

/// nDCG with the ideal ordering found by brute-force permutation of the
/// judged documents (feasible for <= 8 judged docs).
inline double ndcg_brute_force(const std::vector<std::string>& ranked_docs,
                               const std::map<std::string, int>& judgments,
                               std::size_t k) {
    std::vector<int> ranked_grades;
    for (const auto& did : ranked_docs) {
        auto it = judgments.find(did);
        ranked_grades.push_back(it == judgments.end() ? 0 : it->second);
    }
    const double dcg = dcg_at_k(ranked_grades, k);

    std::vector<int> grades;
    for (const auto& [did, g] : judgments) {
        grades.push_back(g);
    }
    std::sort(grades.begin(), grades.end());
    double ideal = 0.0;
    do {
        ideal = std::max(ideal, dcg_at_k(grades, k));
    } while (std::next_permutation(grades.begin(), grades.end()));
    return dcg / ideal;
}

/// BM25 from the raw formula over tokenized documents; no inverted index.
/// Documents are token-id lists; the query contributes each distinct term
/// once.
inline double bm25_brute_force(
    const std::vector<std::vector<std::uint32_t>>& docs,
    const std::vector<std::uint32_t>& query_terms, std::size_t doc_index,
    double k1, double b) {
    const auto n_docs = static_cast<double>(docs.size());
    double total_len = 0.0;
    for (const auto& d : docs) {
        total_len += static_cast<double>(d.size());
    }
    const double avgdl = total_len / n_docs;

    std::vector<std::uint32_t> distinct = query_terms;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    double score = 0.0;
    for (std::uint32_t term : distinct) {
        double df = 0.0;
        for (const auto& d : docs) {
            df += std::count(d.begin(), d.end(), term) > 0 ? 1.0 : 0.0;
        }
        if (df == 0.0) {
            continue;
        }
        const double tf = static_cast<double>(
            std::count(docs[doc_index].begin(), docs[doc_index].end(), term));
        if (tf == 0.0) {
            continue;
        }
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        const double dl = static_cast<double>(docs[doc_index].size());
        score += idf * (tf * (k1 + 1.0)) /
                 (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    return score;
}

/// Two-sided Student-t tail probability via Boost.Math.
inline double student_t_two_sided_p(double t, double df) {
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

/// Exact top-k by full sort under the (score desc, doc_id asc) law.
inline std::vector<mergeir::ScoredDoc> top_k_full_sort(
    std::vector<mergeir::ScoredDoc> scored, std::size_t k) {
    std::sort(scored.begin(), scored.end(), mergeir::scored_before);
    if (scored.size() > k) {
        scored.resize(k);
    }
    return scored;
}

}  // namespace oracles
