#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mergeir/error.hpp"
#include "mergeir/ir_data.hpp"

namespace mergeir {

/// One metric value per evaluated query. Queries lacking a positive judgment
/// are excluded from evaluation and listed in excluded_queries.
struct PerQueryScores {
    std::string metric;
    std::map<std::string, double> scores;
    std::vector<std::string> excluded_queries;
};

/// nDCG@k with linear gain and log2(rank+1) discount. The evaluation universe
/// is every query with at least one positive judgment; such queries missing
/// from the run score zero.
inline PerQueryScores ndcg_at_k(const Run& run, const Qrels& qrels,
                                std::uint32_t k = 10) {
    require(k > 0, "k must be positive");
    PerQueryScores out;
    out.metric = "ndcg@" + std::to_string(k);

    std::set<std::string> mentioned;
    for (const auto& [qid, docs] : run.rankings) {
        mentioned.insert(qid);
    }
    for (const auto& [qid, judged] : qrels.judgments) {
        mentioned.insert(qid);
    }

    for (const auto& [qid, judged] : qrels.judgments) {
        std::vector<int> grades;
        grades.reserve(judged.size());
        bool any_positive = false;
        for (const auto& [did, g] : judged) {
            grades.push_back(g);
            any_positive = any_positive || g > 0;
        }
        if (!any_positive) {
            continue;
        }

        double dcg = 0.0;
        auto ranked = run.rankings.find(qid);
        if (ranked != run.rankings.end()) {
            const auto& docs = ranked->second;
            const std::size_t depth = std::min<std::size_t>(k, docs.size());
            for (std::size_t i = 0; i < depth; ++i) {
                const int g = qrels.grade(qid, docs[i].doc_id);
                dcg += g / std::log2(static_cast<double>(i) + 2.0);
            }
        }

        std::sort(grades.begin(), grades.end(), std::greater<int>());
        double idcg = 0.0;
        const std::size_t depth = std::min<std::size_t>(k, grades.size());
        for (std::size_t i = 0; i < depth; ++i) {
            idcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
        }
        out.scores[qid] = dcg / idcg;
    }

    for (const auto& qid : mentioned) {
        if (out.scores.find(qid) == out.scores.end()) {
            out.excluded_queries.push_back(qid);
        }
    }
    return out;
}

inline double mean_ndcg(const PerQueryScores& scores) {
    require(!scores.scores.empty(), "no evaluated queries");
    double sum = 0.0;
    for (const auto& [qid, s] : scores.scores) {
        sum += s;
    }
    return sum / static_cast<double>(scores.scores.size());
}

struct AggregateStats {
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation, divisor n-1
    std::size_t n = 0;
};

inline AggregateStats aggregate(const std::vector<double>& values) {
    require(!values.empty(), "aggregate over empty sequence");
    AggregateStats stats;
    stats.n = values.size();
    bool all_equal = true;
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        all_equal = all_equal && v == values.front();
    }
    stats.mean = sum / static_cast<double>(values.size());
    if (values.size() == 1 || all_equal) {
        stats.mean = values.front();
        stats.std_dev = 0.0;
        return stats;
    }
    double ss = 0.0;
    for (double v : values) {
        const double d = v - stats.mean;
        ss += d * d;
    }
    stats.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return stats;
}

namespace detail {

/// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) {
        d = fpmin;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) {
            break;
        }
    }
    return h;
}

/// Regularized incomplete beta I_x(a,b), absolute error well under 1e-8.
inline double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

/// Two-sided tail probability of Student's t with df degrees of freedom,
/// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
    require(df >= 1.0, "degrees of freedom must be >= 1");
    if (!std::isfinite(t)) {
        return 0.0;
    }
    const double x = df / (df + t * t);
    return detail::ibeta_reg(df / 2.0, 0.5, x);
}

struct TTestResult {
    double t_statistic = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;
    bool significant_at_5pct = false;
    bool degenerate = false;
};

/// Paired two-sided t-test over per-query score differences a_i - b_i.
/// Zero-variance inputs are flagged degenerate: all-zero differences give
/// p = 1, identical nonzero differences give p = 0 (t is +-infinity).
inline TTestResult paired_t_test(const PerQueryScores& a,
                                 const PerQueryScores& b) {
    require(a.scores.size() == b.scores.size(),
            "paired t-test: query sets differ in size (", a.scores.size(),
            " vs ", b.scores.size(), ")");
    std::vector<double> diffs;
    diffs.reserve(a.scores.size());
    auto ita = a.scores.begin();
    auto itb = b.scores.begin();
    for (; ita != a.scores.end(); ++ita, ++itb) {
        require(ita->first == itb->first,
                "paired t-test: query sets differ ('", ita->first, "' vs '",
                itb->first, "')");
        diffs.push_back(ita->second - itb->second);
    }
    const std::size_t n = diffs.size();
    require(n >= 2, "paired t-test needs at least 2 queries, got ", n);

    TTestResult r;
    r.degrees_of_freedom = n - 1;
    bool all_equal = true;
    double sum = 0.0;
    for (double d : diffs) {
        sum += d;
        all_equal = all_equal && d == diffs.front();
    }
    const double mean = sum / static_cast<double>(n);
    if (all_equal) {
        r.degenerate = true;
        if (diffs.front() == 0.0) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
            r.significant_at_5pct = false;
        } else {
            r.t_statistic = diffs.front() > 0.0
                                ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
            r.significant_at_5pct = true;
        }
        return r;
    }
    double ss = 0.0;
    for (double d : diffs) {
        ss += (d - mean) * (d - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p_value = student_t_two_sided_p(r.t_statistic, static_cast<double>(n - 1));
    r.significant_at_5pct = r.p_value < 0.05;
    return r;
}

}  // namespace mergeir
