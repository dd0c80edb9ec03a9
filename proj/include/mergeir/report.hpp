#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"

#include "mergeir/error.hpp"
#include "mergeir/evaluation.hpp"

// Rendering conventions for result tables: scores are reported x100 with
// two decimals, "*" marks p < 0.05, limited-data cells read "mean(std)".

namespace mergeir {

/// 0.4059 -> "40.59"
inline std::string format_pct(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

/// 0.4059 with a significant difference -> "40.59*"
inline std::string score_cell(double fraction, bool star) {
    return format_pct(fraction) + (star ? "*" : "");
}

/// (0.3609, 0.0456) -> "36.09(4.56)"
inline std::string mean_std_cell(double mean_fraction, double std_fraction) {
    return format_pct(mean_fraction) + "(" + format_pct(std_fraction) + ")";
}

inline std::string format_alpha(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", alpha);
    return buf;
}

/// One result row in the style of the source-vs-merged table, e.g.
/// "NFCorpus 39.02 → 40.59, α_lower 0.75, α_upper 1.00"
inline std::string result_row(const std::string& dataset, double source_fraction,
                              double merged_fraction, double alpha_lower,
                              double alpha_upper, bool star = false) {
    return dataset + " " + format_pct(source_fraction) + " → " +
           score_cell(merged_fraction, star) + ", α_lower " +
           format_alpha(alpha_lower) + ", α_upper " +
           format_alpha(alpha_upper);
}

inline nlohmann::json ttest_to_json(const TTestResult& t) {
    nlohmann::json j;
    if (std::isfinite(t.t_statistic)) {
        j["t_statistic"] = t.t_statistic;
    } else {
        j["t_statistic"] = t.t_statistic > 0 ? "inf" : "-inf";
    }
    j["degrees_of_freedom"] = t.degrees_of_freedom;
    j["p_value"] = t.p_value;
    j["significant_at_5pct"] = t.significant_at_5pct;
    j["degenerate"] = t.degenerate;
    return j;
}

inline nlohmann::json evaluation_report_json(const PerQueryScores& scores,
                                             std::uint32_t k) {
    nlohmann::json j;
    j["metric"] = scores.metric;
    j["k"] = k;
    j["per_query"] = nlohmann::json::object();
    for (const auto& [qid, s] : scores.scores) {
        j["per_query"][qid] = s;
    }
    j["mean"] = mean_ndcg(scores);
    j["excluded_queries"] = scores.excluded_queries;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    require(out.good(), "cannot open '", path, "' for writing");
    out << content;
    require(out.good(), "write to '", path, "' failed");
}

}  // namespace mergeir
