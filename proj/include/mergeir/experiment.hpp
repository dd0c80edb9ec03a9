#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mergeir/archive_io.hpp"
#include "mergeir/encoder.hpp"
#include "mergeir/error.hpp"
#include "mergeir/evaluation.hpp"
#include "mergeir/ir_data.hpp"
#include "mergeir/merge.hpp"
#include "mergeir/report.hpp"
#include "mergeir/retrieval.hpp"
#include "mergeir/rng.hpp"

namespace mergeir {

/// Coefficient grid for (alpha_lower, alpha_upper). Defaults reproduce the
/// 5x5 grid minus the two unmerged-endpoint configurations (23 remain).
struct GridSearchConfig {
    std::vector<double> alpha_values = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::pair<double, double>> excluded = {{0.0, 0.0}, {1.0, 1.0}};
    std::uint32_t k = 10;

    void validate() const {
        require(!alpha_values.empty(), "grid: alpha_values is empty");
        for (double a : alpha_values) {
            require(a >= 0.0 && a <= 1.0, "grid: alpha ", a, " out of [0,1]");
        }
        auto sorted = alpha_values;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            require(sorted[i] != sorted[i + 1], "grid: duplicate alpha value ",
                    sorted[i]);
        }
        auto in_values = [&](double a) {
            return std::find(alpha_values.begin(), alpha_values.end(), a) !=
                   alpha_values.end();
        };
        for (const auto& [al, au] : excluded) {
            require(in_values(al) && in_values(au),
                    "grid: excluded pair (", al, ", ", au,
                    ") is not in the grid");
        }
        require(alpha_values.size() * alpha_values.size() > excluded.size(),
                "grid: all configurations excluded");
    }

    std::uint32_t k_cutoff() const { return k; }
};

inline nlohmann::json grid_config_to_json(const GridSearchConfig& g) {
    nlohmann::json j;
    j["alpha_values"] = g.alpha_values;
    j["excluded"] = nlohmann::json::array();
    for (const auto& [al, au] : g.excluded) {
        j["excluded"].push_back({al, au});
    }
    j["k"] = g.k;
    return j;
}

inline GridSearchConfig grid_config_from_json(const nlohmann::json& j) {
    GridSearchConfig g;
    require(j.is_object(), "grid_search must be a JSON object");
    if (j.contains("alpha_values")) {
        g.alpha_values = j["alpha_values"].get<std::vector<double>>();
    }
    if (j.contains("excluded")) {
        g.excluded.clear();
        for (const auto& pair : j["excluded"]) {
            require(pair.is_array() && pair.size() == 2,
                    "grid_search.excluded entries must be [alpha_lower, alpha_upper]");
            g.excluded.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
    }
    if (j.contains("k")) {
        g.k = j["k"].get<std::uint32_t>();
    }
    g.validate();
    return g;
}

/// Cartesian product in row-major order (alpha_lower outer, both ascending),
/// with excluded pairs removed.
inline std::vector<std::pair<double, double>> enumerate_grid(
    const GridSearchConfig& config) {
    config.validate();
    auto values = config.alpha_values;
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> pairs;
    for (double al : values) {
        for (double au : values) {
            bool skip = false;
            for (const auto& [xl, xu] : config.excluded) {
                if (xl == al && xu == au) {
                    skip = true;
                    break;
                }
            }
            if (!skip) {
                pairs.emplace_back(al, au);
            }
        }
    }
    return pairs;
}

struct ConfigScore {
    double alpha_lower = 0.0;
    double alpha_upper = 0.0;
    double dev_ndcg = 0.0;
};

/// Argmax over dev score with the documented tie-break: prefer the larger
/// alpha_upper, then the larger alpha_lower.
inline std::size_t select_best(const std::vector<ConfigScore>& scores) {
    require(!scores.empty(), "grid search produced no configurations");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        const auto& cur = scores[i];
        const auto& win = scores[best];
        const bool better =
            cur.dev_ndcg > win.dev_ndcg ||
            (cur.dev_ndcg == win.dev_ndcg &&
             (cur.alpha_upper > win.alpha_upper ||
              (cur.alpha_upper == win.alpha_upper &&
               cur.alpha_lower > win.alpha_lower)));
        if (better) {
            best = i;
        }
    }
    return best;
}

struct GridSearchReport {
    std::vector<ConfigScore> per_config;  // grid order
    double selected_alpha_lower = 0.0;
    double selected_alpha_upper = 0.0;
    double dev_ndcg_selected = 0.0;
    std::optional<double> test_ndcg_selected;
    std::optional<double> test_ndcg_source;
    std::optional<TTestResult> test_vs_source;
};

struct LimitedRunRecord {
    std::uint64_t sample_seed = 0;
    double alpha_lower = 0.0;
    double alpha_upper = 0.0;
    double dev_ndcg = 0.0;
    double test_ndcg = 0.0;
};

struct LimitedDataReport {
    std::uint32_t n_queries = 50;
    std::uint32_t n_runs = 10;
    std::vector<LimitedRunRecord> runs;
    AggregateStats stats;  // over per-run test_ndcg
};

/// All inputs of one experiment, by path. Relative paths are resolved
/// against the manifest file's directory.
struct ExperimentManifest {
    std::string retrieval_archive;
    std::string domain_archive;
    std::string encoder_config;
    std::string corpus;
    std::string dev_queries;
    std::string dev_qrels;
    std::string test_queries;
    std::string test_qrels;
    GridSearchConfig grid_search;
    std::string output_dir;
    std::uint64_t seed = 0;
};

inline ExperimentManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open '", path, "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path, ": invalid JSON: ", e.what());
    }
    static const char* kPathFields[] = {
        "retrieval_archive", "domain_archive", "encoder_config", "corpus",
        "dev_queries",       "dev_qrels",      "test_queries",   "test_qrels"};
    for (const char* field : kPathFields) {
        require(j.contains(field) && j[field].is_string(), path,
                ": missing path field \"", field, "\"");
    }
    require(j.contains("output_dir") && j["output_dir"].is_string(), path,
            ": missing field \"output_dir\"");
    require(j.contains("seed") && j["seed"].is_number_unsigned(), path,
            ": missing unsigned field \"seed\"");
    require(j.contains("grid_search"), path, ": missing field \"grid_search\"");
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> known = {
            "retrieval_archive", "domain_archive", "encoder_config", "corpus",
            "dev_queries",       "dev_qrels",      "test_queries",   "test_qrels",
            "grid_search",       "output_dir",     "seed"};
        require(known.count(key) != 0, path, ": unknown manifest field \"", key,
                "\"");
    }

    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    ExperimentManifest m;
    m.retrieval_archive = resolve(j["retrieval_archive"].get<std::string>());
    m.domain_archive = resolve(j["domain_archive"].get<std::string>());
    m.encoder_config = resolve(j["encoder_config"].get<std::string>());
    m.corpus = resolve(j["corpus"].get<std::string>());
    m.dev_queries = resolve(j["dev_queries"].get<std::string>());
    m.dev_qrels = resolve(j["dev_qrels"].get<std::string>());
    m.test_queries = resolve(j["test_queries"].get<std::string>());
    m.test_qrels = resolve(j["test_qrels"].get<std::string>());
    m.grid_search = grid_config_from_json(j["grid_search"]);
    m.output_dir = resolve(j["output_dir"].get<std::string>());
    m.seed = j["seed"].get<std::uint64_t>();
    return m;
}

inline nlohmann::json manifest_to_json(const ExperimentManifest& m) {
    nlohmann::json j;
    j["retrieval_archive"] = m.retrieval_archive;
    j["domain_archive"] = m.domain_archive;
    j["encoder_config"] = m.encoder_config;
    j["corpus"] = m.corpus;
    j["dev_queries"] = m.dev_queries;
    j["dev_qrels"] = m.dev_qrels;
    j["test_queries"] = m.test_queries;
    j["test_qrels"] = m.test_qrels;
    j["grid_search"] = grid_config_to_json(m.grid_search);
    j["output_dir"] = m.output_dir;
    j["seed"] = m.seed;
    return j;
}

/// Manifest inputs loaded into memory. The merge boundary is the layer-count
/// midpoint, mirroring the 32-layer/16th-layer split at toy scale.
struct Experiment {
    ExperimentManifest manifest;
    TensorArchive retrieval;
    TensorArchive domain;
    EncoderConfig config;
    TokenizerSpec tokenizer;
    LayerPartition partition;
    Corpus corpus;
    QuerySet dev_queries;
    Qrels dev_qrels;
    QuerySet test_queries;
    Qrels test_qrels;
};

inline Experiment load_experiment(const ExperimentManifest& manifest) {
    Experiment e;
    e.manifest = manifest;
    e.retrieval = load_archive(manifest.retrieval_archive);
    e.domain = load_archive(manifest.domain_archive);
    e.config = load_encoder_config(manifest.encoder_config);
    e.tokenizer = e.config.tokenizer();
    require(e.config.n_layers >= 2,
            "grid search needs n_layers >= 2 to place the segment boundary");
    e.partition = LayerPartition{e.config.n_layers, e.config.n_layers / 2};
    e.corpus = load_corpus(manifest.corpus);
    e.dev_queries = load_queries(manifest.dev_queries);
    e.dev_qrels = load_qrels(manifest.dev_qrels);
    e.test_queries = load_queries(manifest.test_queries);
    e.test_qrels = load_qrels(manifest.test_qrels);
    require(!e.dev_qrels.judgments.empty(), manifest.dev_qrels,
            ": dev qrels are empty");
    return e;
}

inline MergeSpec merge_spec_for(const Experiment& e, double alpha_lower,
                                double alpha_upper) {
    MergeSpec spec;
    spec.alpha_lower = alpha_lower;
    spec.alpha_upper = alpha_upper;
    spec.partition = e.partition;
    return spec;
}

/// Uniform sample of n query ids without replacement (all of them when
/// n >= |full|), with the qrels restricted to the sampled ids.
inline std::pair<QuerySet, Qrels> sample_dev_queries(const QuerySet& full,
                                                     const Qrels& qrels,
                                                     std::size_t n,
                                                     std::uint64_t seed) {
    std::vector<std::string> qids;
    qids.reserve(full.queries.size());
    for (const auto& [qid, text] : full.queries) {
        qids.push_back(qid);
    }
    const auto picked = sample_indices(qids.size(), n, seed);
    QuerySet sampled;
    Qrels restricted;
    for (std::size_t idx : picked) {
        const auto& qid = qids[idx];
        sampled.queries[qid] = full.queries.at(qid);
        auto it = qrels.judgments.find(qid);
        if (it != qrels.judgments.end()) {
            restricted.judgments[qid] = it->second;
        }
    }
    return {std::move(sampled), std::move(restricted)};
}

namespace detail {

/// Dev and test outcomes of one merged configuration.
struct ConfigEvaluation {
    PerQueryScores dev_scores;   // over the full dev query set
    PerQueryScores test_scores;  // over the test query set
};

inline ConfigEvaluation evaluate_config(const Experiment& e, double alpha_lower,
                                        double alpha_upper, unsigned threads) {
    const auto merged =
        merge_archives(e.retrieval, e.domain, merge_spec_for(e, alpha_lower, alpha_upper));
    const auto docs = embed_corpus(merged, e.config, e.tokenizer, e.corpus, threads);
    const auto k = e.manifest.grid_search.k;
    ConfigEvaluation eval;
    const Run dev_run = dense_retrieve_precomputed(merged, e.config, e.tokenizer,
                                                   docs, e.dev_queries, k, threads);
    eval.dev_scores = ndcg_at_k(dev_run, e.dev_qrels, k);
    const Run test_run = dense_retrieve_precomputed(
        merged, e.config, e.tokenizer, docs, e.test_queries, k, threads);
    eval.test_scores = ndcg_at_k(test_run, e.test_qrels, k);
    return eval;
}

/// Mean of the cached per-query dev scores restricted to a sampled query set;
/// queries without positive judgments are simply absent from the cache.
inline double mean_over_sample(const PerQueryScores& cached,
                               const QuerySet& sample) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [qid, text] : sample.queries) {
        auto it = cached.scores.find(qid);
        if (it != cached.scores.end()) {
            sum += it->second;
            ++count;
        }
    }
    require(count > 0, "empty effective dev set: no sampled query has a "
                       "positive judgment");
    return sum / static_cast<double>(count);
}

}  // namespace detail

/// The full-data protocol: score every grid configuration on the dev set,
/// select the argmax, evaluate it (and the unmerged retrieval source) on the
/// test set with a paired significance test.
inline GridSearchReport grid_search(const Experiment& e,
                                    unsigned threads = default_threads()) {
    const auto pairs = enumerate_grid(e.manifest.grid_search);
    GridSearchReport report;

    std::optional<PerQueryScores> selected_test_scores;
    std::size_t best = 0;
    std::vector<detail::ConfigEvaluation> evals;
    evals.reserve(pairs.size());
    for (const auto& [al, au] : pairs) {
        auto eval = detail::evaluate_config(e, al, au, threads);
        ConfigScore cs{al, au, mean_ndcg(eval.dev_scores)};
        report.per_config.push_back(cs);
        evals.push_back(std::move(eval));
    }
    best = select_best(report.per_config);
    report.selected_alpha_lower = report.per_config[best].alpha_lower;
    report.selected_alpha_upper = report.per_config[best].alpha_upper;
    report.dev_ndcg_selected = report.per_config[best].dev_ndcg;
    selected_test_scores = evals[best].test_scores;
    report.test_ndcg_selected = mean_ndcg(*selected_test_scores);

    // Source comparison: the unmerged retrieval archive on the same test set.
    const auto docs =
        embed_corpus(e.retrieval, e.config, e.tokenizer, e.corpus, threads);
    const Run source_run =
        dense_retrieve_precomputed(e.retrieval, e.config, e.tokenizer, docs,
                                   e.test_queries, e.manifest.grid_search.k, threads);
    const auto source_scores =
        ndcg_at_k(source_run, e.test_qrels, e.manifest.grid_search.k);
    report.test_ndcg_source = mean_ndcg(source_scores);
    report.test_vs_source = paired_t_test(*selected_test_scores, source_scores);
    return report;
}

/// The limited-data protocol: n_runs resamples of n_queries dev queries, a
/// full grid selection per sample, test evaluation of each selection, and
/// mean/std aggregation. Per-config per-query dev scores are computed once
/// over the full dev set; each run's selection re-derives its dev means from
/// its own sample (per-query retrieval is independent, so this is identical
/// to retrieving per sample).
inline LimitedDataReport run_limited_data(const Experiment& e,
                                          std::uint32_t n_queries = 50,
                                          std::uint32_t n_runs = 10,
                                          unsigned threads = default_threads()) {
    require(n_queries > 0 && n_runs > 0, "n_queries and n_runs must be positive");
    const auto pairs = enumerate_grid(e.manifest.grid_search);

    std::vector<detail::ConfigEvaluation> evals;
    std::vector<double> test_means;
    evals.reserve(pairs.size());
    for (const auto& [al, au] : pairs) {
        evals.push_back(detail::evaluate_config(e, al, au, threads));
        test_means.push_back(mean_ndcg(evals.back().test_scores));
    }

    LimitedDataReport report;
    report.n_queries = n_queries;
    report.n_runs = n_runs;
    std::vector<double> per_run_test;
    for (std::uint32_t r = 1; r <= n_runs; ++r) {
        const std::uint64_t sample_seed = e.manifest.seed + r;
        const auto [sample, sample_qrels] =
            sample_dev_queries(e.dev_queries, e.dev_qrels, n_queries, sample_seed);
        std::vector<ConfigScore> scores;
        scores.reserve(pairs.size());
        for (std::size_t c = 0; c < pairs.size(); ++c) {
            scores.push_back({pairs[c].first, pairs[c].second,
                              detail::mean_over_sample(evals[c].dev_scores, sample)});
        }
        const std::size_t best = select_best(scores);
        LimitedRunRecord rec;
        rec.sample_seed = sample_seed;
        rec.alpha_lower = scores[best].alpha_lower;
        rec.alpha_upper = scores[best].alpha_upper;
        rec.dev_ndcg = scores[best].dev_ndcg;
        rec.test_ndcg = test_means[best];
        report.runs.push_back(rec);
        per_run_test.push_back(rec.test_ndcg);
    }
    report.stats = aggregate(per_run_test);
    return report;
}

/// Per-query nDCG@k for two runs over one qrels, paired t-test, star when
/// the difference is significant at the 5% level.
struct SignificanceReport {
    std::string metric;
    std::uint32_t k = 10;
    std::size_t n = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    TTestResult ttest;
    bool star = false;
};

inline SignificanceReport compare_systems(const Run& run_a, const Run& run_b,
                                          const Qrels& qrels,
                                          std::uint32_t k = 10) {
    SignificanceReport rep;
    const auto a = ndcg_at_k(run_a, qrels, k);
    const auto b = ndcg_at_k(run_b, qrels, k);
    rep.metric = a.metric;
    rep.k = k;
    rep.n = a.scores.size();
    rep.mean_a = mean_ndcg(a);
    rep.mean_b = mean_ndcg(b);
    rep.ttest = paired_t_test(a, b);
    rep.star = rep.ttest.significant_at_5pct;
    return rep;
}

// ---- report serialization ----

inline nlohmann::json grid_report_to_json(const GridSearchReport& r) {
    nlohmann::json j;
    j["per_config"] = nlohmann::json::array();
    for (const auto& cs : r.per_config) {
        j["per_config"].push_back({{"alpha_lower", cs.alpha_lower},
                                   {"alpha_upper", cs.alpha_upper},
                                   {"dev_ndcg", cs.dev_ndcg}});
    }
    j["selected"] = {{"alpha_lower", r.selected_alpha_lower},
                     {"alpha_upper", r.selected_alpha_upper}};
    j["dev_ndcg_selected"] = r.dev_ndcg_selected;
    if (r.test_ndcg_selected) {
        j["test_ndcg_selected"] = *r.test_ndcg_selected;
    }
    if (r.test_ndcg_source) {
        j["test_ndcg_source"] = *r.test_ndcg_source;
    }
    if (r.test_vs_source) {
        j["test_vs_source"] = ttest_to_json(*r.test_vs_source);
    }
    return j;
}

inline std::string grid_report_table(const GridSearchReport& r,
                                     const std::string& dataset,
                                     std::uint32_t k) {
    std::string out;
    out += "alpha_lower  alpha_upper  dev_nDCG@" + std::to_string(k) + "\n";
    for (const auto& cs : r.per_config) {
        out += format_alpha(cs.alpha_lower) + "         " +
               format_alpha(cs.alpha_upper) + "         " +
               format_pct(cs.dev_ndcg) + "\n";
    }
    out += "selected: alpha_lower " + format_alpha(r.selected_alpha_lower) +
           ", alpha_upper " + format_alpha(r.selected_alpha_upper) +
           " (dev nDCG@" + std::to_string(k) + " " +
           format_pct(r.dev_ndcg_selected) + ")\n";
    if (r.test_ndcg_selected && r.test_ndcg_source) {
        const bool star = r.test_vs_source && r.test_vs_source->significant_at_5pct;
        out += result_row(dataset, *r.test_ndcg_source, *r.test_ndcg_selected,
                          r.selected_alpha_lower, r.selected_alpha_upper, star) +
               "\n";
    }
    return out;
}

inline nlohmann::json limited_report_to_json(const LimitedDataReport& r) {
    nlohmann::json j;
    j["n_queries"] = r.n_queries;
    j["n_runs"] = r.n_runs;
    j["runs"] = nlohmann::json::array();
    for (const auto& rec : r.runs) {
        j["runs"].push_back({{"sample_seed", rec.sample_seed},
                             {"selected",
                              {{"alpha_lower", rec.alpha_lower},
                               {"alpha_upper", rec.alpha_upper}}},
                             {"dev_ndcg", rec.dev_ndcg},
                             {"test_ndcg", rec.test_ndcg}});
    }
    j["stats"] = {{"mean", r.stats.mean},
                  {"std", r.stats.std_dev},
                  {"n", r.stats.n}};
    return j;
}

inline std::string limited_report_table(const LimitedDataReport& r,
                                        std::uint32_t k) {
    std::string out;
    out += "run  sample_seed  alpha_lower  alpha_upper  test_nDCG@" +
           std::to_string(k) + "\n";
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const auto& rec = r.runs[i];
        out += std::to_string(i + 1) + "  " + std::to_string(rec.sample_seed) +
               "  " + format_alpha(rec.alpha_lower) + "  " +
               format_alpha(rec.alpha_upper) + "  " + format_pct(rec.test_ndcg) +
               "\n";
    }
    out += "limited-data (n_queries=" + std::to_string(r.n_queries) +
           ", runs=" + std::to_string(r.n_runs) +
           "): " + mean_std_cell(r.stats.mean, r.stats.std_dev) + "\n";
    return out;
}

inline nlohmann::json significance_report_to_json(const SignificanceReport& r) {
    nlohmann::json j = ttest_to_json(r.ttest);
    j["metric"] = r.metric;
    j["k"] = r.k;
    j["n"] = r.n;
    j["mean_a"] = r.mean_a;
    j["mean_b"] = r.mean_b;
    j["star"] = r.star;
    return j;
}

// ---- orchestration with persistence ----

/// Runs the grid search for a manifest and persists the outputs: the report
/// (JSON + table), the selected merged checkpoint with provenance metadata,
/// and the selected/source test runs in TREC format.
inline GridSearchReport run_grid_search(const ExperimentManifest& manifest,
                                        const std::string& out_dir_override = "",
                                        unsigned threads = default_threads()) {
    const Experiment e = load_experiment(manifest);
    GridSearchReport report = grid_search(e, threads);

    const std::string out_dir =
        out_dir_override.empty() ? manifest.output_dir : out_dir_override;
    std::filesystem::create_directories(out_dir);
    const auto out = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    const auto merged = merge_archives(
        e.retrieval, e.domain,
        merge_spec_for(e, report.selected_alpha_lower, report.selected_alpha_upper));
    save_archive(merged, out("merged_selected.mrg"));

    const auto docs = embed_corpus(merged, e.config, e.tokenizer, e.corpus, threads);
    Run selected_run =
        dense_retrieve_precomputed(merged, e.config, e.tokenizer, docs,
                                   e.test_queries, manifest.grid_search.k, threads);
    selected_run.tag = "merged_selected";
    save_run(selected_run, out("run_selected.trec"));

    const auto source_docs =
        embed_corpus(e.retrieval, e.config, e.tokenizer, e.corpus, threads);
    Run source_run = dense_retrieve_precomputed(e.retrieval, e.config, e.tokenizer,
                                                source_docs, e.test_queries,
                                                manifest.grid_search.k, threads);
    source_run.tag = "source_retrieval";
    save_run(source_run, out("run_source.trec"));

    write_text_file(out("grid_search_report.json"),
                    grid_report_to_json(report).dump(2) + "\n");
    const std::string dataset =
        std::filesystem::path(manifest.corpus).stem().string();
    write_text_file(out("grid_search_report.txt"),
                    grid_report_table(report, dataset, manifest.grid_search.k));
    return report;
}

/// Runs the limited-data protocol for a manifest and persists the report.
inline LimitedDataReport run_limited_data(const ExperimentManifest& manifest,
                                          std::uint32_t n_queries = 50,
                                          std::uint32_t n_runs = 10,
                                          unsigned threads = default_threads()) {
    const Experiment e = load_experiment(manifest);
    LimitedDataReport report = run_limited_data(e, n_queries, n_runs, threads);
    std::filesystem::create_directories(manifest.output_dir);
    const auto out = [&](const std::string& name) {
        return (std::filesystem::path(manifest.output_dir) / name).string();
    };
    write_text_file(out("limited_data_report.json"),
                    limited_report_to_json(report).dump(2) + "\n");
    write_text_file(out("limited_data_report.txt"),
                    limited_report_table(report, manifest.grid_search.k));
    return report;
}

}  // namespace mergeir
