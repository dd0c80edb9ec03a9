// Command-line front end: checkpoint merging, grid search over interpolation
// coefficients, retrieval evaluation, BM25 hard-negative mining, the
// limited-data protocol, significance testing, and toy-experiment setup.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mergeir/mergeir.hpp"

namespace {

using namespace mergeir;

std::uint32_t infer_total_layers(const TensorArchive& archive) {
    std::uint32_t max_index = 0;
    bool any = false;
    for (const auto& [name, t] : archive.tensors) {
        constexpr std::string_view prefix = "layers.";
        if (name.rfind(prefix, 0) != 0) {
            continue;
        }
        const std::size_t dot = name.find('.', prefix.size());
        try {
            const std::uint32_t idx =
                static_cast<std::uint32_t>(std::stoul(name.substr(
                    prefix.size(),
                    dot == std::string::npos ? std::string::npos
                                             : dot - prefix.size())));
            max_index = std::max(max_index, idx);
            any = true;
        } catch (const std::exception&) {
            fail("cannot parse layer index in tensor '", name, "'");
        }
    }
    require(any, "archive has no 'layers.<i>.' tensors");
    return max_index + 1;
}

int cmd_merge(const std::string& retrieval_path, const std::string& domain_path,
              double alpha_lower, double alpha_upper, std::uint32_t boundary,
              const std::string& out_path, const std::string& nonlayer_policy,
              bool copy_missing) {
    const auto retrieval = load_archive(retrieval_path);
    const auto domain = load_archive(domain_path);
    MergeSpec spec;
    spec.alpha_lower = alpha_lower;
    spec.alpha_upper = alpha_upper;
    spec.partition.total_layers = infer_total_layers(retrieval);
    spec.partition.boundary = boundary;
    spec.nonlayer_policy =
        nonlayer_policy == "lower" ? Segment::Lower : Segment::Upper;
    spec.copy_missing_from_retrieval = copy_missing;
    const auto merged = merge_archives(retrieval, domain, spec);
    save_archive(merged, out_path);
    std::cout << "merged " << merged.tensors.size() << " tensors (alpha_lower "
              << format_alpha(alpha_lower) << ", alpha_upper "
              << format_alpha(alpha_upper) << ", boundary " << boundary
              << ") -> " << out_path << "\n";
    return 0;
}

int cmd_grid_search(const std::string& manifest_path, const std::string& out_dir,
                    unsigned threads) {
    auto manifest = load_manifest(manifest_path);
    const auto report = run_grid_search(manifest, out_dir, threads);
    const std::string dir = out_dir.empty() ? manifest.output_dir : out_dir;
    const std::string dataset =
        std::filesystem::path(manifest.corpus).stem().string();
    std::cout << grid_report_table(report, dataset, manifest.grid_search.k);
    std::cout << "outputs written to " << dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& run_path, const std::string& qrels_path,
                 std::uint32_t k, const std::string& out_path) {
    const auto run = load_run(run_path);
    const auto qrels = load_qrels(qrels_path);
    const auto scores = ndcg_at_k(run, qrels, k);
    const auto json = evaluation_report_json(scores, k).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << json;
    } else {
        write_text_file(out_path, json);
        std::cout << "evaluation report written to " << out_path << "\n";
    }
    return 0;
}

int cmd_mine_negatives(const std::string& corpus_path,
                       const std::string& queries_path,
                       const std::string& qrels_path, std::size_t n,
                       const std::string& config_path,
                       const std::string& out_path) {
    const auto corpus = load_corpus(corpus_path);
    const auto queries = load_queries(queries_path);
    const auto qrels = load_qrels(qrels_path);
    TokenizerSpec spec;
    if (!config_path.empty()) {
        spec = load_encoder_config(config_path).tokenizer();
    }
    // retrieve deep enough that filtering out every judged-relevant doc still
    // leaves n candidates
    std::size_t max_positive = 0;
    for (const auto& [qid, judged] : qrels.judgments) {
        std::size_t positives = 0;
        for (const auto& [did, grade] : judged) {
            positives += grade > 0 ? 1 : 0;
        }
        max_positive = std::max(max_positive, positives);
    }
    const auto run =
        bm25_retrieve(corpus, queries, Bm25Params{}, spec, n + max_positive);
    const auto mined = mine_hard_negatives(run, qrels, n);

    nlohmann::json j;
    j["n"] = n;
    j["negatives"] = nlohmann::json::object();
    for (const auto& [qid, docs] : mined.negatives) {
        j["negatives"][qid] = docs;
    }
    j["warnings"] = mined.warnings;
    const auto json = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << json;
    } else {
        write_text_file(out_path, json);
        std::cout << "hard negatives written to " << out_path << "\n";
    }
    return 0;
}

int cmd_limited_data(const std::string& manifest_path, std::uint32_t n_queries,
                     std::uint32_t n_runs, std::uint64_t seed, bool seed_given,
                     unsigned threads) {
    auto manifest = load_manifest(manifest_path);
    if (seed_given) {
        manifest.seed = seed;
    }
    const auto report = run_limited_data(manifest, n_queries, n_runs, threads);
    std::cout << limited_report_table(report, manifest.grid_search.k);
    std::cout << "outputs written to " << manifest.output_dir << "\n";
    return 0;
}

int cmd_ttest(const std::string& run_a_path, const std::string& run_b_path,
              const std::string& qrels_path, std::uint32_t k) {
    const auto run_a = load_run(run_a_path);
    const auto run_b = load_run(run_b_path);
    const auto qrels = load_qrels(qrels_path);
    const auto report = compare_systems(run_a, run_b, qrels, k);
    std::cout << significance_report_to_json(report).dump(2) << "\n";
    std::cout << report.metric << ": " << score_cell(report.mean_a, report.star)
              << " vs " << format_pct(report.mean_b) << " (p="
              << report.ttest.p_value << ")\n";
    return 0;
}

int cmd_make_toy(const std::string& out_dir, std::uint64_t seed,
                 std::uint32_t n_docs, std::uint32_t n_dev_queries,
                 std::uint32_t n_test_queries, double domain_strength) {
    ToyBundleOptions options;
    options.seed = seed;
    options.n_docs = n_docs;
    options.n_dev_queries = n_dev_queries;
    options.n_test_queries = n_test_queries;
    options.domain_strength = domain_strength;
    const auto manifest_path = write_toy_bundle(out_dir, options);
    std::cout << "toy experiment written to " << out_dir << " (" << n_docs
              << " docs, " << n_dev_queries << " dev / " << n_test_queries
              << " test queries); manifest at " << manifest_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-specific retrieval models by two-segment checkpoint interpolation"};
    app.require_subcommand(1);
    unsigned threads = mergeir::default_threads();
    app.add_option("--threads", threads, "worker threads for encoding");

    auto* merge = app.add_subcommand("merge", "merge two checkpoints");
    std::string retrieval_path, domain_path, out_path;
    double alpha_lower = 1.0, alpha_upper = 1.0;
    std::uint32_t boundary = 4;
    std::string nonlayer_policy = "upper";
    bool copy_missing = false;
    merge->add_option("--retrieval", retrieval_path, "source retrieval archive")
        ->required();
    merge->add_option("--domain", domain_path, "source domain archive")->required();
    merge->add_option("--alpha-lower", alpha_lower, "lower-segment coefficient")
        ->required();
    merge->add_option("--alpha-upper", alpha_upper, "upper-segment coefficient")
        ->required();
    merge->add_option("--boundary", boundary, "first layer of the upper segment")
        ->required();
    merge->add_option("--out", out_path, "output archive path")->required();
    merge->add_option("--nonlayer-policy", nonlayer_policy,
                      "segment for non-layer tensors (lower|upper)")
        ->check(CLI::IsMember({"lower", "upper"}));
    merge->add_flag("--copy-missing-from-retrieval", copy_missing,
                    "copy tensors missing from the domain archive");

    auto* grid = app.add_subcommand("grid-search", "run the coefficient grid search");
    std::string manifest_path, out_dir;
    grid->add_option("--manifest", manifest_path, "experiment manifest JSON")
        ->required();
    grid->add_option("--out-dir", out_dir,
                     "output directory (defaults to the manifest's output_dir)");

    auto* evaluate = app.add_subcommand("evaluate", "nDCG@k for a TREC run");
    std::string run_path, qrels_path, eval_out;
    std::uint32_t k = 10;
    evaluate->add_option("--run", run_path, "TREC run file")->required();
    evaluate->add_option("--qrels", qrels_path, "TREC qrels file")->required();
    evaluate->add_option("--k", k, "metric cutoff");
    evaluate->add_option("--out", eval_out, "write the JSON report here");

    auto* mine = app.add_subcommand("mine-negatives",
                                    "BM25 hard negatives per query");
    std::string corpus_path, queries_path, mine_qrels_path, mine_config, mine_out;
    std::size_t n_negatives = 30;
    mine->add_option("--corpus", corpus_path, "JSONL corpus")->required();
    mine->add_option("--queries", queries_path, "JSONL queries")->required();
    mine->add_option("--qrels", mine_qrels_path, "TREC qrels")->required();
    mine->add_option("--n", n_negatives, "negatives per query");
    mine->add_option("--config", mine_config,
                     "encoder config providing the tokenizer (defaults used otherwise)");
    mine->add_option("--out", mine_out, "write the JSON mapping here");

    auto* limited = app.add_subcommand("limited-data",
                                       "resampled 50-query selection protocol");
    std::string limited_manifest;
    std::uint32_t n_queries = 50, n_runs = 10;
    std::uint64_t seed = 0;
    limited->add_option("--manifest", limited_manifest, "experiment manifest JSON")
        ->required();
    limited->add_option("--n-queries", n_queries, "dev queries per sample");
    limited->add_option("--n-runs", n_runs, "number of repetitions");
    auto* seed_opt =
        limited->add_option("--seed", seed, "override the manifest's global seed");

    auto* ttest = app.add_subcommand("ttest", "paired t-test between two runs");
    std::string run_a_path, run_b_path, ttest_qrels;
    std::uint32_t ttest_k = 10;
    ttest->add_option("--run-a", run_a_path, "TREC run A")->required();
    ttest->add_option("--run-b", run_b_path, "TREC run B")->required();
    ttest->add_option("--qrels", ttest_qrels, "TREC qrels")->required();
    ttest->add_option("--k", ttest_k, "metric cutoff");

    auto* toy = app.add_subcommand("make-toy",
                                   "generate archives, data and a manifest");
    std::string toy_dir = "toy";
    std::uint64_t toy_seed = 0;
    std::uint32_t toy_docs = 500, toy_dev = 120, toy_test = 40;
    double toy_strength = 0.1;
    toy->add_option("--out-dir", toy_dir, "target directory");
    toy->add_option("--seed", toy_seed, "global seed");
    toy->add_option("--n-docs", toy_docs, "corpus size");
    toy->add_option("--n-dev-queries", toy_dev, "dev query count");
    toy->add_option("--n-test-queries", toy_test, "test query count");
    toy->add_option("--domain-strength", toy_strength,
                    "perturbation strength for the domain model");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(merge)) {
            return cmd_merge(retrieval_path, domain_path, alpha_lower, alpha_upper,
                             boundary, out_path, nonlayer_policy, copy_missing);
        }
        if (app.got_subcommand(grid)) {
            return cmd_grid_search(manifest_path, out_dir, threads);
        }
        if (app.got_subcommand(evaluate)) {
            return cmd_evaluate(run_path, qrels_path, k, eval_out);
        }
        if (app.got_subcommand(mine)) {
            return cmd_mine_negatives(corpus_path, queries_path, mine_qrels_path,
                                      n_negatives, mine_config, mine_out);
        }
        if (app.got_subcommand(limited)) {
            return cmd_limited_data(limited_manifest, n_queries, n_runs, seed,
                                    seed_opt->count() > 0, threads);
        }
        if (app.got_subcommand(ttest)) {
            return cmd_ttest(run_a_path, run_b_path, ttest_qrels, ttest_k);
        }
        if (app.got_subcommand(toy)) {
            return cmd_make_toy(toy_dir, toy_seed, toy_docs, toy_dev, toy_test,
                                toy_strength);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
