#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mergeir/archive_io.hpp"
#include "mergeir/encoder.hpp"
#include "mergeir/experiment.hpp"
#include "mergeir/toy_data.hpp"

// A runnable toy experiment on disk: encoder config, the two source
// archives (base + domain variant), synthetic dataset and a manifest tying
// them together.

namespace mergeir {

struct ToyBundleOptions {
    std::uint64_t seed = 0;
    std::uint32_t n_docs = 500;
    std::uint32_t n_dev_queries = 120;
    std::uint32_t n_test_queries = 40;
    double domain_strength = 0.1;
    EncoderConfig config;  // config.seed is overridden by `seed`
    GridSearchConfig grid;
};

/// Writes the bundle into `dir` and returns the manifest path.
inline std::string write_toy_bundle(const std::string& dir,
                                    ToyBundleOptions options = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto at = [&](const std::string& name) {
        return (fs::path(dir) / name).string();
    };

    options.config.seed = options.seed;
    save_encoder_config(options.config, at("encoder_config.json"));

    const auto retrieval = init_encoder(options.config);
    save_archive(retrieval, at("retrieval.mrg"));
    const auto domain = make_domain_variant(retrieval, options.config,
                                            options.seed + 1,
                                            options.domain_strength);
    save_archive(domain, at("domain.mrg"));

    SyntheticSpec data_spec;
    data_spec.n_docs = options.n_docs;
    data_spec.n_dev_queries = options.n_dev_queries;
    data_spec.n_test_queries = options.n_test_queries;
    data_spec.seed = options.seed;
    write_synthetic_dataset(make_synthetic_dataset(data_spec), dir);

    ExperimentManifest manifest;
    manifest.retrieval_archive = "retrieval.mrg";
    manifest.domain_archive = "domain.mrg";
    manifest.encoder_config = "encoder_config.json";
    manifest.corpus = "corpus.jsonl";
    manifest.dev_queries = "dev_queries.jsonl";
    manifest.dev_qrels = "dev.qrels";
    manifest.test_queries = "test_queries.jsonl";
    manifest.test_qrels = "test.qrels";
    manifest.grid_search = options.grid;
    manifest.output_dir = "out";
    manifest.seed = options.seed;
    const auto manifest_path = at("manifest.json");
    write_text_file(manifest_path, manifest_to_json(manifest).dump(2) + "\n");
    return manifest_path;
}

}  // namespace mergeir
