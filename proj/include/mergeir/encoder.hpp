#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "mergeir/error.hpp"
#include "mergeir/parallel.hpp"
#include "mergeir/rng.hpp"
#include "mergeir/tensor.hpp"
#include "mergeir/tokenizer.hpp"

// Desk-scale transformer bi-encoder. Pre-norm blocks (RMS norm, causal
// multi-head self-attention, SiLU feed-forward), final RMS norm, last-token
// (eos) pooling, L2-normalized output. Parameters live in a TensorArchive
// under the names
//   embed_tokens.weight                [vocab_size, d_model]
//   layers.<i>.attn_norm.weight        [d_model]
//   layers.<i>.attn.{wq,wk,wv,wo}      [d_model, d_model]   (y = x * W)
//   layers.<i>.mlp_norm.weight         [d_model]
//   layers.<i>.mlp.w1                  [d_model, d_ff]
//   layers.<i>.mlp.w2                  [d_ff, d_model]
//   final_norm.weight                  [d_model]
// so merged checkpoints execute end-to-end.

namespace mergeir {

struct EncoderConfig {
    std::uint32_t vocab_size = 4096;
    std::uint32_t d_model = 32;
    std::uint32_t n_layers = 8;
    std::uint32_t n_heads = 2;
    std::uint32_t d_ff = 64;
    std::uint32_t max_seq = 64;
    std::uint64_t seed = 0;
    std::string query_prefix;  // prepended to queries only, default none
    TokenizerMode tokenizer_mode = TokenizerMode::Word;

    void validate() const {
        require(vocab_size > 3, "vocab_size must exceed 3");
        require(d_model > 0 && n_layers > 0 && n_heads > 0 && d_ff > 0 &&
                    max_seq >= 2,
                "encoder dimensions must be positive (max_seq >= 2)");
        require(d_model % n_heads == 0, "d_model ", d_model,
                " not divisible by n_heads ", n_heads);
    }

    TokenizerSpec tokenizer() const {
        return TokenizerSpec{tokenizer_mode, vocab_size};
    }
};

inline nlohmann::json encoder_config_to_json(const EncoderConfig& c) {
    nlohmann::json j;
    j["vocab_size"] = c.vocab_size;
    j["d_model"] = c.d_model;
    j["n_layers"] = c.n_layers;
    j["n_heads"] = c.n_heads;
    j["d_ff"] = c.d_ff;
    j["max_seq"] = c.max_seq;
    j["seed"] = c.seed;
    j["query_prefix"] = c.query_prefix;
    j["tokenizer_mode"] = tokenizer_mode_name(c.tokenizer_mode);
    return j;
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    EncoderConfig c;
    for (const char* key :
         {"vocab_size", "d_model", "n_layers", "n_heads", "d_ff", "max_seq", "seed"}) {
        require(j.contains(key) && j[key].is_number_unsigned(),
                "encoder config: missing or non-integer field '", key, "'");
    }
    c.vocab_size = j["vocab_size"].get<std::uint32_t>();
    c.d_model = j["d_model"].get<std::uint32_t>();
    c.n_layers = j["n_layers"].get<std::uint32_t>();
    c.n_heads = j["n_heads"].get<std::uint32_t>();
    c.d_ff = j["d_ff"].get<std::uint32_t>();
    c.max_seq = j["max_seq"].get<std::uint32_t>();
    c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("query_prefix")) {
        c.query_prefix = j["query_prefix"].get<std::string>();
    }
    if (j.contains("tokenizer_mode")) {
        c.tokenizer_mode =
            tokenizer_mode_from_name(j["tokenizer_mode"].get<std::string>());
    }
    c.validate();
    return c;
}

inline EncoderConfig load_encoder_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open '", path, "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path, ": invalid JSON: ", e.what());
    }
    return encoder_config_from_json(j);
}

inline void save_encoder_config(const EncoderConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), "cannot open '", path, "' for writing");
    out << encoder_config_to_json(c).dump(2) << "\n";
    require(out.good(), "write to '", path, "' failed");
}

struct NamedShape {
    std::string name;
    std::vector<std::uint64_t> shape;
};

inline std::vector<NamedShape> encoder_tensor_schema(const EncoderConfig& c) {
    std::vector<NamedShape> schema;
    const std::uint64_t v = c.vocab_size, d = c.d_model, f = c.d_ff;
    schema.push_back({"embed_tokens.weight", {v, d}});
    for (std::uint32_t i = 0; i < c.n_layers; ++i) {
        const std::string base = "layers." + std::to_string(i) + ".";
        schema.push_back({base + "attn_norm.weight", {d}});
        schema.push_back({base + "attn.wq", {d, d}});
        schema.push_back({base + "attn.wk", {d, d}});
        schema.push_back({base + "attn.wv", {d, d}});
        schema.push_back({base + "attn.wo", {d, d}});
        schema.push_back({base + "mlp_norm.weight", {d}});
        schema.push_back({base + "mlp.w1", {d, f}});
        schema.push_back({base + "mlp.w2", {f, d}});
    }
    schema.push_back({"final_norm.weight", {d}});
    return schema;
}

/// Fresh toy checkpoint. Norm weights start at one; matrices are uniform in
/// +-1/sqrt(fan_in) (embeddings use 1/sqrt(d_model)). Each tensor draws from
/// its own xoshiro256** stream keyed by (seed, tensor name), so content is
/// independent of construction order and bit-reproducible.
inline TensorArchive init_encoder(const EncoderConfig& config) {
    config.validate();
    TensorArchive archive;
    for (const auto& [name, shape] : encoder_tensor_schema(config)) {
        Tensor t;
        t.name = name;
        t.shape = shape;
        t.data.resize(t.numel());
        if (name.find("norm.weight") != std::string::npos) {
            for (float& x : t.data) {
                x = 1.0f;
            }
        } else {
            const std::uint64_t fan_in =
                name == "embed_tokens.weight" ? config.d_model : shape[0];
            const float range =
                1.0f / std::sqrt(static_cast<float>(fan_in));
            Xoshiro256 rng = seeded_stream(config.seed, name);
            for (float& x : t.data) {
                x = rng.symmetric_float(range);
            }
        }
        archive.tensors.emplace(name, std::move(t));
    }
    archive.metadata["model.id"] =
        "toy-encoder(seed=" + std::to_string(config.seed) + ")";
    archive.metadata["encoder.config"] = encoder_config_to_json(config).dump();
    return archive;
}

/// Seeded rank-one perturbation of every tensor; stands in for domain
/// further-pre-training. strength 0 returns the base archive bitwise.
inline TensorArchive make_domain_variant(const TensorArchive& base,
                                         const EncoderConfig& config,
                                         std::uint64_t domain_seed,
                                         double strength) {
    config.validate();
    require(strength >= 0.0, "perturbation strength must be >= 0");
    if (strength == 0.0) {
        return base;
    }
    const auto s = static_cast<float>(strength);
    TensorArchive out;
    out.metadata = base.metadata;
    for (const auto& [name, t] : base.tensors) {
        Tensor p = t;
        Xoshiro256 rng = seeded_stream(domain_seed, name);
        if (t.shape.size() == 2) {
            const std::size_t rows = t.shape[0], cols = t.shape[1];
            std::vector<float> u(rows), v(cols);
            for (float& x : u) {
                x = rng.symmetric_float(1.0f);
            }
            for (float& x : v) {
                x = rng.symmetric_float(1.0f);
            }
            const float scale = s / std::sqrt(static_cast<float>(cols));
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    p.data[r * cols + c] += scale * u[r] * v[c];
                }
            }
        } else {
            for (float& x : p.data) {
                x += s * rng.symmetric_float(1.0f);
            }
        }
        out.tensors.emplace(name, std::move(p));
    }
    char strength_str[32];
    std::snprintf(strength_str, sizeof(strength_str), "%.17g", strength);
    auto& id = out.metadata["model.id"];
    id += "+domain(seed=" + std::to_string(domain_seed) + ",strength=" +
          strength_str + ")";
    return out;
}

/// L2-normalized d_model vector; the bi-encoder output.
struct Embedding {
    std::vector<float> values;
};

inline double dot(const Embedding& a, const Embedding& b) {
    require(a.values.size() == b.values.size(), "embedding size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        acc += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
    }
    return acc;
}

/// Checks the archive against the schema before any arithmetic.
inline void validate_encoder_archive(const TensorArchive& archive,
                                     const EncoderConfig& config) {
    for (const auto& [name, shape] : encoder_tensor_schema(config)) {
        auto it = archive.tensors.find(name);
        require(it != archive.tensors.end(), "encoder archive: missing tensor '",
                name, "'");
        require(it->second.shape == shape, "encoder archive: tensor '", name,
                "' has unexpected shape");
    }
}

namespace detail {

struct LayerWeights {
    const float* attn_norm;
    const float* wq;
    const float* wk;
    const float* wv;
    const float* wo;
    const float* mlp_norm;
    const float* w1;
    const float* w2;
};

struct BoundEncoder {
    const float* embed;
    std::vector<LayerWeights> layers;
    const float* final_norm;
};

inline BoundEncoder bind_encoder(const TensorArchive& archive,
                                 const EncoderConfig& config) {
    BoundEncoder b;
    b.embed = archive.at("embed_tokens.weight").data.data();
    for (std::uint32_t i = 0; i < config.n_layers; ++i) {
        const std::string base = "layers." + std::to_string(i) + ".";
        LayerWeights lw;
        lw.attn_norm = archive.at(base + "attn_norm.weight").data.data();
        lw.wq = archive.at(base + "attn.wq").data.data();
        lw.wk = archive.at(base + "attn.wk").data.data();
        lw.wv = archive.at(base + "attn.wv").data.data();
        lw.wo = archive.at(base + "attn.wo").data.data();
        lw.mlp_norm = archive.at(base + "mlp_norm.weight").data.data();
        lw.w1 = archive.at(base + "mlp.w1").data.data();
        lw.w2 = archive.at(base + "mlp.w2").data.data();
        b.layers.push_back(lw);
    }
    b.final_norm = archive.at("final_norm.weight").data.data();
    return b;
}

inline void rms_norm(const float* x, const float* w, float* out, std::size_t d) {
    float ss = 0.0f;
    for (std::size_t i = 0; i < d; ++i) {
        ss += x[i] * x[i];
    }
    const float inv = 1.0f / std::sqrt(ss / static_cast<float>(d) + 1e-6f);
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = x[i] * inv * w[i];
    }
}

// y[S x out] = x[S x in] * W[in x out]
inline void matmul(const float* x, const float* w, float* y, std::size_t rows,
                   std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        float* yr = y + r * out;
        for (std::size_t o = 0; o < out; ++o) {
            yr[o] = 0.0f;
        }
        const float* xr = x + r * in;
        for (std::size_t i = 0; i < in; ++i) {
            const float xi = xr[i];
            const float* wrow = w + i * out;
            for (std::size_t o = 0; o < out; ++o) {
                yr[o] += xi * wrow[o];
            }
        }
    }
}

inline float silu(float x) { return x / (1.0f + std::exp(-x)); }

/// Forward pass over a pre-tokenized id sequence. The archive must already be
/// validated against the config.
inline Embedding forward(const BoundEncoder& weights,
                         const EncoderConfig& config,
                         const std::vector<std::uint32_t>& ids) {
    const std::size_t seq = ids.size();
    const std::size_t d = config.d_model;
    const std::size_t heads = config.n_heads;
    const std::size_t hd = d / heads;
    const float att_scale = 1.0f / std::sqrt(static_cast<float>(hd));

    std::vector<float> h(seq * d);
    for (std::size_t s = 0; s < seq; ++s) {
        require(ids[s] < config.vocab_size, "token id ", ids[s],
                " out of vocabulary");
        const float* row = weights.embed + static_cast<std::size_t>(ids[s]) * d;
        std::copy(row, row + d, h.begin() + s * d);
    }

    std::vector<float> normed(seq * d), q(seq * d), k(seq * d), v(seq * d);
    std::vector<float> ctx(seq * d), proj(seq * d);
    std::vector<float> scores(seq), up(seq * config.d_ff), down(seq * d);

    for (std::size_t layer = 0; layer < weights.layers.size(); ++layer) {
        const LayerWeights& lw = weights.layers[layer];

        for (std::size_t s = 0; s < seq; ++s) {
            rms_norm(&h[s * d], lw.attn_norm, &normed[s * d], d);
        }
        matmul(normed.data(), lw.wq, q.data(), seq, d, d);
        matmul(normed.data(), lw.wk, k.data(), seq, d, d);
        matmul(normed.data(), lw.wv, v.data(), seq, d, d);

        for (std::size_t s = 0; s < seq; ++s) {
            for (std::size_t head = 0; head < heads; ++head) {
                const float* qs = &q[s * d + head * hd];
                float maxs = -std::numeric_limits<float>::infinity();
                for (std::size_t j = 0; j <= s; ++j) {
                    const float* kj = &k[j * d + head * hd];
                    float acc = 0.0f;
                    for (std::size_t e = 0; e < hd; ++e) {
                        acc += qs[e] * kj[e];
                    }
                    scores[j] = acc * att_scale;
                    maxs = std::max(maxs, scores[j]);
                }
                float denom = 0.0f;
                for (std::size_t j = 0; j <= s; ++j) {
                    scores[j] = std::exp(scores[j] - maxs);
                    denom += scores[j];
                }
                float* out = &ctx[s * d + head * hd];
                std::fill(out, out + hd, 0.0f);
                for (std::size_t j = 0; j <= s; ++j) {
                    const float p = scores[j] / denom;
                    const float* vj = &v[j * d + head * hd];
                    for (std::size_t e = 0; e < hd; ++e) {
                        out[e] += p * vj[e];
                    }
                }
            }
        }
        matmul(ctx.data(), lw.wo, proj.data(), seq, d, d);
        for (std::size_t i = 0; i < seq * d; ++i) {
            h[i] += proj[i];
        }

        for (std::size_t s = 0; s < seq; ++s) {
            rms_norm(&h[s * d], lw.mlp_norm, &normed[s * d], d);
        }
        matmul(normed.data(), lw.w1, up.data(), seq, d, config.d_ff);
        for (float& x : up) {
            x = silu(x);
        }
        matmul(up.data(), lw.w2, down.data(), seq, config.d_ff, d);
        for (std::size_t i = 0; i < seq * d; ++i) {
            h[i] += down[i];
        }

        for (std::size_t i = 0; i < seq * d; ++i) {
            require(std::isfinite(h[i]), "non-finite activation in layer ",
                    layer);
        }
    }

    // last-token (eos) pooling, then L2 normalization
    Embedding e;
    e.values.resize(d);
    rms_norm(&h[(seq - 1) * d], weights.final_norm, e.values.data(), d);
    double norm = 0.0;
    for (float x : e.values) {
        norm += static_cast<double>(x) * static_cast<double>(x);
    }
    norm = std::sqrt(norm);
    require(norm > 0.0 && std::isfinite(norm), "degenerate embedding norm");
    const auto inv = static_cast<float>(1.0 / norm);
    for (float& x : e.values) {
        x *= inv;
    }
    return e;
}

}  // namespace detail

inline Embedding encode(const TensorArchive& archive, const EncoderConfig& config,
                        const TokenizerSpec& spec, std::string_view text) {
    config.validate();
    validate_encoder_archive(archive, config);
    const auto bound = detail::bind_encoder(archive, config);
    return detail::forward(bound, config, tokenize(text, spec, config.max_seq));
}

/// Order-stable batch encode; texts are independent so they may run on
/// several threads.
inline std::vector<Embedding> encode_batch(const TensorArchive& archive,
                                           const EncoderConfig& config,
                                           const TokenizerSpec& spec,
                                           const std::vector<std::string>& texts,
                                           unsigned threads = default_threads()) {
    config.validate();
    validate_encoder_archive(archive, config);
    const auto bound = detail::bind_encoder(archive, config);
    std::vector<Embedding> out(texts.size());
    parallel_for(texts.size(), threads, [&](std::size_t i) {
        out[i] = detail::forward(bound, config, tokenize(texts[i], spec, config.max_seq));
    });
    return out;
}

}  // namespace mergeir
