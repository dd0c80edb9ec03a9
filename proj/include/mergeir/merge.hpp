#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "mergeir/error.hpp"
#include "mergeir/tensor.hpp"

namespace mergeir {

/// Which interpolation coefficient (or copy rule) applies to a tensor.
enum class Segment { Lower, Upper, CopyFromRetrieval };

inline const char* segment_name(Segment s) {
    switch (s) {
        case Segment::Lower: return "lower";
        case Segment::Upper: return "upper";
        case Segment::CopyFromRetrieval: return "copy_from_retrieval";
    }
    return "?";
}

/// Splits layer indices 0..total_layers-1 into a lower segment [0, boundary)
/// and an upper segment [boundary, total_layers).
struct LayerPartition {
    std::uint32_t total_layers = 8;
    std::uint32_t boundary = 4;

    void validate() const {
        require(boundary > 0 && boundary < total_layers,
                "layer partition: boundary must satisfy 0 < ", boundary, " < ",
                total_layers);
    }
};

/// Everything that determines a merged model: one coefficient per segment,
/// the partition, the policy for non-layer tensors, and the name prefixes
/// copied verbatim from the retrieval archive (token embeddings by default).
struct MergeSpec {
    double alpha_lower = 1.0;
    double alpha_upper = 1.0;
    LayerPartition partition;
    Segment nonlayer_policy = Segment::Upper;
    std::vector<std::string> copy_name_prefixes = {"embed_tokens."};
    /// When set, names present only in the retrieval archive are copied from
    /// it instead of failing the name-set check.
    bool copy_missing_from_retrieval = false;

    void validate() const {
        require(alpha_lower >= 0.0 && alpha_lower <= 1.0,
                "alpha_lower out of [0,1]: ", alpha_lower);
        require(alpha_upper >= 0.0 && alpha_upper <= 1.0,
                "alpha_upper out of [0,1]: ", alpha_upper);
        require(nonlayer_policy != Segment::CopyFromRetrieval,
                "nonlayer_policy must be lower or upper");
        partition.validate();
    }
};

/// Maps a tensor name to its segment. Layer tensors are named
/// "layers.<i>.<sub>"; anything matching a copy prefix is taken verbatim from
/// the retrieval archive; remaining non-layer names follow nonlayer_policy.
inline Segment classify_tensor(std::string_view name, const MergeSpec& spec) {
    for (const auto& prefix : spec.copy_name_prefixes) {
        if (name.substr(0, prefix.size()) == prefix) {
            return Segment::CopyFromRetrieval;
        }
    }
    constexpr std::string_view kLayers = "layers.";
    if (name.substr(0, kLayers.size()) == kLayers) {
        const std::string_view rest = name.substr(kLayers.size());
        const std::size_t dot = rest.find('.');
        std::uint32_t index = 0;
        const char* first = rest.data();
        const char* last = rest.data() + (dot == std::string_view::npos ? rest.size() : dot);
        const auto [ptr, ec] = std::from_chars(first, last, index);
        require(ec == std::errc{} && ptr == last && last != first,
                "tensor '", name, "': cannot parse layer index");
        require(index < spec.partition.total_layers, "tensor '", name,
                "': layer index ", index, " >= total layers ",
                spec.partition.total_layers);
        return index < spec.partition.boundary ? Segment::Lower : Segment::Upper;
    }
    return spec.nonlayer_policy;
}

/// Elementwise alpha*x1 + (1-alpha)*x2 in f32, evaluated in exactly that
/// order. At alpha exactly 1 or 0 the corresponding input is returned
/// verbatim so the endpoint configurations reproduce a source model bitwise.
inline Tensor merge_tensor(const Tensor& t1, const Tensor& t2, double alpha) {
    require(t1.name == t2.name, "merge: name mismatch '", t1.name, "' vs '",
            t2.name, "'");
    require(t1.shape == t2.shape, "merge: tensor '", t1.name,
            "': shape mismatch");
    require(t1.dtype == DType::F32 && t2.dtype == DType::F32, "merge: tensor '",
            t1.name, "': inputs must be f32");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha out of [0,1]: ", alpha);
    if (alpha == 1.0) {
        return t1;
    }
    if (alpha == 0.0) {
        return t2;
    }
    const auto a = static_cast<float>(alpha);
    const float one_minus_a = 1.0f - a;
    Tensor out;
    out.name = t1.name;
    out.shape = t1.shape;
    out.data.resize(t1.data.size());
    for (std::size_t i = 0; i < t1.data.size(); ++i) {
        out.data[i] = (a * t1.data[i]) + (one_minus_a * t2.data[i]);
    }
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string model_id(const TensorArchive& a) {
    auto it = a.metadata.find("model.id");
    return it == a.metadata.end() ? std::string() : it->second;
}

}  // namespace detail

/// Two-segment linear interpolation of whole checkpoints. Both archives must
/// carry the same tensor names with matching shapes; the result's metadata
/// records the merge settings and the source model identifiers.
inline TensorArchive merge_archives(const TensorArchive& retrieval,
                                    const TensorArchive& domain,
                                    const MergeSpec& spec) {
    spec.validate();

    std::vector<std::string> only_retrieval;
    std::vector<std::string> only_domain;
    for (const auto& [name, t] : retrieval.tensors) {
        if (domain.tensors.find(name) == domain.tensors.end()) {
            only_retrieval.push_back(name);
        }
    }
    for (const auto& [name, t] : domain.tensors) {
        if (retrieval.tensors.find(name) == retrieval.tensors.end()) {
            only_domain.push_back(name);
        }
    }
    if (!only_domain.empty() ||
        (!only_retrieval.empty() && !spec.copy_missing_from_retrieval)) {
        std::string detail;
        for (const auto& n : only_retrieval) {
            detail += " +retrieval:" + n;
        }
        for (const auto& n : only_domain) {
            detail += " +domain:" + n;
        }
        fail("merge: tensor name sets differ;", detail);
    }

    TensorArchive merged;
    for (const auto& [name, rt] : retrieval.tensors) {
        const Segment seg = classify_tensor(name, spec);
        const auto dom_it = domain.tensors.find(name);
        if (seg == Segment::CopyFromRetrieval || dom_it == domain.tensors.end()) {
            merged.tensors.emplace(name, rt);
            continue;
        }
        const double alpha =
            seg == Segment::Lower ? spec.alpha_lower : spec.alpha_upper;
        merged.tensors.emplace(name, merge_tensor(rt, dom_it->second, alpha));
    }

    merged.metadata["merge.alpha_lower"] = detail::format_double(spec.alpha_lower);
    merged.metadata["merge.alpha_upper"] = detail::format_double(spec.alpha_upper);
    merged.metadata["merge.boundary"] = std::to_string(spec.partition.boundary);
    merged.metadata["merge.total_layers"] =
        std::to_string(spec.partition.total_layers);
    merged.metadata["merge.nonlayer_policy"] = segment_name(spec.nonlayer_policy);
    std::string copy_names;
    for (const auto& p : spec.copy_name_prefixes) {
        if (!copy_names.empty()) {
            copy_names += ",";
        }
        copy_names += p;
    }
    merged.metadata["merge.copy_names"] = copy_names;
    merged.metadata["merge.source_retrieval"] = detail::model_id(retrieval);
    merged.metadata["merge.source_domain"] = detail::model_id(domain);
    return merged;
}

}  // namespace mergeir
