#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mergeir/error.hpp"

namespace mergeir {

/// Element types understood by the archive format. Everything is upcast to
/// f32 on load; f32 is the only in-memory and write-side dtype.
enum class DType { F32, F16, BF16 };

inline const char* dtype_name(DType d) {
    switch (d) {
        case DType::F32: return "f32";
        case DType::F16: return "f16";
        case DType::BF16: return "bf16";
    }
    return "?";
}

inline std::size_t dtype_size(DType d) {
    return d == DType::F32 ? 4 : 2;
}

/// Exact IEEE binary16 -> binary32 upcast (every f16 value is representable).
inline float f16_to_f32(std::uint16_t h) {
    const std::uint32_t sign = (h & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1fu;
    const std::uint32_t mant = h & 0x3ffu;
    std::uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;  // signed zero
        } else {
            // subnormal half: renormalize
            int e = -1;
            std::uint32_t m = mant;
            do {
                ++e;
                m <<= 1;
            } while ((m & 0x400u) == 0);
            bits = sign | ((127 - 15 - e) << 23) | ((m & 0x3ffu) << 13);
        }
    } else if (exp == 0x1f) {
        bits = sign | 0x7f800000u | (mant << 13);  // inf / nan
    } else {
        bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(bits);
}

/// bfloat16 is the top half of binary32.
inline float bf16_to_f32(std::uint16_t h) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(h) << 16);
}

/// A named dense tensor. `data` is row-major f32; `dtype` is F32 for every
/// tensor produced by this library (loads upcast f16/bf16 payloads).
struct Tensor {
    std::string name;
    DType dtype = DType::F32;
    std::vector<std::uint64_t> shape;
    std::vector<float> data;

    std::uint64_t numel() const {
        std::uint64_t n = 1;
        for (std::uint64_t d : shape) {
            n *= d;
        }
        return n;
    }

    void validate() const {
        require(!name.empty(), "tensor has empty name");
        for (std::uint64_t d : shape) {
            require(d > 0, "tensor '", name, "': zero dimension in shape");
        }
        require(data.size() == numel(), "tensor '", name, "': data has ",
                data.size(), " elements, shape requires ", numel());
    }

    bool same_elements(const Tensor& other) const {
        if (shape != other.shape || data.size() != other.data.size()) {
            return false;
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (std::bit_cast<std::uint32_t>(data[i]) !=
                std::bit_cast<std::uint32_t>(other.data[i])) {
                return false;
            }
        }
        return true;
    }
};

/// A checkpoint: tensors keyed by unique name (map iteration is the required
/// lexicographic order) plus free-form string metadata.
struct TensorArchive {
    std::map<std::string, Tensor> tensors;
    std::map<std::string, std::string> metadata;

    void add(Tensor t) {
        t.validate();
        auto [it, inserted] = tensors.emplace(t.name, std::move(t));
        require(inserted, "duplicate tensor name '", it->first, "'");
    }

    const Tensor& at(const std::string& name) const {
        auto it = tensors.find(name);
        require(it != tensors.end(), "archive has no tensor '", name, "'");
        return it->second;
    }

    bool bitwise_equal(const TensorArchive& other) const {
        if (metadata != other.metadata || tensors.size() != other.tensors.size()) {
            return false;
        }
        auto a = tensors.begin();
        auto b = other.tensors.begin();
        for (; a != tensors.end(); ++a, ++b) {
            if (a->first != b->first || !a->second.same_elements(b->second)) {
                return false;
            }
        }
        return true;
    }
};

}  // namespace mergeir
