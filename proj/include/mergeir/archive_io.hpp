#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mergeir/error.hpp"
#include "mergeir/tensor.hpp"

// Archive file layout (all integers little-endian):
//   "MRG1" | u64 header length H | H bytes UTF-8 JSON | raw payload
// JSON header:
//   {"metadata": {str: str},
//    "tensors": [{"name": str, "dtype": "f32"|"f16"|"bf16",
//                 "shape": [u64...], "offset": u64}, ...]}
// Tensors appear in lexicographic name order; offsets are contiguous from 0;
// payload is little-endian row-major.

namespace mergeir {

namespace detail {

constexpr char kMagic[4] = {'M', 'R', 'G', '1'};

inline void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return v;
}

inline DType parse_dtype(const std::string& s, const std::string& name) {
    if (s == "f32") return DType::F32;
    if (s == "f16") return DType::F16;
    if (s == "bf16") return DType::BF16;
    fail("malformed header: tensor '", name, "' has unknown dtype '", s, "'");
}

}  // namespace detail

/// Serializes an archive to its byte-deterministic file form.
inline std::string archive_to_bytes(const TensorArchive& archive) {
    nlohmann::json header;
    header["metadata"] = archive.metadata;
    auto& tensors = header["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : archive.tensors) {
        t.validate();
        require(t.dtype == DType::F32, "tensor '", name,
                "': only f32 tensors can be saved");
        tensors.push_back({{"name", name},
                           {"dtype", "f32"},
                           {"shape", t.shape},
                           {"offset", offset}});
        offset += t.numel() * 4;
    }
    const std::string head = header.dump();

    std::string out;
    out.reserve(4 + 8 + head.size() + offset);
    out.append(detail::kMagic, 4);
    detail::put_u64_le(out, head.size());
    out += head;
    for (const auto& [name, t] : archive.tensors) {
        for (float x : t.data) {
            const auto bits = std::bit_cast<std::uint32_t>(x);
            out.push_back(static_cast<char>(bits & 0xff));
            out.push_back(static_cast<char>((bits >> 8) & 0xff));
            out.push_back(static_cast<char>((bits >> 16) & 0xff));
            out.push_back(static_cast<char>((bits >> 24) & 0xff));
        }
    }
    return out;
}

inline void save_archive(const TensorArchive& archive, const std::string& path) {
    const std::string bytes = archive_to_bytes(archive);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open '", path, "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    require(out.good(), "write to '", path, "' failed");
}

inline TensorArchive archive_from_bytes(const std::string& bytes,
                                        const std::string& origin) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    require(bytes.size() >= 12, origin, ": malformed header: file too short");
    require(std::memcmp(bytes.data(), detail::kMagic, 4) == 0, origin,
            ": malformed header: bad magic");
    const std::uint64_t head_len = detail::get_u64_le(p + 4);
    require(head_len <= bytes.size() - 12, origin,
            ": malformed header: declared header length ", head_len,
            " exceeds file size");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 12,
                                       bytes.begin() + 12 + static_cast<std::ptrdiff_t>(head_len));
    } catch (const nlohmann::json::exception& e) {
        fail(origin, ": malformed header: ", e.what());
    }
    require(header.is_object() && header.contains("metadata") &&
                header.contains("tensors") && header["metadata"].is_object() &&
                header["tensors"].is_array(),
            origin, ": malformed header: missing metadata/tensors");

    TensorArchive archive;
    for (const auto& [key, value] : header["metadata"].items()) {
        require(value.is_string(), origin,
                ": malformed header: metadata value for '", key,
                "' is not a string");
        archive.metadata[key] = value.get<std::string>();
    }

    const std::size_t payload_off = 12 + head_len;
    const std::size_t payload_size = bytes.size() - payload_off;
    std::uint64_t expect_offset = 0;
    std::string prev_name;
    for (const auto& entry : header["tensors"]) {
        require(entry.is_object() && entry.contains("name") &&
                    entry.contains("dtype") && entry.contains("shape") &&
                    entry.contains("offset") && entry["name"].is_string() &&
                    entry["dtype"].is_string() && entry["shape"].is_array() &&
                    entry["offset"].is_number_unsigned(),
                origin, ": malformed header: bad tensor entry");
        Tensor t;
        t.name = entry["name"].get<std::string>();
        require(archive.tensors.find(t.name) == archive.tensors.end(), origin,
                ": duplicate tensor name '", t.name, "'");
        require(prev_name.empty() || prev_name < t.name, origin,
                ": malformed header: tensor '", t.name,
                "' out of lexicographic order");
        prev_name = t.name;

        const DType dtype = detail::parse_dtype(entry["dtype"].get<std::string>(), t.name);
        std::uint64_t elements = 1;
        for (const auto& dim : entry["shape"]) {
            require(dim.is_number_unsigned() && dim.get<std::uint64_t>() > 0,
                    origin, ": malformed header: tensor '", t.name,
                    "' has a non-positive dimension");
            const auto d = dim.get<std::uint64_t>();
            require(d <= (std::uint64_t{1} << 48) / elements, origin,
                    ": malformed header: tensor '", t.name,
                    "' has an implausibly large shape");
            elements *= d;
            t.shape.push_back(d);
        }
        const std::uint64_t offset = entry["offset"].get<std::uint64_t>();
        require(offset == expect_offset, origin, ": malformed header: tensor '",
                t.name, "' offset ", offset, ", expected ", expect_offset);
        const std::uint64_t nbytes = t.numel() * dtype_size(dtype);
        require(offset + nbytes <= payload_size, origin,
                ": truncated payload: tensor '", t.name, "' needs bytes [",
                offset, ", ", offset + nbytes, ") but payload has ",
                payload_size);
        expect_offset = offset + nbytes;

        const unsigned char* src = p + payload_off + offset;
        t.data.resize(t.numel());
        if (dtype == DType::F32) {
            for (std::uint64_t i = 0; i < t.numel(); ++i) {
                std::uint32_t v = 0;
                for (int b = 0; b < 4; ++b) {
                    v |= static_cast<std::uint32_t>(src[4 * i + b]) << (8 * b);
                }
                t.data[i] = std::bit_cast<float>(v);
            }
        } else {
            for (std::uint64_t i = 0; i < t.numel(); ++i) {
                const auto v = static_cast<std::uint16_t>(
                    src[2 * i] | (static_cast<std::uint16_t>(src[2 * i + 1]) << 8));
                t.data[i] = dtype == DType::F16 ? f16_to_f32(v) : bf16_to_f32(v);
            }
        }
        for (std::uint64_t i = 0; i < t.numel(); ++i) {
            require(std::isfinite(t.data[i]), origin, ": tensor '", t.name,
                    "' has non-finite element at flat index ", i);
        }
        t.dtype = DType::F32;
        archive.tensors.emplace(t.name, std::move(t));
    }
    require(expect_offset == payload_size, origin, ": payload has ",
            payload_size - expect_offset, " trailing bytes");
    return archive;
}

inline TensorArchive load_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open '", path, "'");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    require(!in.bad(), "read from '", path, "' failed");
    return archive_from_bytes(bytes, path);
}

}  // namespace mergeir
