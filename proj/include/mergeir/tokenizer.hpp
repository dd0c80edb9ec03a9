#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mergeir/error.hpp"
#include "mergeir/rng.hpp"

namespace mergeir {

/// Hash tokenizer shared by both source models (tokenizer copy-through is
/// structural: there is exactly one tokenizer definition).
///
/// word mode: lowercase the text, split into maximal alphanumeric runs, hash
/// each run. char_bigram mode: drop non-word code points and hash consecutive
/// code-point pairs (suits unsegmented CJK text). Either way a token's id is
/// 3 + (fnv1a64(utf8 bytes) mod (vocab_size - 3)); ids 0/1/2 are reserved for
/// pad/bos/eos.
enum class TokenizerMode { Word, CharBigram };

struct TokenizerSpec {
    TokenizerMode mode = TokenizerMode::Word;
    std::uint32_t vocab_size = 4096;

    static constexpr std::uint32_t kPad = 0;
    static constexpr std::uint32_t kBos = 1;
    static constexpr std::uint32_t kEos = 2;

    void validate() const {
        require(vocab_size > 3, "tokenizer vocab_size must exceed 3, got ",
                vocab_size);
    }
};

inline const char* tokenizer_mode_name(TokenizerMode m) {
    return m == TokenizerMode::Word ? "word" : "char_bigram";
}

inline TokenizerMode tokenizer_mode_from_name(std::string_view s) {
    if (s == "word") return TokenizerMode::Word;
    if (s == "char_bigram") return TokenizerMode::CharBigram;
    fail("unknown tokenizer mode '", std::string(s),
         "' (expected word or char_bigram)");
}

namespace detail {

/// UTF-8 decode; malformed bytes decode to U+FFFD so tokenization stays total
/// and deterministic on arbitrary input.
inline std::vector<char32_t> decode_utf8(std::string_view text) {
    std::vector<char32_t> cps;
    cps.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        char32_t cp = 0xfffd;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xe0) == 0xc0) {
            len = 2;
            cp = b0 & 0x1fu;
        } else if ((b0 & 0xf0) == 0xe0) {
            len = 3;
            cp = b0 & 0x0fu;
        } else if ((b0 & 0xf8) == 0xf0) {
            len = 4;
            cp = b0 & 0x07u;
        } else {
            cps.push_back(0xfffd);
            ++i;
            continue;
        }
        if (i + len > text.size()) {
            cps.push_back(0xfffd);
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(text[i + k]);
            if ((bk & 0xc0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3fu);
        }
        if (!ok) {
            cps.push_back(0xfffd);
            ++i;
            continue;
        }
        cps.push_back(cp);
        i += len;
    }
    return cps;
}

/// Case folding for ASCII, Latin-1 and Cyrillic; other scripts pass through.
inline char32_t fold_case(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c >= 0xc0 && c <= 0xde && c != 0xd7) return c + 32;   // Latin-1
    if (c >= 0x410 && c <= 0x42f) return c + 0x20;            // Cyrillic
    if (c >= 0x400 && c <= 0x40f) return c + 0x50;
    return c;
}

/// Word characters: ASCII alphanumerics, plus any code point >= U+0080 that
/// is not in a common whitespace/punctuation block.
inline bool is_word_char(char32_t c) {
    if (c < 0x80) {
        return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') ||
               (c >= U'A' && c <= U'Z');
    }
    if (c == 0xa0 || c == 0xfffd) return false;
    if (c >= 0x2000 && c <= 0x206f) return false;  // general punctuation
    if (c >= 0x3000 && c <= 0x303f) return false;  // CJK punctuation
    if (c >= 0xff00 && c <= 0xff0f) return false;  // fullwidth punctuation
    if (c >= 0xff1a && c <= 0xff20) return false;
    if (c >= 0xff3b && c <= 0xff40) return false;
    if (c >= 0xff5b && c <= 0xff65) return false;
    return true;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::uint32_t token_id(std::string_view bytes, const TokenizerSpec& spec) {
    return 3 + static_cast<std::uint32_t>(fnv1a64(bytes) %
                                          (spec.vocab_size - 3));
}

}  // namespace detail

/// Interior term ids of a text: no bos/eos, no length truncation. This is
/// what BM25 consumes for both documents and queries.
inline std::vector<std::uint32_t> term_ids(std::string_view text,
                                           const TokenizerSpec& spec) {
    spec.validate();
    const auto cps = detail::decode_utf8(text);
    std::vector<std::uint32_t> ids;
    std::string buf;
    if (spec.mode == TokenizerMode::Word) {
        std::size_t i = 0;
        while (i < cps.size()) {
            if (!detail::is_word_char(cps[i])) {
                ++i;
                continue;
            }
            buf.clear();
            while (i < cps.size() && detail::is_word_char(cps[i])) {
                detail::encode_utf8(detail::fold_case(cps[i]), buf);
                ++i;
            }
            ids.push_back(detail::token_id(buf, spec));
        }
    } else {
        std::vector<char32_t> kept;
        for (char32_t c : cps) {
            if (detail::is_word_char(c)) {
                kept.push_back(detail::fold_case(c));
            }
        }
        if (kept.size() == 1) {
            buf.clear();
            detail::encode_utf8(kept[0], buf);
            ids.push_back(detail::token_id(buf, spec));
        }
        for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
            buf.clear();
            detail::encode_utf8(kept[i], buf);
            detail::encode_utf8(kept[i + 1], buf);
            ids.push_back(detail::token_id(buf, spec));
        }
    }
    return ids;
}

/// Full encoder input: bos ++ interior ids ++ eos, truncated to max_seq with
/// eos always last. Empty text yields [bos, eos].
inline std::vector<std::uint32_t> tokenize(std::string_view text,
                                           const TokenizerSpec& spec,
                                           std::uint32_t max_seq) {
    require(max_seq >= 2, "max_seq must be at least 2, got ", max_seq);
    std::vector<std::uint32_t> ids = term_ids(text, spec);
    if (ids.size() + 2 > max_seq) {
        ids.resize(max_seq - 2);
    }
    std::vector<std::uint32_t> out;
    out.reserve(ids.size() + 2);
    out.push_back(TokenizerSpec::kBos);
    out.insert(out.end(), ids.begin(), ids.end());
    out.push_back(TokenizerSpec::kEos);
    return out;
}

}  // namespace mergeir
