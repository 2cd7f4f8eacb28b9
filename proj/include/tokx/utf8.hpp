#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tokx::utf8 {

// Result of decoding one scalar value. `length` is the number of bytes
// consumed; length == 0 signals an invalid sequence at that position.
struct DecodeResult {
    char32_t cp = 0;
    unsigned length = 0;
};

// Strict UTF-8 decode at `pos`. Rejects overlong forms, surrogates and
// values beyond U+10FFFF.
inline DecodeResult decode_one(std::string_view s, std::size_t pos) {
    const auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    if (pos >= s.size()) return {};
    unsigned char b0 = b(pos);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t i) { return i < s.size() && (b(i) & 0xC0) == 0x80; };
    if ((b0 & 0xE0) == 0xC0) {
        if (!cont(pos + 1)) return {};
        char32_t cp = ((b0 & 0x1Fu) << 6) | (b(pos + 1) & 0x3Fu);
        if (cp < 0x80) return {}; // overlong
        return {cp, 2};
    }
    if ((b0 & 0xF0) == 0xE0) {
        if (!cont(pos + 1) || !cont(pos + 2)) return {};
        char32_t cp = ((b0 & 0x0Fu) << 12) | ((b(pos + 1) & 0x3Fu) << 6) | (b(pos + 2) & 0x3Fu);
        if (cp < 0x800) return {};
        if (cp >= 0xD800 && cp <= 0xDFFF) return {}; // surrogate
        return {cp, 3};
    }
    if ((b0 & 0xF8) == 0xF0) {
        if (!cont(pos + 1) || !cont(pos + 2) || !cont(pos + 3)) return {};
        char32_t cp = ((b0 & 0x07u) << 18) | ((b(pos + 1) & 0x3Fu) << 12) |
                      ((b(pos + 2) & 0x3Fu) << 6) | (b(pos + 3) & 0x3Fu);
        if (cp < 0x10000 || cp > 0x10FFFF) return {};
        return {cp, 4};
    }
    return {};
}

// Byte offset of the first invalid sequence, or nullopt if `s` is valid.
inline std::optional<std::size_t> find_invalid(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        DecodeResult r = decode_one(s, pos);
        if (r.length == 0) return pos;
        pos += r.length;
    }
    return std::nullopt;
}

inline bool is_valid(std::string_view s) { return !find_invalid(s).has_value(); }

inline void append(std::string &out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(char32_t cp) {
    std::string s;
    append(s, cp);
    return s;
}

// Decodes a validated string into scalar values. Call find_invalid first
// when the input is untrusted.
inline std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) {
        DecodeResult r = decode_one(s, pos);
        if (r.length == 0) { // treat as hard error; callers validate first
            cps.push_back(0xFFFD);
            pos += 1;
            continue;
        }
        cps.push_back(r.cp);
        pos += r.length;
    }
    return cps;
}

inline std::size_t count_scalars(std::string_view s) {
    std::size_t n = 0, pos = 0;
    while (pos < s.size()) {
        DecodeResult r = decode_one(s, pos);
        pos += r.length == 0 ? 1 : r.length;
        ++n;
    }
    return n;
}

// CJK Unified Ideographs base block plus Extension A. Intentionally
// narrow: covers Traditional Chinese without pulling in kana/hangul.
inline bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF);
}

} // namespace tokx::utf8
