#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "tokx/detail/nfc_data.hpp"
#include "tokx/utf8.hpp"

// Canonical composition (NFC). Corpus normalization is opt-in: tokenizer
// statistics are taken over raw text unless the caller asks otherwise.
namespace tokx::nfc {

namespace hangul {
inline constexpr char32_t SBase = 0xAC00, LBase = 0x1100, VBase = 0x1161, TBase = 0x11A7;
inline constexpr int LCount = 19, VCount = 21, TCount = 28, NCount = VCount * TCount;
inline constexpr int SCount = LCount * NCount;
} // namespace hangul

inline std::uint8_t combining_class(char32_t cp) {
    auto it = std::lower_bound(detail::kCccTable, detail::kCccTable + detail::kCccTableSize, cp,
                               [](const detail::CccEntry &e, char32_t v) { return e.cp < v; });
    if (it != detail::kCccTable + detail::kCccTableSize && it->cp == cp) return it->ccc;
    return 0;
}

inline void decompose_cp(char32_t cp, std::vector<char32_t> &out) {
    using namespace hangul;
    if (cp >= SBase && cp < SBase + SCount) {
        char32_t s = cp - SBase;
        out.push_back(LBase + s / NCount);
        out.push_back(VBase + (s % NCount) / TCount);
        if (s % TCount) out.push_back(TBase + s % TCount);
        return;
    }
    auto it = std::lower_bound(detail::kDecompTable, detail::kDecompTable + detail::kDecompTableSize, cp,
                               [](const detail::DecompEntry &e, char32_t v) { return e.cp < v; });
    if (it != detail::kDecompTable + detail::kDecompTableSize && it->cp == cp) {
        for (unsigned i = 0; i < it->len; ++i) out.push_back(it->to[i]);
        return;
    }
    out.push_back(cp);
}

inline char32_t compose_pair(char32_t a, char32_t b) {
    using namespace hangul;
    if (a >= LBase && a < LBase + LCount && b >= VBase && b < VBase + VCount)
        return SBase + ((a - LBase) * VCount + (b - VBase)) * TCount;
    if (a >= SBase && a < SBase + SCount && (a - SBase) % TCount == 0 && b > TBase && b < TBase + TCount)
        return a + (b - TBase);
    auto key = detail::CompEntry{a, b, 0};
    auto it = std::lower_bound(detail::kCompTable, detail::kCompTable + detail::kCompTableSize, key,
                               [](const detail::CompEntry &l, const detail::CompEntry &r) {
                                   return l.first != r.first ? l.first < r.first : l.second < r.second;
                               });
    if (it != detail::kCompTable + detail::kCompTableSize && it->first == a && it->second == b)
        return it->composed;
    return 0;
}

// NFC of valid UTF-8 input. Invalid input should be rejected upstream.
inline std::string normalize(std::string_view text) {
    std::vector<char32_t> cps;
    cps.reserve(text.size());
    for (char32_t cp : utf8::decode(text)) decompose_cp(cp, cps);

    // Canonical ordering: bubble adjacent marks into nondecreasing ccc.
    for (std::size_t i = 1; i < cps.size(); ++i) {
        std::uint8_t cc = combining_class(cps[i]);
        if (cc == 0) continue;
        std::size_t j = i;
        while (j > 0) {
            std::uint8_t prev = combining_class(cps[j - 1]);
            if (prev == 0 || prev <= cc) break;
            std::swap(cps[j - 1], cps[j]);
            --j;
        }
    }

    // Canonical composition. A char composes with the last starter when
    // it immediately follows it or every mark in between has lower ccc.
    std::vector<char32_t> out;
    out.reserve(cps.size());
    std::ptrdiff_t last_starter = -1;
    std::uint8_t last_cc = 0; // ccc of the most recently emitted char
    for (char32_t cp : cps) {
        std::uint8_t cc = combining_class(cp);
        if (last_starter >= 0) {
            bool follows_starter = out.size() == static_cast<std::size_t>(last_starter) + 1;
            if (follows_starter || last_cc < cc) {
                if (char32_t comp = compose_pair(out[static_cast<std::size_t>(last_starter)], cp)) {
                    out[static_cast<std::size_t>(last_starter)] = comp;
                    continue; // last_cc unchanged: intervening marks remain
                }
            }
        }
        out.push_back(cp);
        if (cc == 0) {
            last_starter = static_cast<std::ptrdiff_t>(out.size()) - 1;
            last_cc = 0;
        } else {
            last_cc = cc;
        }
    }

    std::string result;
    result.reserve(text.size());
    for (char32_t cp : out) utf8::append(result, cp);
    return result;
}

} // namespace tokx::nfc
