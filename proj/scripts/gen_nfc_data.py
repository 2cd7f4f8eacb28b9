#!/usr/bin/env python3
"""Regenerates include/tokx/detail/nfc_data.hpp from the Python unicodedata
module (UCD snapshot of the running interpreter).

Emitted tables:
  - combining classes for every codepoint with ccc != 0
  - fully expanded canonical decompositions (Hangul excluded, handled
    algorithmically at runtime)
  - primary composites (canonical two-element decompositions that NFC
    recombines, i.e. not excluded from composition)

Usage: python3 scripts/gen_nfc_data.py > include/tokx/detail/nfc_data.hpp
"""

import sys
import unicodedata

HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172


def is_hangul_syllable(cp: int) -> bool:
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def canonical_decomposition(cp: int):
    d = unicodedata.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    return [int(x, 16) for x in d.split()]


def full_decomposition(cp: int, memo):
    if cp in memo:
        return memo[cp]
    d = canonical_decomposition(cp)
    if d is None:
        memo[cp] = [cp]
        return memo[cp]
    out = []
    for part in d:
        out.extend(full_decomposition(part, memo))
    memo[cp] = out
    return out


def main():
    ccc = []
    decomp = []
    comp = []
    memo = {}
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = unicodedata.combining(chr(cp))
        if c:
            ccc.append((cp, c))
        if is_hangul_syllable(cp):
            continue
        d = canonical_decomposition(cp)
        if d is None:
            continue
        full = full_decomposition(cp, memo)
        assert 1 <= len(full) <= 4
        decomp.append((cp, full))
        # Primary composite test: NFC maps the canonical pair back to cp.
        if len(d) == 2:
            pair = chr(d[0]) + chr(d[1])
            if unicodedata.normalize("NFC", pair) == chr(cp):
                comp.append((d[0], d[1], cp))
    comp.sort()

    w = sys.stdout.write
    w("#pragma once\n\n")
    w("// Generated by scripts/gen_nfc_data.py (unicodedata %s). Do not edit.\n" % unicodedata.unidata_version)
    w("#include <cstdint>\n#include <cstddef>\n\nnamespace tokx::detail {\n\n")
    w("struct CccEntry { char32_t cp; std::uint8_t ccc; };\n")
    w("struct DecompEntry { char32_t cp; std::uint8_t len; char32_t to[4]; };\n")
    w("struct CompEntry { char32_t first; char32_t second; char32_t composed; };\n\n")

    w("inline constexpr CccEntry kCccTable[] = {\n")
    for cp, c in ccc:
        w("    {0x%X, %d},\n" % (cp, c))
    w("};\ninline constexpr std::size_t kCccTableSize = sizeof(kCccTable) / sizeof(kCccTable[0]);\n\n")

    w("inline constexpr DecompEntry kDecompTable[] = {\n")
    for cp, full in decomp:
        padded = full + [0] * (4 - len(full))
        w("    {0x%X, %d, {0x%X, 0x%X, 0x%X, 0x%X}},\n" % (cp, len(full), *padded))
    w("};\ninline constexpr std::size_t kDecompTableSize = sizeof(kDecompTable) / sizeof(kDecompTable[0]);\n\n")

    w("inline constexpr CompEntry kCompTable[] = {\n")
    for a, b, c in comp:
        w("    {0x%X, 0x%X, 0x%X},\n" % (a, b, c))
    w("};\ninline constexpr std::size_t kCompTableSize = sizeof(kCompTable) / sizeof(kCompTable[0]);\n\n")
    w("} // namespace tokx::detail\n")


if __name__ == "__main__":
    main()
