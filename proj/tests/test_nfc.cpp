#include <catch2/catch_amalgamated.hpp>

#include "tokx/nfc.hpp"

using namespace tokx;

TEST_CASE("composes combining sequences") {
    // e + COMBINING ACUTE -> U+00E9
    CHECK(nfc::normalize("e\xCC\x81") == "\xC3\xA9");
    // A + RING ABOVE -> U+00C5
    CHECK(nfc::normalize("A\xCC\x8A") == "\xC3\x85");
    // already-composed input is untouched
    CHECK(nfc::normalize("\xC3\xA9") == "\xC3\xA9");
}

TEST_CASE("canonical ordering before composition") {
    // e + cedilla(ccc 202) + acute(ccc 230): the cedilla composes into
    // the starter first (U+0229), the acute stays as a trailing mark.
    // Expected bytes cross-checked against a reference normalizer.
    std::string input = "e\xCC\xA7\xCC\x81";
    CHECK(nfc::normalize(input) == "\xC8\xA9\xCC\x81");
    // acute first in input: same canonical form
    std::string swapped = "e\xCC\x81\xCC\xA7";
    CHECK(nfc::normalize(swapped) == "\xC8\xA9\xCC\x81");
}

TEST_CASE("hangul composition is algorithmic") {
    // L U+1100 + V U+1161 + T U+11A8 -> U+AC01
    CHECK(nfc::normalize("\xE1\x84\x80\xE1\x85\xA1\xE1\x86\xA8") == "\xEA\xB0\x81");
    // syllable round-trips
    CHECK(nfc::normalize("\xEA\xB0\x81") == "\xEA\xB0\x81");
}

TEST_CASE("cjk ideographs pass through except singleton decompositions") {
    CHECK(nfc::normalize("\xE4\xBD\xA0\xE5\xA5\xBD") == "\xE4\xBD\xA0\xE5\xA5\xBD");
    // U+F900 is a compatibility ideograph with a canonical singleton
    // decomposition to U+8C48
    CHECK(nfc::normalize("\xEF\xA4\x80") == "\xE8\xB1\x88");
}

TEST_CASE("idempotence") {
    const char *samples[] = {"e\xCC\x81 plain", "\xE1\x84\x80\xE1\x85\xA1", "mixed \xC3\xA9\xCC\xA7 text",
                             "\xE4\xBD\xA0\xE5\xA5\xBD ascii"};
    for (const char *s : samples) {
        std::string once = nfc::normalize(s);
        CHECK(nfc::normalize(once) == once);
    }
}
