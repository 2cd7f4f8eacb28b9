#include <catch2/catch_amalgamated.hpp>

#include "tokx/rng.hpp"
#include "tokx/utf8.hpp"

#include "support/test_util.hpp"

using namespace tokx;

TEST_CASE("decode_one handles the scalar ranges") {
    CHECK(utf8::decode_one("a", 0).cp == U'a');
    CHECK(utf8::decode_one("a", 0).length == 1);
    std::string ni = "\xE4\xBD\xA0"; // U+4F60
    CHECK(utf8::decode_one(ni, 0).cp == 0x4F60);
    CHECK(utf8::decode_one(ni, 0).length == 3);
    std::string emoji = "\xF0\x9F\x8C\x80"; // U+1F300
    CHECK(utf8::decode_one(emoji, 0).cp == 0x1F300);
    CHECK(utf8::decode_one(emoji, 0).length == 4);
}

TEST_CASE("invalid sequences are rejected with a position") {
    CHECK(utf8::find_invalid("hello") == std::nullopt);
    CHECK(utf8::find_invalid(std::string("\xFF") + "abc").value() == 0);
    CHECK(utf8::find_invalid(std::string("ab") + "\xC3").value() == 2); // truncated
    CHECK(utf8::find_invalid("\xC0\xAF").value() == 0);                 // overlong
    CHECK(utf8::find_invalid("\xED\xA0\x80").value() == 0);             // surrogate
    CHECK(utf8::find_invalid("\xF4\x90\x80\x80").value() == 0);         // > U+10FFFF
    std::string mixed = "ok\xE4\xBD";                                    // truncated 3-byte tail
    CHECK(utf8::find_invalid(mixed).value() == 2);
}

TEST_CASE("encode/decode round-trip over random scalars") {
    Rng rng(42);
    for (int t = 0; t < 2000; ++t) {
        std::string s = testutil::random_utf8(rng, 64);
        REQUIRE(utf8::find_invalid(s) == std::nullopt);
        std::string rebuilt;
        for (char32_t cp : utf8::decode(s)) utf8::append(rebuilt, cp);
        CHECK(rebuilt == s);
        CHECK(utf8::count_scalars(s) == utf8::decode(s).size());
    }
}

TEST_CASE("cjk ranges cover base block and extension A only") {
    CHECK(utf8::is_cjk(0x4E00));
    CHECK(utf8::is_cjk(0x9FFF));
    CHECK(utf8::is_cjk(0x3400));
    CHECK(utf8::is_cjk(0x4DBF));
    CHECK_FALSE(utf8::is_cjk(U'a'));
    CHECK_FALSE(utf8::is_cjk(0x30A2)); // katakana
    CHECK_FALSE(utf8::is_cjk(0xAC00)); // hangul
    CHECK_FALSE(utf8::is_cjk(0x20000)); // extension B stays out by design
}
