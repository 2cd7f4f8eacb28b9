#include <catch2/catch_amalgamated.hpp>

#include "tokx/corpus.hpp"
#include "tokx/rng.hpp"

#include "support/test_util.hpp"

using namespace tokx;
using testutil::TempDir;

static corpus::CorpusSource source_for(const std::vector<std::string> &paths) {
    corpus::CorpusSource src;
    src.paths = paths;
    return src;
}

TEST_CASE("documents stream in path order") {
    TempDir tmp("corpus-order");
    testutil::write_file(tmp / "a.txt", "\xE4\xBD\xA0\xE5\xA5\xBD"); // 你好
    testutil::write_file(tmp / "b.txt", "world");
    auto docs = corpus::load_corpus(source_for({(tmp / "a.txt").string(), (tmp / "b.txt").string()}));
    REQUIRE(docs.size() == 2);
    CHECK(docs[0] == "\xE4\xBD\xA0\xE5\xA5\xBD");
    CHECK(docs[1] == "world");
}

TEST_CASE("empty file list yields an empty stream") {
    auto docs = corpus::load_corpus(source_for({}));
    CHECK(docs.empty());
}

TEST_CASE("glob patterns expand deterministically") {
    TempDir tmp("corpus-glob");
    testutil::write_file(tmp / "c2.txt", "two");
    testutil::write_file(tmp / "c1.txt", "one");
    testutil::write_file(tmp / "c3.txt", "three");
    auto docs = corpus::load_corpus(source_for({(tmp.path() / "c*.txt").string()}));
    REQUIRE(docs.size() == 3);
    CHECK(docs[0] == "one");
    CHECK(docs[1] == "two");
    CHECK(docs[2] == "three");
}

TEST_CASE("missing files are an error") {
    CHECK_THROWS_AS(corpus::load_corpus(source_for({"/nonexistent/nowhere.txt"})), IoError);
}

TEST_CASE("invalid UTF-8 is rejected with file and offset") {
    TempDir tmp("corpus-bad");
    testutil::write_file(tmp / "bad.txt", std::string("\xFF") + "rest");
    try {
        corpus::load_corpus(source_for({(tmp / "bad.txt").string()}));
        FAIL("expected EncodingError");
    } catch (const EncodingError &e) {
        CHECK(e.byte_offset() == 0);
        CHECK(e.file().find("bad.txt") != std::string::npos);
    }

    testutil::write_file(tmp / "bad2.txt", std::string("ok\n") + "\xC3" + "x");
    try {
        corpus::load_corpus(source_for({(tmp / "bad2.txt").string()}));
        FAIL("expected EncodingError");
    } catch (const EncodingError &e) {
        CHECK(e.byte_offset() == 3);
    }
}

TEST_CASE("separator splitting preserves non-separator bytes") {
    TempDir tmp("corpus-sep");
    std::string content = "first doc\n\nsecond doc\n\n\n\nthird\n\n";
    testutil::write_file(tmp / "d.txt", content);
    auto docs = corpus::load_corpus(source_for({(tmp / "d.txt").string()}));
    REQUIRE(docs.size() == 3);
    CHECK(docs[0] == "first doc");
    CHECK(docs[1] == "second doc");
    CHECK(docs[2] == "third");
    std::size_t doc_bytes = 0, sep_count = 0, pos = 0;
    for (const auto &d : docs) doc_bytes += d.size();
    while ((pos = content.find("\n\n", pos)) != std::string::npos) {
        ++sep_count;
        pos += 2;
    }
    CHECK(doc_bytes == content.size() - 2 * sep_count);
}

TEST_CASE("char stats count scalars, bytes and cjk") {
    TempDir tmp("corpus-stats");
    testutil::write_file(tmp / "s.txt", "\xE4\xBD\xA0\xE5\xA5\xBD" "ab"); // 你好ab
    corpus::CharStats stats = corpus::char_stats(source_for({(tmp / "s.txt").string()}));
    CHECK(stats.total_chars == 4);
    CHECK(stats.cjk_chars == 2);
    CHECK(stats.total_bytes == 8);
    CHECK(stats.doc_count == 1);
}

TEST_CASE("char stats on empty corpus are all zero") {
    corpus::CharStats stats = corpus::char_stats(source_for({}));
    CHECK(stats == corpus::CharStats{});
}

TEST_CASE("stats are additive over documents") {
    TempDir tmp("corpus-add");
    Rng rng(2024);
    std::string content;
    std::vector<std::string> docs;
    for (int i = 0; i < 1000; ++i) {
        std::string doc = testutil::random_utf8(rng, 40);
        // separators inside documents would change the split
        std::string clean;
        std::size_t k = 0;
        for (char c : doc) clean.push_back(c == '\n' ? ' ' : c), ++k;
        if (clean.empty()) clean = "x";
        docs.push_back(clean);
        if (i) content += "\n\n";
        content += clean;
    }
    testutil::write_file(tmp / "many.txt", content);
    corpus::CorpusSource src = source_for({(tmp / "many.txt").string()});
    corpus::CharStats whole = corpus::char_stats(src);

    corpus::CharStats sum;
    for (const auto &d : docs) sum += corpus::doc_stats(d);
    CHECK(whole == sum);
    // determinism: a second pass is identical
    CHECK(corpus::char_stats(src) == whole);
}

TEST_CASE("two streams over the same source are independent") {
    TempDir tmp("corpus-two");
    testutil::write_file(tmp / "x.txt", "one\n\ntwo");
    corpus::CorpusSource src = source_for({(tmp / "x.txt").string()});
    corpus::DocumentStream s1(src), s2(src);
    CHECK(s1.next().value() == "one");
    CHECK(s2.next().value() == "one");
    CHECK(s1.next().value() == "two");
    CHECK(s2.next().value() == "two");
    CHECK_FALSE(s1.next().has_value());
}

TEST_CASE("opt-in NFC normalization") {
    TempDir tmp("corpus-nfc");
    testutil::write_file(tmp / "n.txt", "e\xCC\x81");
    corpus::CorpusSource raw = source_for({(tmp / "n.txt").string()});
    CHECK(corpus::load_corpus(raw)[0] == "e\xCC\x81"); // raw by default
    corpus::CorpusSource norm = raw;
    norm.normalize_nfc = true;
    CHECK(corpus::load_corpus(norm)[0] == "\xC3\xA9");
}
