#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "tokx/adapters.hpp"
#include "tokx/bpe_train.hpp"
#include "tokx/longbench.hpp"
#include "tokx/rng.hpp"

#include "support/test_util.hpp"

using namespace tokx;
using bench::PasskeyCase;
using bench::PasskeyOutcome;

// char-level tokenizer whose alphabet covers the filler pools and the key
// machinery (ASCII + the Chinese filler characters)
static bpe::Tokenizer suite_tokenizer() {
    std::set<char32_t> alphabet;
    for (char32_t c = 0x20; c < 0x7F; ++c) alphabet.insert(c);
    alphabet.insert(U'\n');
    for (std::string_view s : bench::kFillerZh)
        for (char32_t c : utf8::decode(s)) alphabet.insert(c);
    return bpe::Tokenizer::char_level(alphabet);
}

TEST_CASE("passkey cases satisfy their invariants") {
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {2048, 4096};
    cfg.per_bin = 2;
    cfg.seed = 7;
    auto cases = bench::gen_passkey_suite(cfg, tok);
    REQUIRE(cases.size() == 2 * 16 * 2);

    for (const PasskeyCase &c : cases) {
        CHECK(c.key.size() == 5);
        for (char ch : c.key) CHECK((ch >= 'a' && ch <= 'z'));
        // key occurs exactly once
        std::size_t occurrences = 0, pos = 0;
        while ((pos = c.context.find(c.key, pos)) != std::string::npos) {
            ++occurrences;
            pos += 1;
        }
        CHECK(occurrences == 1);
        // realized token length is exact
        auto ids = tok.encode(c.context);
        CHECK(static_cast<std::int64_t>(ids.size()) == c.target_length);
        // stored fraction lands in the stored bin
        CHECK(static_cast<int>(c.depth_fraction * 16) == c.depth_bin);
        // recomputed depth from the actual token offset matches
        auto offsets = tok.token_byte_offsets(ids);
        std::size_t key_byte = c.context.find(c.key);
        auto it = std::upper_bound(offsets.begin(), offsets.end() - 1, key_byte);
        std::int64_t key_token = static_cast<std::int64_t>(it - offsets.begin()) - 1;
        CHECK(static_cast<int>((16 * key_token) / c.target_length) == c.depth_bin);
        // the question sits at the end
        CHECK(c.context.rfind(c.question) == c.context.size() - c.question.size());
    }
}

TEST_CASE("suite generation is deterministic and jobs-independent") {
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {2048};
    cfg.per_bin = 2;
    cfg.seed = 7;
    auto a = bench::gen_passkey_suite(cfg, tok);
    auto b = bench::gen_passkey_suite(cfg, tok);
    cfg.jobs = 4;
    auto c = bench::gen_passkey_suite(cfg, tok);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].context == b[i].context);
        CHECK(a[i].key == b[i].key);
        CHECK(a[i].context == c[i].context);
    }
    // a different seed changes the contexts
    cfg.jobs = 1;
    cfg.seed = 8;
    auto d = bench::gen_passkey_suite(cfg, tok);
    CHECK(d[0].key != a[0].key); // overwhelmingly likely
}

TEST_CASE("bin 0 keys sit within the first sixteenth") {
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {2048};
    cfg.per_bin = 1;
    cfg.seed = 3;
    auto cases = bench::gen_passkey_suite(cfg, tok);
    const PasskeyCase &c0 = cases[0];
    REQUIRE(c0.depth_bin == 0);
    CHECK(c0.depth_fraction < 1.0 / 16.0);
}

TEST_CASE("chinese filler works with the same machinery") {
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {2048};
    cfg.per_bin = 1;
    cfg.seed = 11;
    cfg.filler_lang = bench::FillerLang::Chinese;
    auto cases = bench::gen_passkey_suite(cfg, tok);
    REQUIRE(cases.size() == 16);
    for (const auto &c : cases) {
        CHECK(static_cast<std::int64_t>(tok.encode(c.context).size()) == c.target_length);
        CHECK(c.context.find(c.key + " is the pass key.") != std::string::npos);
    }
}

TEST_CASE("too-small target length errors out") {
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {16};
    cfg.per_bin = 1;
    CHECK_THROWS_AS(bench::gen_passkey_suite(cfg, tok), Error);
    // a length that fits the frame but cannot reach the deepest bin:
    // the key sentence plus trailing question block the last sixteenth
    CHECK_THROWS_AS(bench::gen_passkey_case(bench::PasskeyConfig{{512}, 16, 1, 0,
                                                                 bench::FillerLang::English, 1},
                                            tok, 0, 15, 0),
                    InvalidArgument);
}

TEST_CASE("scoring: verbatim, case-slip, edit-slip, wrong") {
    PasskeyCase c;
    c.key = "xqjvm";
    CHECK(bench::score_passkey(c, "The key is xqjvm.") == PasskeyOutcome::Correct);
    CHECK(bench::score_passkey(c, "XQJVM") == PasskeyOutcome::NearMiss);
    CHECK(bench::score_passkey(c, "xqJvm") == PasskeyOutcome::NearMiss);
    CHECK(bench::score_passkey(c, "xqjv") == PasskeyOutcome::NearMiss);   // one deletion
    CHECK(bench::score_passkey(c, "xqjvmm") == PasskeyOutcome::Correct);  // contains it verbatim
    CHECK(bench::score_passkey(c, "xqjzm") == PasskeyOutcome::NearMiss);  // one substitution
    CHECK(bench::score_passkey(c, "abcde") == PasskeyOutcome::Wrong);
    CHECK(bench::score_passkey(c, "") == PasskeyOutcome::Wrong);
}

TEST_CASE("exact match normalization") {
    CHECK(bench::score_em("\xE5\x8F\xB0\xE5\x8C\x97", "\xE5\x8F\xB0\xE5\x8C\x97") == 1);
    CHECK(bench::score_em(" \xE5\x8F\xB0\xE5\x8C\x97 ", "\xE5\x8F\xB0\xE5\x8C\x97") == 1);
    CHECK(bench::score_em("\xE5\x8F\xB0\xE5\x8C\x97\xE5\xB8\x82", "\xE5\x8F\xB0\xE5\x8C\x97") == 0);
    CHECK(bench::score_em("a  b\tc", "a b c") == 1);
    CHECK(bench::score_em("a\xE3\x80\x80○", "a ○") == 1); // ideographic space collapses
    CHECK(bench::score_em("ab", "a b") == 0);
}

TEST_CASE("grid aggregation arithmetic and cell checks") {
    std::vector<PasskeyCase> cases;
    std::vector<PasskeyOutcome> outcomes;
    for (int bin = 0; bin < 16; ++bin) {
        for (int t = 0; t < 20; ++t) {
            PasskeyCase c;
            c.target_length = 4096;
            c.depth_bin = bin;
            c.id = "c" + std::to_string(bin) + "-" + std::to_string(t);
            cases.push_back(c);
            if (bin == 3)
                outcomes.push_back(t < 15 ? PasskeyOutcome::Correct : PasskeyOutcome::Wrong);
            else if (bin == 5)
                outcomes.push_back(t < 2 ? PasskeyOutcome::NearMiss : PasskeyOutcome::Correct);
            else
                outcomes.push_back(PasskeyOutcome::Correct);
        }
    }
    bench::GridResult grid = bench::aggregate_grid(cases, outcomes, 16, 20);
    REQUIRE(grid.lengths == std::vector<std::int64_t>{4096});
    CHECK(grid.accuracy[0][3] == 0.75);
    CHECK(grid.accuracy[0][5] == 0.9);
    CHECK(grid.near_misses[0][5] == 2);
    CHECK(grid.accuracy[0][0] == 1.0);

    // incomplete cell is an error
    cases.pop_back();
    outcomes.pop_back();
    CHECK_THROWS_AS(bench::aggregate_grid(cases, outcomes, 16, 20), InvalidArgument);
}

TEST_CASE("grid emission formats") {
    std::vector<PasskeyCase> cases;
    std::vector<PasskeyOutcome> outcomes;
    for (int bin = 0; bin < 16; ++bin) {
        PasskeyCase c;
        c.target_length = 128;
        c.depth_bin = bin;
        cases.push_back(c);
        outcomes.push_back(bin % 2 ? PasskeyOutcome::Correct : PasskeyOutcome::Wrong);
    }
    bench::GridResult grid = bench::aggregate_grid(cases, outcomes, 16, 1);
    std::string csv = bench::grid_to_csv(grid);
    CHECK(csv.find("length,bin0,") == 0);
    CHECK(csv.find("\n128,0,1,0,1,") != std::string::npos);
    std::string ppm = bench::grid_to_ppm(grid, 4);
    CHECK(ppm.rfind("P6\n64 4\n255\n", 0) == 0);
    CHECK(ppm.size() == std::string("P6\n64 4\n255\n").size() + 64 * 4 * 3);
    // deterministic bytes
    CHECK(bench::grid_to_ppm(grid, 4) == ppm);
}

TEST_CASE("longqa greedy packing walkthrough") {
    // contexts of 3k, 4k, 5k chars with a 6k target: packs [A,B], then [C]
    auto blob = [](char ch, std::size_t n, const std::string &answer) {
        std::string s(n, ch);
        s.replace(n / 3, answer.size(), answer);
        return s;
    };
    std::vector<bench::QaItem> items{
        {blob('a', 3000, "ansA"), "qa?", "ansA"},
        {blob('b', 4000, "ansB"), "qb?", "ansB"},
        {blob('c', 5000, "ansC"), "qc?", "ansC"},
    };
    auto cases = bench::gen_longqa(items, 6000);
    REQUIRE(cases.size() == 3);
    CHECK(cases[0].question == "qa?");
    CHECK(cases[1].question == "qb?");
    CHECK(cases[0].context == cases[1].context); // shared packed context
    CHECK(cases[0].context.size() == 7000);
    // the trailing pack [C] is padded back up to the target
    CHECK(cases[2].context.size() >= 6000);
    for (const auto &c : cases) {
        CHECK(c.context.find(c.answer) != std::string::npos);
        CHECK(c.answer_depth_fraction >= 0.0);
        CHECK(c.answer_depth_fraction < 1.0);
    }
    // depth of B's answer reflects its article position
    std::size_t expect_b = 3000 + 4000 / 3;
    CHECK(cases[1].answer_depth_fraction ==
          Catch::Approx(static_cast<double>(expect_b) / 7000.0).margin(1e-9));
}

TEST_CASE("longqa degenerate packing: target below single article") {
    std::vector<bench::QaItem> items{{"only article with answer inside", "q?", "answer"}};
    auto cases = bench::gen_longqa(items, 10);
    REQUIRE(cases.size() == 1);
    CHECK(cases[0].context == items[0].context);
}

TEST_CASE("longqa validates answers against their own contexts") {
    std::vector<bench::QaItem> items{{"context without the gold", "q?", "missing"}};
    CHECK_THROWS_AS(bench::gen_longqa(items, 100), InvalidArgument);
    CHECK_THROWS_AS(bench::gen_longqa({}, 100), InvalidArgument);
}

TEST_CASE("longqa conservation and length bounds at scale") {
    Rng rng(97);
    std::vector<bench::QaItem> items;
    std::size_t max_len = 0;
    for (int i = 0; i < 40; ++i) {
        std::size_t n = 200 + rng.below(1800);
        std::string ctx;
        for (std::size_t k = 0; k < n; ++k)
            utf8::append(ctx, static_cast<char32_t>(0x4E00 + rng.below(600)));
        std::string answer;
        for (int k = 0; k < 4; ++k) utf8::append(answer, static_cast<char32_t>(0x4E00 + rng.below(600)));
        std::size_t at = rng.below(n - 8);
        // splice the answer in at a char boundary
        std::vector<char32_t> cps = utf8::decode(ctx);
        std::string rebuilt;
        for (std::size_t k = 0; k < cps.size(); ++k) {
            if (k == at) rebuilt += answer;
            utf8::append(rebuilt, cps[k]);
        }
        items.push_back({rebuilt, "q" + std::to_string(i), answer});
        max_len = std::max(max_len, utf8::count_scalars(rebuilt));
    }
    for (std::int64_t target : {3000, 9000}) {
        auto cases = bench::gen_longqa(items, target);
        CHECK(cases.size() == items.size()); // one case per question
        for (const auto &c : cases) {
            std::int64_t len = static_cast<std::int64_t>(utf8::count_scalars(c.context));
            CHECK(len >= target);
            CHECK(len < target + static_cast<std::int64_t>(max_len));
            CHECK(c.context.find(c.answer) != std::string::npos);
        }
    }
}

TEST_CASE("jsonl round trip for both case kinds") {
    testutil::TempDir tmp("jsonl");
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {2048};
    cfg.per_bin = 1;
    cfg.seed = 21;
    auto cases = bench::gen_passkey_suite(cfg, tok);
    bench::write_jsonl(cases, (tmp / "pk.jsonl").string(), bench::passkey_case_to_json);
    std::vector<bench::PasskeyCase> back;
    bench::read_jsonl((tmp / "pk.jsonl").string(),
                      [&](const nlohmann::json &j) { back.push_back(bench::passkey_case_from_json(j)); });
    REQUIRE(back.size() == cases.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].context == cases[i].context);
        CHECK(back[i].key == cases[i].key);
        CHECK(back[i].depth_bin == cases[i].depth_bin);
        CHECK(back[i].depth_fraction == cases[i].depth_fraction);
    }
    // writing again is byte-identical
    bench::write_jsonl(back, (tmp / "pk2.jsonl").string(), bench::passkey_case_to_json);
    CHECK(testutil::read_file(tmp / "pk.jsonl") == testutil::read_file(tmp / "pk2.jsonl"));
}

TEST_CASE("oracle adapter solves generated cases; truncation blinds it") {
    bpe::Tokenizer tok = suite_tokenizer();
    bench::PasskeyConfig cfg;
    cfg.lengths = {2048};
    cfg.per_bin = 2;
    cfg.seed = 23;
    auto cases = bench::gen_passkey_suite(cfg, tok);

    eval::KeyExtractorAdapter oracle;
    eval::KeyExtractorAdapter blind(&tok, 64); // sees the last 64 tokens only
    for (const auto &c : cases) {
        CHECK(bench::score_passkey(c, oracle.generate({c.context, 32, 0.0})) == PasskeyOutcome::Correct);
        auto ids = tok.encode(c.context);
        auto offsets = tok.token_byte_offsets(ids);
        std::size_t key_byte = c.context.find(c.key);
        auto it = std::upper_bound(offsets.begin(), offsets.end() - 1, key_byte);
        std::int64_t key_token = static_cast<std::int64_t>(it - offsets.begin()) - 1;
        bool visible = c.target_length - key_token <= 64;
        auto outcome = bench::score_passkey(c, blind.generate({c.context, 32, 0.0}));
        CHECK((outcome == PasskeyOutcome::Correct) == visible);
    }
}
