// Acceptance suite: ten criteria, one printed pass/fail line each.
// Every tolerance is pinned in this file; nothing defers to later
// calibration. Runs from the build tree against the bundled sample
// corpus and the CLI binary.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "tokx/adapters.hpp"
#include "tokx/bpe_train.hpp"
#include "tokx/corpus.hpp"
#include "tokx/eval.hpp"
#include "tokx/longbench.hpp"
#include "tokx/rng.hpp"
#include "tokx/rope.hpp"
#include "tokx/tokenizer.hpp"
#include "tokx/vocab_extend.hpp"

#include "support/bpe_oracle.hpp"
#include "support/test_util.hpp"

using namespace tokx;
namespace fs = std::filesystem;

namespace {

void criterion_line(int n, const char *name, bool pass) {
    std::printf("criterion %2d [%s] %s\n", n, pass ? "PASS" : "FAIL", name);
    std::fflush(stdout);
}

std::vector<std::string> bundled_corpus() {
    corpus::CorpusSource src;
    src.paths = {std::string(TOKX_SOURCE_DIR) + "/data/zh_sample/*.txt"};
    return corpus::load_corpus(src);
}

bpe::Tokenizer char_base(const std::vector<std::string> &docs) {
    std::set<char32_t> alphabet;
    for (const auto &d : docs)
        for (char32_t c : utf8::decode(d)) alphabet.insert(c);
    return bpe::Tokenizer::char_level(alphabet);
}

int run_cli(const std::string &args) {
    std::string cmd = std::string(TOKX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("criterion 1: published table averages reproduce") {
    struct Row {
        const char *model;
        std::vector<double> scores;
        double printed;
        int places;
    };
    // per-category scores and the printed AVG column of the published
    // TMMLU+ table (2 decimals) and MT-Bench-tw table (1 decimal)
    const std::vector<Row> rows{
        {"Yi-6B-Chat/acc", {37.80, 51.74, 45.36, 44.25}, 44.79, 2},
        {"GPT-3.5-Turbo/acc", {41.58, 48.52, 40.96, 43.18}, 43.56, 2},
        {"Breeze-Instruct/acc", {36.46, 48.37, 45.11, 40.75}, 42.67, 2},
        {"Qwen1.5-7B-Chat/acc", {41.48, 51.66, 44.05, 45.40}, 45.64, 2},
        {"Taiwan-LLM-13B/acc", {27.74, 33.69, 27.03, 29.43}, 29.47, 2},
        {"Taiwan-LLM-7B/acc", {25.58, 31.76, 27.36, 27.61}, 28.08, 2},
        {"GPT-3.5-Turbo/chat", {7.8, 6.1, 5.1, 6.4, 6.2, 8.7, 7.4, 9.3}, 7.1, 1},
        {"Breeze-Instruct/chat", {7.8, 5.2, 4.2, 4.2, 4.1, 7.6, 5.9, 9.1}, 6.0, 1},
        {"Qwen1.5-7B-Chat/chat", {9.0, 5.6, 4.7, 2.8, 3.7, 8.0, 8.0, 9.4}, 6.4, 1},
        {"Yi-6B-Chat/chat", {7.3, 2.7, 3.1, 3.3, 2.3, 7.2, 5.2, 8.8}, 5.0, 1},
        {"Taiwan-LLM-13B/chat", {6.1, 3.4, 4.1, 2.3, 3.1, 7.4, 6.6, 6.8}, 5.0, 1},
        {"Taiwan-LLM-7B/chat", {5.2, 2.6, 2.3, 1.2, 3.4, 6.6, 5.7, 6.8}, 4.2, 1},
    };
    bool all_ok = true;
    for (const Row &row : rows) {
        eval::CategoryAverages out = eval::aggregate_categories({{row.model, row.scores}});
        // tolerance ±0.005 applied before display rounding: the computed
        // mean must sit within 0.005 plus half a display quantum of the
        // printed value
        double bound = 0.005 + (row.places == 2 ? 0.005 : 0.05) + 1e-12;
        bool ok = std::abs(out.overall - row.printed) <= bound;
        all_ok &= ok;
        CHECK(ok);
    }
    // the one internally inconsistent published cell is pinned exactly:
    // Qwen1.5 category scores average to 45.6475 (displays 45.65), while
    // the printed AVG cell says 45.64 — 0.0075 away, inside the bound
    // above but outside bare ±0.005
    eval::CategoryAverages qwen =
        eval::aggregate_categories({{"qwen", {41.48, 51.66, 44.05, 45.40}}});
    CHECK(qwen.overall == 45.6475);
    CHECK(std::abs(qwen.overall - 45.64) > 0.005);
    CHECK(eval::display_round(qwen.overall, 2) == 45.65);
    criterion_line(1, "table arithmetic (6 ACC rows + 6 chat rows)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 2: extension bookkeeping") {
    Rng rng(20260810);
    bool all_ok = true;
    for (int t = 0; t < 1000; ++t) {
        std::size_t nb = 1 + rng.below(60), nc = 1 + rng.below(60);
        std::vector<std::string> base_vocab, cand_vocab;
        for (std::size_t i = 0; i < nb; ++i) base_vocab.push_back("b" + std::to_string(i));
        std::set<std::string> cand_set;
        for (std::size_t i = 0; i < nc; ++i) {
            if (rng.below(2))
                cand_set.insert("b" + std::to_string(rng.below(nb)));
            else
                cand_set.insert("c" + std::to_string(i));
        }
        cand_vocab.assign(cand_set.begin(), cand_set.end());
        vocab::Extension ext = vocab::extend_vocabulary(bpe::Tokenizer(base_vocab, {}, false),
                                                        bpe::Tokenizer(cand_vocab, {}, false));
        bool ok = ext.report.extended_size ==
                      ext.report.base_size + ext.report.candidates_in - ext.report.duplicates_removed &&
                  ext.report.new_ids_begin == ext.report.base_size &&
                  static_cast<std::int64_t>(ext.tokenizer.vocab_size()) == ext.report.extended_size;
        all_ok &= ok;
        if (!ok) CHECK(ok);
    }

    // paper-scale scenario: the published report extends 29873 tokens and
    // states 61872 as the total; exact arithmetic gives 61873 from a
    // 32000-token base and 61872 from a 31999-token base
    auto synth = [](std::size_t n, const char *prefix) {
        std::vector<std::string> v;
        for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
        return bpe::Tokenizer(v, {}, false);
    };
    vocab::Extension from31999 = vocab::extend_vocabulary(synth(31999, "b"), synth(29873, "c"));
    vocab::Extension from32000 = vocab::extend_vocabulary(synth(32000, "b"), synth(29873, "c"));
    bool paper_ok = from31999.report.extended_size == 61872 && from31999.report.duplicates_removed == 0 &&
                    from32000.report.extended_size == 61873 && from32000.report.duplicates_removed == 0;
    CHECK(paper_ok);
    std::printf("    note: 32000 + 29873 - 0 = %lld vs published total 61872 (off by one); "
                "31999 + 29873 - 0 = %lld\n",
                static_cast<long long>(from32000.report.extended_size),
                static_cast<long long>(from31999.report.extended_size));
    all_ok &= paper_ok;
    criterion_line(2, "extension bookkeeping (1000 randomized + paper-scale)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 3: BPE oracle equivalence and round-trips") {
    Rng rng(3);
    bool all_ok = true;
    for (int t = 0; t < 50; ++t) {
        // corpora up to 10 kB (CJK chars are 3 bytes each)
        std::vector<std::string> docs = testutil::random_corpus(rng, 4 + rng.below(5), 600);
        std::size_t bytes = 0;
        for (const auto &d : docs) bytes += d.size();
        REQUIRE(bytes <= 10240);
        std::int64_t target = 15 + static_cast<std::int64_t>(rng.below(40));
        bpe::TrainConfig cfg;
        cfg.target_new_tokens = target;
        bpe::TrainResult got = bpe::train_bpe(docs, cfg);
        std::vector<oracle::Pair> ref = oracle::train_reference(docs, {.merges = target});
        bool ok = got.tokenizer.merges().size() == ref.size();
        if (ok)
            for (std::size_t i = 0; i < ref.size(); ++i) ok &= got.tokenizer.merges()[i] == ref[i];
        all_ok &= ok;
        CHECK(ok);
    }

    // 10,000 fuzzed round-trips through a trained tokenizer
    std::vector<std::string> docs = testutil::random_corpus(rng, 8, 800);
    bpe::TrainConfig cfg;
    cfg.target_new_tokens = 60;
    bpe::Tokenizer tok = bpe::train_bpe(docs, cfg).tokenizer;
    bool rt_ok = true;
    for (int t = 0; t < 10000; ++t) {
        std::string s = testutil::random_utf8(rng, 80);
        rt_ok &= tok.decode(tok.encode(s)) == s;
    }
    CHECK(rt_ok);
    all_ok &= rt_ok;
    criterion_line(3, "BPE oracle equivalence (50 corpora) + 10k round-trips", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 4: compression on the bundled corpus") {
    std::vector<std::string> docs = bundled_corpus();
    REQUIRE(!docs.empty());
    bpe::Tokenizer base = char_base(docs);

    double prev_ratio = 0.0;
    std::int64_t prev_tokens = 0;
    bool all_ok = true;
    double ratio_5k = 0.0;
    for (std::int64_t n : {1000, 2000, 5000}) {
        bpe::TrainConfig cfg;
        cfg.target_new_tokens = n;
        bpe::TrainResult trained = bpe::train_bpe(docs, cfg);
        bool full = trained.merges_trained == n;
        CHECK(full);
        vocab::Extension ext = vocab::extend_vocabulary(base, trained.tokenizer);
        vocab::CompressionReport rep = vocab::measure_compression(base, ext.tokenizer, docs, 4);
        bool monotone = prev_ratio == 0.0 || rep.ratio >= prev_ratio;
        bool shrinking = prev_tokens == 0 || rep.tokens_extended <= prev_tokens;
        CHECK(monotone);
        CHECK(shrinking);
        all_ok &= full && monotone && shrinking;
        prev_ratio = rep.ratio;
        prev_tokens = rep.tokens_extended;
        if (n == 5000) ratio_5k = rep.ratio;
        std::printf("    %lld merges: ratio %.4f, chars/token %.4f\n", static_cast<long long>(n),
                    rep.ratio, rep.chars_per_token_extended);
    }
    bool threshold = ratio_5k >= 1.5;
    CHECK(threshold);
    all_ok &= threshold;
    criterion_line(4, "compression ratio >= 1.5 at 5k merges, non-decreasing over 1k/2k/5k", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 5: rotary embedding probe") {
    rope::RopeConfig cfg;
    cfg.head_dim = 128;
    cfg.base = 10000.0;
    cfg.max_context = 1 << 20;
    std::vector<double> freqs = rope::rope_frequencies(cfg);
    Rng rng(5);

    bool norm_ok = true;
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> v(static_cast<std::size_t>(cfg.head_dim));
        for (double &x : v) x = rng.uniform(-1.0, 1.0);
        auto r = rope::apply_rope(v, static_cast<std::int64_t>(rng.below(1 << 20)), freqs);
        double n0 = 0.0, n1 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            n0 += v[i] * v[i];
            n1 += r[i] * r[i];
        }
        norm_ok &= std::abs(std::sqrt(n1) - std::sqrt(n0)) / std::sqrt(n0) <= 1e-9;
    }
    CHECK(norm_ok);

    bool offset_ok = true;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> q(static_cast<std::size_t>(cfg.head_dim)), k(q.size());
        for (double &x : q) x = rng.uniform(-1.0, 1.0);
        for (double &x : k) x = rng.uniform(-1.0, 1.0);
        std::int64_t delta = static_cast<std::int64_t>(rng.below(4096));
        std::int64_t p1 = static_cast<std::int64_t>(rng.below(1 << 16));
        std::int64_t p2 = static_cast<std::int64_t>(rng.below(1 << 16));
        auto score = [&](std::int64_t p) {
            auto rq = rope::apply_rope(q, p + delta, freqs);
            auto rk = rope::apply_rope(k, p, freqs);
            double dot = 0.0;
            for (std::size_t i = 0; i < rq.size(); ++i) dot += rq[i] * rk[i];
            return dot;
        };
        offset_ok &= std::abs(score(p1) - score(p2)) <= 1e-6;
    }
    CHECK(offset_ok);

    // ntk-scale closed form for 8192 -> 32768 at head_dim 128
    rope::RopeConfig small;
    small.head_dim = 128;
    small.base = 10000.0;
    small.max_context = 8192;
    rope::BaseChange ntk;
    ntk.method = rope::BaseChange::Method::NtkScale;
    rope::RopeConfig changed = rope::base_change(small, 32768, ntk);
    bool ntk_ok = std::abs(changed.base - 40882.0) / 40882.0 <= 0.001 && !changed.sliding_window;
    CHECK(ntk_ok);

    // sliding-window mask, exhaustive for all sequence lengths <= 64
    bool mask_ok = true;
    rope::RopeConfig mask_cfg;
    mask_cfg.head_dim = 2;
    mask_cfg.max_context = 128;
    for (int n = 1; n <= 64 && mask_ok; ++n) {
        rope::AttentionProbe probe;
        for (int i = 0; i < n; ++i) {
            probe.queries.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            probe.keys.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            probe.positions.push_back(i);
        }
        for (std::int64_t w = 1; w <= n + 1; ++w) {
            rope::RopeConfig mc = mask_cfg;
            mc.sliding_window = std::min<std::int64_t>(w, mc.max_context);
            auto scores = rope::attention_scores(probe, mc);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    std::int64_t off = static_cast<std::int64_t>(i) - j;
                    bool expected = off >= 0 && off < w;
                    mask_ok &= std::isfinite(scores[static_cast<std::size_t>(i)]
                                                   [static_cast<std::size_t>(j)]) == expected;
                }
        }
    }
    CHECK(mask_ok);

    bool all_ok = norm_ok && offset_ok && ntk_ok && mask_ok;
    criterion_line(5, "rope probe (norm 1e-9, offsets 1e-6, ntk within 0.1%, mask <= 64)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 6: passkey suite over the default grid") {
    // char-level tokenizer over ASCII covers the English filler
    std::set<char32_t> alphabet;
    for (char32_t c = 0x20; c < 0x7F; ++c) alphabet.insert(c);
    alphabet.insert(U'\n');
    bpe::Tokenizer tok = bpe::Tokenizer::char_level(alphabet);

    bench::PasskeyConfig cfg;
    cfg.seed = 2026;
    cfg.jobs = 4;
    std::vector<bench::PasskeyCase> cases = bench::gen_passkey_suite(cfg, tok);

    bool count_ok = cases.size() == cfg.lengths.size() * 16 * 20;
    CHECK(count_ok);

    bool unique_ok = true, depth_ok = true;
    std::vector<std::int64_t> key_token(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto &c = cases[i];
        std::size_t occurrences = 0, pos = 0;
        while ((pos = c.context.find(c.key, pos)) != std::string::npos) {
            ++occurrences;
            pos += 1;
        }
        unique_ok &= occurrences == 1;

        auto ids = tok.encode(c.context);
        depth_ok &= static_cast<std::int64_t>(ids.size()) == c.target_length;
        auto offsets = tok.token_byte_offsets(ids);
        std::size_t key_byte = c.context.find(c.key);
        auto it = std::upper_bound(offsets.begin(), offsets.end() - 1, key_byte);
        key_token[i] = static_cast<std::int64_t>(it - offsets.begin()) - 1;
        depth_ok &= static_cast<int>((16 * key_token[i]) / c.target_length) == c.depth_bin;
        depth_ok &= static_cast<int>(c.depth_fraction * 16) == c.depth_bin;
    }
    CHECK(unique_ok);
    CHECK(depth_ok);

    // full-context extraction oracle: every cell 1.0
    eval::KeyExtractorAdapter oracle;
    std::vector<bench::PasskeyOutcome> oracle_outcomes(cases.size());
    bool oracle_cases_ok = true;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        oracle_outcomes[i] = bench::score_passkey(cases[i], oracle.generate({cases[i].context, 32, 0.0}));
        oracle_cases_ok &= oracle_outcomes[i] == bench::PasskeyOutcome::Correct;
    }
    bench::GridResult oracle_grid = bench::aggregate_grid(cases, oracle_outcomes, 16, 20);
    bool oracle_ok = oracle_cases_ok;
    for (const auto &row : oracle_grid.accuracy)
        for (double cell : row) oracle_ok &= cell == 1.0;
    CHECK(oracle_ok);

    // truncated-window adapter: per-case dichotomy is exact
    const std::int64_t window = 4096;
    eval::KeyExtractorAdapter truncated(&tok, window);
    std::vector<bench::PasskeyOutcome> trunc_outcomes(cases.size());
    bool dichotomy_ok = true;
    parallel_indexed(cases.size(), 4, [&](std::size_t i) {
        trunc_outcomes[i] = bench::score_passkey(cases[i], truncated.generate({cases[i].context, 32, 0.0}));
    });
    for (std::size_t i = 0; i < cases.size(); ++i) {
        bool visible = cases[i].target_length - key_token[i] <= window;
        dichotomy_ok &= (trunc_outcomes[i] == bench::PasskeyOutcome::Correct) == visible;
    }
    CHECK(dichotomy_ok);

    // cell view: 1.0 where the whole bin lies within the window, 0.0
    // where it lies outside; the one straddling cell (24576, bin 13)
    // must equal its per-case expectation
    bench::GridResult trunc_grid = bench::aggregate_grid(cases, trunc_outcomes, 16, 20);
    bool cells_ok = true;
    for (std::size_t r = 0; r < trunc_grid.lengths.size(); ++r) {
        std::int64_t length = trunc_grid.lengths[r];
        for (int b = 0; b < 16; ++b) {
            // bin b holds key offsets in [b*L/16, (b+1)*L/16)
            std::int64_t bin_lo = (b * length) / 16;
            std::int64_t bin_hi = ((b + 1) * length) / 16; // exclusive
            double cell = trunc_grid.accuracy[r][static_cast<std::size_t>(b)];
            if (bin_lo >= length - window) {
                cells_ok &= cell == 1.0;
            } else if (bin_hi <= length - window) {
                cells_ok &= cell == 0.0;
            } else {
                // straddling cell: recompute from the member cases
                double correct = 0, total = 0;
                for (std::size_t i = 0; i < cases.size(); ++i) {
                    if (cases[i].target_length != length || cases[i].depth_bin != b) continue;
                    ++total;
                    if (cases[i].target_length - key_token[i] <= window) ++correct;
                }
                cells_ok &= total == 20 && cell == correct / total;
            }
        }
    }
    CHECK(cells_ok);

    bool all_ok = count_ok && unique_ok && depth_ok && oracle_ok && dichotomy_ok && cells_ok;
    criterion_line(6, "passkey default grid (counts, uniqueness, depth, oracle, 4k window)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 7: long-QA synthesis at 16k/32k/64k characters") {
    Rng rng(7);
    std::vector<bench::QaItem> items;
    std::size_t max_article = 0;
    for (int i = 0; i < 100; ++i) {
        std::size_t n = 800 + rng.below(4200);
        std::string ctx;
        for (std::size_t k = 0; k < n; ++k)
            utf8::append(ctx, static_cast<char32_t>(0x4E00 + rng.below(2000)));
        std::string answer;
        for (int k = 0; k < 5; ++k) utf8::append(answer, static_cast<char32_t>(0x4E00 + rng.below(2000)));
        std::size_t at = rng.below(n);
        std::vector<char32_t> cps = utf8::decode(ctx);
        std::string rebuilt;
        for (std::size_t k = 0; k < cps.size(); ++k) {
            if (k == at) rebuilt += answer;
            utf8::append(rebuilt, cps[k]);
        }
        items.push_back({rebuilt, "q" + std::to_string(i), answer});
        max_article = std::max(max_article, utf8::count_scalars(rebuilt));
    }

    bool all_ok = true;
    for (std::int64_t target : {16384, 32768, 65536}) {
        auto cases = bench::gen_longqa(items, target);
        bool conserve = cases.size() == items.size();
        CHECK(conserve);
        bool ok = conserve;
        for (const auto &c : cases) {
            std::int64_t len = static_cast<std::int64_t>(utf8::count_scalars(c.context));
            ok &= len >= target && len < target + static_cast<std::int64_t>(max_article);
            ok &= c.context.find(c.answer) != std::string::npos;
            ok &= c.answer_depth_fraction >= 0.0 && c.answer_depth_fraction < 1.0;
        }
        CHECK(ok);
        all_ok &= ok;
    }
    criterion_line(7, "long-QA synthesis (100 questions, one case each, length bounds)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 8: judge protocol") {
    std::string question = "\xE8\xAB\x8B\xE4\xBB\x8B\xE7\xB4\xB9\xE5\x8F\xB0\xE7\x81\xA3\xE7\x9A\x84"
                           "\xE5\xA4\x9C\xE5\xB8\x82\xE6\x96\x87\xE5\x8C\x96\xE3\x80\x82";
    std::string answer = "\xE5\x8F\xB0\xE7\x81\xA3\xE7\x9A\x84\xE5\xA4\x9C\xE5\xB8\x82\xE4\xBB\xA5"
                         "\xE5\xB0\x8F\xE5\x90\x83\xE8\x81\x9E\xE5\x90\x8D\xEF\xBC\x8C\xE4\xBE\x8B"
                         "\xE5\xA6\x82\xE5\xA3\xAB\xE6\x9E\x97\xE5\xA4\x9C\xE5\xB8\x82\xE8\x88\x87"
                         "\xE9\xA5\x92\xE6\xB2\xB3\xE8\xA1\x97\xE5\xA4\x9C\xE5\xB8\x82\xE3\x80\x82";
    std::string golden =
        testutil::read_file(std::string(TOKX_SOURCE_DIR) + "/tests/golden/judge_prompt.golden");
    bool golden_ok = eval::render_judge_prompt(question, answer) == golden;
    CHECK(golden_ok);

    bool ratings_ok = true;
    for (int k = 1; k <= 10; ++k) {
        std::string text = "The response is adequate. Rating: [[" + std::to_string(k) + "]]";
        ratings_ok &= eval::parse_rating(text) == k;
    }
    CHECK(ratings_ok);

    const char *malformed[20] = {
        "",           "Rating: 5",      "[[]]",        "[[0]]",     "[[11]]",     "[[100]]",
        "[[-1]]",     "[[5.5]]",        "[[ 5 ]]",     "[[5]",      "[5]]",       "[5]",
        "((5))",      "{{5}}",          "]]5[[",       "[[five]]",  "[[5a]]",     "[[a5]]",
        "[ [5] ]",    "rating [[eleven]]",
    };
    bool malformed_ok = true;
    for (const char *m : malformed) malformed_ok &= !eval::parse_rating(m).has_value();
    CHECK(malformed_ok);

    bool all_ok = golden_ok && ratings_ok && malformed_ok;
    criterion_line(8, "judge protocol (golden template, ratings 1..10, 20 malformed)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 9: perplexity closed forms") {
    std::set<char32_t> alphabet{U'a', U'b'};
    bpe::Tokenizer tok = bpe::Tokenizer::char_level(alphabet, false);

    eval::UniformScoringAdapter uniform_big(61872);
    eval::PplResult big = eval::perplexity(uniform_big, {"abababab"}, tok); // 8 tokens
    bool big_ok = big.ppl == 61872.0;
    CHECK(big_ok);

    eval::UniformScoringAdapter uniform_two(2);
    eval::PplResult two = eval::perplexity(uniform_two, {"ab", "ba"}, tok); // 4 tokens
    bool two_ok = two.ppl == 2.0;
    CHECK(two_ok);

    eval::SequenceScoringAdapter half_quarter({0.5, 0.25});
    double expected = 2.0 * std::sqrt(2.0);
    double got = eval::perplexity(half_quarter, {"ab"}, tok).ppl;
    bool mixed_ok = std::abs(got - expected) <= 1e-12;
    CHECK(mixed_ok);

    bool all_ok = big_ok && two_ok && mixed_ok;
    criterion_line(9, "perplexity closed forms (V in {2, 61872} exact, 2*sqrt(2) to 1e-12)", all_ok);
    REQUIRE(all_ok);
}

TEST_CASE("criterion 10: manifests replay byte-identically") {
    testutil::TempDir tmp("acceptance-manifest");
    std::string zh_glob = std::string(TOKX_SOURCE_DIR) + "/data/zh_sample/*.txt";

    // tokenizer trainer
    bool train_ok =
        run_cli("train-bpe --corpus '" + zh_glob + "' --new-tokens 200 --out-dir " + (tmp / "t1").string()) == 0;
    train_ok = train_ok && run_cli("rerun --manifest " + (tmp / "t1" / "train-bpe.manifest.json").string() +
                                   " --out-dir " + (tmp / "t2").string()) == 0;
    train_ok = train_ok && testutil::read_file(tmp / "t1" / "tokenizer.json") ==
                               testutil::read_file(tmp / "t2" / "tokenizer.json");
    CHECK(train_ok);

    // passkey generator
    std::set<char32_t> alphabet;
    for (char32_t c = 0x20; c < 0x7F; ++c) alphabet.insert(c);
    alphabet.insert(U'\n');
    bpe::Tokenizer::char_level(alphabet).save((tmp / "ascii.json").string());
    bool pk_ok = run_cli("gen-passkey --tokenizer " + (tmp / "ascii.json").string() +
                         " --lengths 2048,4096 --per-bin 1 --seed 11 --out-dir " + (tmp / "p1").string()) == 0;
    pk_ok = pk_ok && run_cli("rerun --manifest " + (tmp / "p1" / "gen-passkey.manifest.json").string() +
                             " --out-dir " + (tmp / "p2").string()) == 0;
    pk_ok = pk_ok && testutil::read_file(tmp / "p1" / "passkey_suite.jsonl") ==
                         testutil::read_file(tmp / "p2" / "passkey_suite.jsonl");
    CHECK(pk_ok);

    // long-QA generator
    std::ostringstream source;
    Rng rng(10);
    for (int i = 0; i < 10; ++i) {
        std::string ctx = "article body " + std::to_string(i) + " ";
        for (int k = 0; k < 200; ++k) ctx += static_cast<char>('a' + rng.below(26));
        ctx += " marker-" + std::to_string(i) + " tail";
        source << nlohmann::json{{"context", ctx},
                                 {"question", "where is marker " + std::to_string(i) + "?"},
                                 {"answer", "marker-" + std::to_string(i)}}
                      .dump()
               << "\n";
    }
    testutil::write_file(tmp / "qa.jsonl", source.str());
    bool lq_ok = run_cli("gen-longqa --source " + (tmp / "qa.jsonl").string() +
                         " --target-chars 600 --out-dir " + (tmp / "q1").string()) == 0;
    lq_ok = lq_ok && run_cli("rerun --manifest " + (tmp / "q1" / "gen-longqa.manifest.json").string() +
                             " --out-dir " + (tmp / "q2").string()) == 0;
    lq_ok = lq_ok && testutil::read_file(tmp / "q1" / "longqa_suite.jsonl") ==
                         testutil::read_file(tmp / "q2" / "longqa_suite.jsonl");
    CHECK(lq_ok);

    // manifests carry no timestamps or host state: running the identical
    // command again produces the identical manifest
    std::string manifest_before = testutil::read_file(tmp / "t1" / "train-bpe.manifest.json");
    bool manifest_ok =
        run_cli("train-bpe --corpus '" + zh_glob + "' --new-tokens 200 --out-dir " + (tmp / "t1").string()) == 0 &&
        testutil::read_file(tmp / "t1" / "train-bpe.manifest.json") == manifest_before;
    CHECK(manifest_ok);

    bool all_ok = train_ok && pk_ok && lq_ok && manifest_ok;
    criterion_line(10, "generators and trainer replay from manifests byte-identically", all_ok);
    REQUIRE(all_ok);
}
