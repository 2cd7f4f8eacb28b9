#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"
#include "tokx/filler_text.hpp"
#include "tokx/parallel.hpp"
#include "tokx/rng.hpp"
#include "tokx/tokenizer.hpp"
#include "tokx/utf8.hpp"

namespace tokx::bench {

// ---------------------------------------------------------------------
// Passkey retrieval
// ---------------------------------------------------------------------

struct PasskeyCase {
    std::string id;
    std::string context;  // filler + key sentence + filler + question at the end
    std::string question;
    std::string key;      // 5 lowercase letters, occurs exactly once in context
    std::int64_t target_length = 0; // context length in tokens of the suite tokenizer
    int depth_bin = 0;              // floor(depth_fraction * bins)
    double depth_fraction = 0.0;    // key token offset / total tokens
    std::uint64_t seed = 0;
};

struct PasskeyConfig {
    std::vector<std::int64_t> lengths{4096, 8192, 16384, 24576, 32768};
    int bins = 16;
    int per_bin = 20;
    std::uint64_t seed = 0;
    FillerLang filler_lang = FillerLang::English;
    int jobs = 1;
};

inline constexpr std::string_view kPasskeyQuestion =
    "What is the pass key? Answer with the five-letter key only.";

// The key leads the sentence and the fixed marker trails it, so a
// truncated reader that can see the key at all can also see the marker:
// retrieval succeeds exactly when the key's first token is in view.
inline std::string passkey_sentence(std::string_view key) {
    return std::string(key) + " is the pass key.";
}

namespace detail {

inline std::span<const std::string_view> filler_pool(FillerLang lang) {
    if (lang == FillerLang::Chinese) return {kFillerZh.data(), kFillerZh.size()};
    return {kFillerEn.data(), kFillerEn.size()};
}

// Infinite deterministic filler: the pool in seeded shuffled order,
// reshuffled every cycle.
class FillerStream {
  public:
    FillerStream(FillerLang lang, Rng rng) : pool_(filler_pool(lang)), rng_(rng) {
        order_.resize(pool_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        reshuffle();
    }

    // appends whole sentences until out has grown by at least n bytes
    void take_bytes(std::string &out, std::size_t n) {
        std::size_t start = out.size();
        while (out.size() - start < n) {
            if (!out.empty() && out.back() != ' ' && out.back() != '\n') out.push_back(' ');
            out += pool_[order_[cursor_++]];
            if (cursor_ == order_.size()) {
                cursor_ = 0;
                reshuffle();
            }
        }
    }

  private:
    void reshuffle() {
        for (std::size_t i = order_.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[rng_.below(i)]);
    }

    std::span<const std::string_view> pool_;
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

// Cuts a UTF-8 string at the last scalar boundary <= byte_limit.
inline std::string_view cut_at_boundary(std::string_view s, std::size_t byte_limit) {
    if (byte_limit >= s.size()) return s;
    std::size_t cut = byte_limit;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    return s.substr(0, cut);
}

inline std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += 1;
    }
    return n;
}

} // namespace detail

// Builds one passkey case deterministically from (config, length, bin,
// trial). The context is fitted so its realized token count equals the
// requested length exactly, and the stored depth values are re-measured
// from the key's actual token offset.
inline PasskeyCase gen_passkey_case(const PasskeyConfig &cfg, const bpe::Tokenizer &tokenizer,
                                    std::size_t length_idx, int bin, int trial) {
    const std::int64_t target = cfg.lengths.at(length_idx);
    const std::uint64_t case_index =
        (static_cast<std::uint64_t>(length_idx) * static_cast<std::uint64_t>(cfg.bins) +
         static_cast<std::uint64_t>(bin)) *
            static_cast<std::uint64_t>(cfg.per_bin) +
        static_cast<std::uint64_t>(trial);
    Rng rng = Rng(cfg.seed).derive("passkey-case", case_index);

    const std::string tail = "\n" + std::string(kPasskeyQuestion);
    const std::int64_t tail_tokens = static_cast<std::int64_t>(tokenizer.encode(tail).size());

    // chars-per-token estimate from a filler probe, used only for sizing
    detail::FillerStream probe_stream(cfg.filler_lang, rng.derive("probe"));
    std::string probe;
    probe_stream.take_bytes(probe, 2048);
    const double cpt = std::max(0.25, static_cast<double>(utf8::count_scalars(probe)) /
                                          static_cast<double>(tokenizer.encode(probe).size()));
    const double bytes_per_char = static_cast<double>(probe.size()) / static_cast<double>(utf8::count_scalars(probe));

    for (int key_attempt = 0; key_attempt < 64; ++key_attempt) {
        std::string key;
        for (int i = 0; i < 5; ++i) key.push_back(static_cast<char>('a' + rng.below(26)));
        const std::string key_sentence = passkey_sentence(key);
        const std::int64_t ks_tokens = static_cast<std::int64_t>(tokenizer.encode(key_sentence).size());
        if (target < ks_tokens + tail_tokens + 2)
            throw InvalidArgument("target_length too small to host the key and question");
        // the key sentence and trailing question occupy the end of the
        // context, so the deepest reachable offset is bounded
        const std::int64_t max_offset = target - ks_tokens - tail_tokens;
        if ((static_cast<std::int64_t>(bin) * target) / cfg.bins > max_offset)
            throw InvalidArgument("target_length " + std::to_string(target) +
                                  " too small to place a key in depth bin " + std::to_string(bin) +
                                  " ahead of the question");

        const double f = rng.uniform(static_cast<double>(bin) / cfg.bins,
                                     static_cast<double>(bin + 1) / cfg.bins);
        std::int64_t aim = static_cast<std::int64_t>(f * static_cast<double>(target));
        aim = std::clamp<std::int64_t>(aim, 0, max_offset);

        detail::FillerStream prefix_stream(cfg.filler_lang, rng.derive("prefix"));
        detail::FillerStream suffix_stream(cfg.filler_lang, rng.derive("suffix"));
        std::string prefix_full, suffix_full;

        auto assemble = [&](std::size_t prefix_bytes, std::size_t suffix_bytes) {
            if (prefix_full.size() < prefix_bytes) prefix_stream.take_bytes(prefix_full, prefix_bytes - prefix_full.size() + 64);
            if (suffix_full.size() < suffix_bytes) suffix_stream.take_bytes(suffix_full, suffix_bytes - suffix_full.size() + 64);
            std::string ctx(detail::cut_at_boundary(prefix_full, prefix_bytes));
            if (!ctx.empty()) ctx.push_back(' ');
            ctx += key_sentence;
            std::string_view suffix = detail::cut_at_boundary(suffix_full, suffix_bytes);
            if (!suffix.empty()) {
                ctx.push_back(' ');
                ctx += suffix;
            }
            ctx += tail;
            return ctx;
        };

        std::size_t prefix_bytes = static_cast<std::size_t>(std::max(0.0, static_cast<double>(aim) * cpt * bytes_per_char));
        std::size_t suffix_bytes = static_cast<std::size_t>(
            std::max(0.0, static_cast<double>(target - aim - ks_tokens - tail_tokens) * cpt * bytes_per_char));

        for (int depth_attempt = 0; depth_attempt < 8; ++depth_attempt) {
            // fit the realized token count exactly by resizing the suffix
            // (falling back to the prefix when the suffix is exhausted)
            std::string ctx;
            std::int64_t total = 0;
            bool fitted = false;
            for (int iter = 0; iter < 64; ++iter) {
                ctx = assemble(prefix_bytes, suffix_bytes);
                total = static_cast<std::int64_t>(tokenizer.encode(ctx).size());
                std::int64_t diff = total - target;
                if (diff == 0) {
                    fitted = true;
                    break;
                }
                double step_bytes = static_cast<double>(diff) * cpt * bytes_per_char;
                std::int64_t step = static_cast<std::int64_t>(step_bytes);
                if (step == 0) step = diff > 0 ? 1 : -1;
                if (diff > 0) {
                    std::size_t cut = static_cast<std::size_t>(step);
                    if (suffix_bytes >= cut)
                        suffix_bytes -= cut;
                    else if (prefix_bytes >= cut - suffix_bytes) {
                        prefix_bytes -= cut - suffix_bytes;
                        suffix_bytes = 0;
                    } else {
                        break;
                    }
                } else {
                    suffix_bytes += static_cast<std::size_t>(-step);
                }
            }
            if (!fitted) break; // try a fresh key/draw

            // re-measure the key's realized token offset
            std::size_t key_byte = ctx.find(key);
            if (key_byte == std::string::npos || detail::count_occurrences(ctx, key) != 1) break;
            std::vector<bpe::TokenId> ids = tokenizer.encode(ctx);
            std::vector<std::size_t> offsets = tokenizer.token_byte_offsets(ids);
            auto it = std::upper_bound(offsets.begin(), offsets.end() - 1, key_byte);
            std::int64_t key_token = static_cast<std::int64_t>(it - offsets.begin()) - 1;
            int realized_bin = static_cast<int>((static_cast<std::int64_t>(cfg.bins) * key_token) / target);
            if (realized_bin != bin) {
                // aim at the center of the reachable part of the bin
                std::int64_t lo = (static_cast<std::int64_t>(bin) * target) / cfg.bins;
                std::int64_t hi = std::min(((static_cast<std::int64_t>(bin) + 1) * target) / cfg.bins - 1,
                                           max_offset);
                std::int64_t center = (lo + hi) / 2;
                prefix_bytes = static_cast<std::size_t>(std::max(0.0, static_cast<double>(center) * cpt * bytes_per_char));
                continue;
            }
            double fraction = static_cast<double>(key_token) / static_cast<double>(target);

            PasskeyCase out;
            out.id = "pk-L" + std::to_string(target) + "-b" + std::to_string(bin) + "-t" + std::to_string(trial);
            out.context = std::move(ctx);
            out.question = std::string(kPasskeyQuestion);
            out.key = key;
            out.target_length = target;
            out.depth_bin = bin;
            out.depth_fraction = fraction;
            out.seed = cfg.seed;
            return out;
        }
    }
    throw Error("failed to synthesize a passkey case; the supplied tokenizer resists exact length fitting");
}

inline std::vector<PasskeyCase> gen_passkey_suite(const PasskeyConfig &cfg, const bpe::Tokenizer &tokenizer) {
    if (cfg.bins <= 0 || cfg.per_bin <= 0) throw InvalidArgument("bins and per_bin must be positive");
    for (std::int64_t len : cfg.lengths)
        if (len <= 0) throw InvalidArgument("grid lengths must be positive");
    const std::size_t total = cfg.lengths.size() * static_cast<std::size_t>(cfg.bins) *
                              static_cast<std::size_t>(cfg.per_bin);
    std::vector<PasskeyCase> cases(total);
    parallel_indexed(total, cfg.jobs, [&](std::size_t i) {
        std::size_t per_length = static_cast<std::size_t>(cfg.bins) * static_cast<std::size_t>(cfg.per_bin);
        std::size_t length_idx = i / per_length;
        int bin = static_cast<int>((i % per_length) / static_cast<std::size_t>(cfg.per_bin));
        int trial = static_cast<int>(i % static_cast<std::size_t>(cfg.per_bin));
        cases[i] = gen_passkey_case(cfg, tokenizer, length_idx, bin, trial);
    });
    return cases;
}

// ---------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------

enum class PasskeyOutcome { Correct, NearMiss, Wrong };

inline const char *to_string(PasskeyOutcome o) {
    switch (o) {
        case PasskeyOutcome::Correct: return "correct";
        case PasskeyOutcome::NearMiss: return "near_miss";
        default: return "wrong";
    }
}

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char &c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline int edit_distance(std::string_view a, std::string_view b) {
    std::vector<int> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int next_diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = next_diag;
        }
    }
    return row[b.size()];
}

} // namespace detail

// Verbatim hit is correct; a case-insensitive hit or an edit-distance-1
// slip is a near miss (the copying-error class), anything else is wrong.
inline PasskeyOutcome score_passkey(const PasskeyCase &c, std::string_view prediction) {
    if (prediction.find(c.key) != std::string_view::npos) return PasskeyOutcome::Correct;
    std::string lower_pred = detail::ascii_lower(prediction);
    if (lower_pred.find(detail::ascii_lower(c.key)) != std::string::npos) return PasskeyOutcome::NearMiss;
    for (std::size_t len = 4; len <= 6; ++len) {
        if (prediction.size() < len) continue;
        for (std::size_t start = 0; start + len <= prediction.size(); ++start) {
            if (detail::edit_distance(prediction.substr(start, len), c.key) <= 1)
                return PasskeyOutcome::NearMiss;
        }
    }
    return PasskeyOutcome::Wrong;
}

// EM normalization: trim surrounding whitespace, collapse internal runs
// to one space. ASCII whitespace plus U+3000 (ideographic space).
inline std::string normalize_em(std::string_view s) {
    auto is_space_at = [&](std::size_t pos, std::size_t &len) {
        unsigned char c = static_cast<unsigned char>(s[pos]);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            len = 1;
            return true;
        }
        if (c == 0xE3 && pos + 2 < s.size() && static_cast<unsigned char>(s[pos + 1]) == 0x80 &&
            static_cast<unsigned char>(s[pos + 2]) == 0x80) {
            len = 3; // U+3000
            return true;
        }
        len = 1;
        return false;
    };
    std::string out;
    bool pending_gap = false;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t len = 1;
        if (is_space_at(pos, len)) {
            if (!out.empty()) pending_gap = true;
            pos += len;
            continue;
        }
        if (pending_gap) {
            out.push_back(' ');
            pending_gap = false;
        }
        out.push_back(s[pos]);
        ++pos;
    }
    return out;
}

inline int score_em(std::string_view prediction, std::string_view gold) {
    return normalize_em(prediction) == normalize_em(gold) ? 1 : 0;
}

// ---------------------------------------------------------------------
// Grid aggregation
// ---------------------------------------------------------------------

struct GridResult {
    std::vector<std::int64_t> lengths; // rows
    int bins = 16;
    int per_bin = 20;
    std::vector<std::vector<double>> accuracy;   // [row][bin]
    std::vector<std::vector<int>> near_misses;   // [row][bin]
};

inline GridResult aggregate_grid(const std::vector<PasskeyCase> &cases,
                                 const std::vector<PasskeyOutcome> &outcomes, int bins, int per_bin) {
    if (cases.size() != outcomes.size()) throw InvalidArgument("cases and outcomes differ in length");
    GridResult grid;
    grid.bins = bins;
    grid.per_bin = per_bin;
    for (const PasskeyCase &c : cases)
        if (std::find(grid.lengths.begin(), grid.lengths.end(), c.target_length) == grid.lengths.end())
            grid.lengths.push_back(c.target_length);
    std::sort(grid.lengths.begin(), grid.lengths.end());

    std::vector<std::vector<int>> correct(grid.lengths.size(), std::vector<int>(static_cast<std::size_t>(bins), 0));
    std::vector<std::vector<int>> seen = correct, near = correct;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const PasskeyCase &c = cases[i];
        auto row = static_cast<std::size_t>(
            std::find(grid.lengths.begin(), grid.lengths.end(), c.target_length) - grid.lengths.begin());
        if (c.depth_bin < 0 || c.depth_bin >= bins) throw InvalidArgument("case depth_bin out of range");
        auto col = static_cast<std::size_t>(c.depth_bin);
        ++seen[row][col];
        if (outcomes[i] == PasskeyOutcome::Correct) ++correct[row][col];
        if (outcomes[i] == PasskeyOutcome::NearMiss) ++near[row][col];
    }
    for (std::size_t r = 0; r < grid.lengths.size(); ++r)
        for (int b = 0; b < bins; ++b)
            if (seen[r][static_cast<std::size_t>(b)] != per_bin)
                throw InvalidArgument("incomplete grid cell: length " + std::to_string(grid.lengths[r]) +
                                      " bin " + std::to_string(b));

    grid.accuracy.assign(grid.lengths.size(), std::vector<double>(static_cast<std::size_t>(bins), 0.0));
    grid.near_misses = near;
    for (std::size_t r = 0; r < grid.lengths.size(); ++r)
        for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b)
            grid.accuracy[r][b] = static_cast<double>(correct[r][b]) / static_cast<double>(per_bin);
    return grid;
}

inline std::string grid_to_csv(const GridResult &grid) {
    std::string csv = "length";
    for (int b = 0; b < grid.bins; ++b) csv += ",bin" + std::to_string(b);
    csv += "\n";
    char buf[64];
    for (std::size_t r = 0; r < grid.lengths.size(); ++r) {
        csv += std::to_string(grid.lengths[r]);
        for (int b = 0; b < grid.bins; ++b) {
            std::snprintf(buf, sizeof(buf), "%g", grid.accuracy[r][static_cast<std::size_t>(b)]);
            csv += ",";
            csv += buf;
        }
        csv += "\n";
    }
    return csv;
}

inline nlohmann::json grid_to_json(const GridResult &grid) {
    return {{"lengths", grid.lengths},
            {"bins", grid.bins},
            {"per_bin", grid.per_bin},
            {"accuracy", grid.accuracy},
            {"near_misses", grid.near_misses}};
}

// Binary PPM heatmap, one colored block per cell; rows follow the grid's
// length order top to bottom, depth bins left to right.
inline std::string grid_to_ppm(const GridResult &grid, int cell_px = 24) {
    struct Color { unsigned char r, g, b; };
    auto colormap = [](double v) -> Color {
        // diverging red -> pale yellow -> green
        const Color lo{178, 24, 43}, mid{254, 254, 189}, hi{26, 152, 80};
        auto lerp = [](unsigned char a, unsigned char b, double t) {
            return static_cast<unsigned char>(a + (b - a) * t + 0.5);
        };
        if (v < 0.5) {
            double t = v / 0.5;
            return {lerp(lo.r, mid.r, t), lerp(lo.g, mid.g, t), lerp(lo.b, mid.b, t)};
        }
        double t = (v - 0.5) / 0.5;
        return {lerp(mid.r, hi.r, t), lerp(mid.g, hi.g, t), lerp(mid.b, hi.b, t)};
    };
    const int width = grid.bins * cell_px;
    const int height = static_cast<int>(grid.lengths.size()) * cell_px;
    std::string ppm = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    ppm.reserve(ppm.size() + static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (int y = 0; y < height; ++y) {
        auto row = static_cast<std::size_t>(y / cell_px);
        for (int x = 0; x < width; ++x) {
            auto col = static_cast<std::size_t>(x / cell_px);
            Color c = colormap(grid.accuracy[row][col]);
            ppm.push_back(static_cast<char>(c.r));
            ppm.push_back(static_cast<char>(c.g));
            ppm.push_back(static_cast<char>(c.b));
        }
    }
    return ppm;
}

// ---------------------------------------------------------------------
// Long-document QA synthesis
// ---------------------------------------------------------------------

struct QaItem {
    std::string context;
    std::string question;
    std::string answer;
};

struct LongQaCase {
    std::string id;
    std::string context; // concatenation of source contexts
    std::string question;
    std::string answer;
    std::int64_t target_chars = 0;
    double answer_depth_fraction = 0.0;
    std::uint64_t seed = 0;
};

// Greedy packing: consecutive source contexts are concatenated until the
// pack reaches target_chars; every question in the pack shares the packed
// context. A trailing pack that cannot reach the target from the
// remaining articles is padded by cycling articles from the start, so
// every emitted context lies in [target, target + max article length).
// The seed is recorded for manifests; packing consumes no randomness.
inline std::vector<LongQaCase> gen_longqa(const std::vector<QaItem> &items, std::int64_t target_chars,
                                          std::uint64_t seed = 0) {
    if (items.empty()) throw InvalidArgument("gen_longqa requires a non-empty source set");
    if (target_chars <= 0) throw InvalidArgument("target_chars must be positive");
    std::vector<std::int64_t> chars(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].context.find(items[i].answer) == std::string::npos)
            throw InvalidArgument("answer not found in its own context (item " + std::to_string(i) + ")");
        chars[i] = static_cast<std::int64_t>(utf8::count_scalars(items[i].context));
    }

    std::vector<LongQaCase> cases;
    std::size_t i = 0;
    std::size_t pack_index = 0;
    while (i < items.size()) {
        std::size_t begin = i;
        std::int64_t total = 0;
        while (i < items.size() && total < target_chars) total += chars[i++];
        std::size_t end = i;

        std::string context;
        std::vector<std::int64_t> starts(end - begin, 0);
        std::int64_t cursor = 0;
        for (std::size_t m = begin; m < end; ++m) {
            starts[m - begin] = cursor;
            context += items[m].context;
            cursor += chars[m];
        }
        // pad a short trailing pack with articles cycled from the start,
        // preferring articles outside the pack, repeats only if needed
        if (cursor < target_chars) {
            for (std::size_t j = 0; j < items.size() && cursor < target_chars; ++j) {
                if (j >= begin && j < end) continue;
                context += items[j].context;
                cursor += chars[j];
            }
            for (std::size_t j = 0; cursor < target_chars; j = (j + 1) % items.size()) {
                context += items[j].context;
                cursor += chars[j];
            }
        }

        for (std::size_t m = begin; m < end; ++m) {
            LongQaCase c;
            c.id = "lqa-p" + std::to_string(pack_index) + "-q" + std::to_string(m);
            c.context = context;
            c.question = items[m].question;
            c.answer = items[m].answer;
            c.target_chars = target_chars;
            c.seed = seed;
            std::size_t byte_off = items[m].context.find(items[m].answer);
            std::int64_t local = static_cast<std::int64_t>(
                utf8::count_scalars(std::string_view(items[m].context).substr(0, byte_off)));
            c.answer_depth_fraction = static_cast<double>(starts[m - begin] + local) / static_cast<double>(cursor);
            cases.push_back(std::move(c));
        }
        ++pack_index;
    }
    return cases;
}

// ---------------------------------------------------------------------
// JSONL
// ---------------------------------------------------------------------

inline nlohmann::json passkey_case_to_json(const PasskeyCase &c) {
    return {{"id", c.id},          {"context", c.context},
            {"question", c.question}, {"answer", c.key},
            {"target_length", c.target_length}, {"depth_bin", c.depth_bin},
            {"depth_fraction", c.depth_fraction}, {"seed", c.seed}};
}

inline PasskeyCase passkey_case_from_json(const nlohmann::json &j) {
    PasskeyCase c;
    c.id = j.at("id").get<std::string>();
    c.context = j.at("context").get<std::string>();
    c.question = j.at("question").get<std::string>();
    c.key = j.at("answer").get<std::string>();
    c.target_length = j.at("target_length").get<std::int64_t>();
    c.depth_bin = j.at("depth_bin").get<int>();
    c.depth_fraction = j.at("depth_fraction").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline nlohmann::json longqa_case_to_json(const LongQaCase &c) {
    return {{"id", c.id},          {"context", c.context},
            {"question", c.question}, {"answer", c.answer},
            {"target_length", c.target_chars}, {"depth_fraction", c.answer_depth_fraction},
            {"seed", c.seed}};
}

inline LongQaCase longqa_case_from_json(const nlohmann::json &j) {
    LongQaCase c;
    c.id = j.at("id").get<std::string>();
    c.context = j.at("context").get<std::string>();
    c.question = j.at("question").get<std::string>();
    c.answer = j.at("answer").get<std::string>();
    c.target_chars = j.at("target_length").get<std::int64_t>();
    c.answer_depth_fraction = j.at("depth_fraction").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

template <typename T, typename Fn>
inline void write_jsonl(const std::vector<T> &rows, const std::string &path, Fn to_json_fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    for (const T &row : rows) out << to_json_fn(row).dump() << '\n';
    if (!out) throw IoError("write error: " + path);
}

template <typename Fn>
inline void read_jsonl(const std::string &path, Fn per_line) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception &e) {
            throw InvalidArgument(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        per_line(j);
    }
}

} // namespace tokx::bench
