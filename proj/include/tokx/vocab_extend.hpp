#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"
#include "tokx/parallel.hpp"
#include "tokx/rng.hpp"
#include "tokx/tokenizer.hpp"
#include "tokx/utf8.hpp"

namespace tokx::vocab {

struct ExtensionReport {
    std::int64_t base_size = 0;
    std::int64_t candidates_in = 0;
    std::int64_t duplicates_removed = 0;
    std::int64_t extended_size = 0;
    std::int64_t new_ids_begin = 0; // new tokens occupy [new_ids_begin, extended_size)
    std::int64_t merges_dropped = 0;

    nlohmann::json to_json() const {
        return {{"base_size", base_size},
                {"candidates_in", candidates_in},
                {"duplicates_removed", duplicates_removed},
                {"extended_size", extended_size},
                {"new_token_ids", {{"begin", new_ids_begin}, {"end", extended_size}}},
                {"merges_dropped", merges_dropped}};
    }
};

struct Extension {
    bpe::Tokenizer tokenizer;
    ExtensionReport report;
};

// Appends candidate tokens not already present in the base vocabulary,
// preserving every base id, then appends the candidate's merge rules
// after the base rules. Candidate merges that no longer satisfy the
// tokenizer invariants (or duplicate a base rule) are dropped and counted.
inline Extension extend_vocabulary(const bpe::Tokenizer &base, const bpe::Tokenizer &candidate) {
    std::vector<std::string> vocab = base.vocab();
    std::unordered_set<std::string> present(vocab.begin(), vocab.end());

    ExtensionReport report;
    report.base_size = static_cast<std::int64_t>(base.vocab_size());
    report.new_ids_begin = report.base_size;

    for (const std::string &piece : candidate.vocab()) {
        if (candidate.byte_fallback() && bpe::is_byte_piece(piece)) {
            // byte tokens are infrastructure, not candidate material
            continue;
        }
        ++report.candidates_in;
        if (present.count(piece)) {
            ++report.duplicates_removed;
            continue;
        }
        present.insert(piece);
        vocab.push_back(piece);
    }
    report.extended_size = static_cast<std::int64_t>(vocab.size());

    std::vector<bpe::MergeRule> merges = base.merges();
    std::set<bpe::MergeRule> have(merges.begin(), merges.end());
    for (const bpe::MergeRule &m : candidate.merges()) {
        bool valid = present.count(m.first) && present.count(m.second) && present.count(m.first + m.second);
        if (!valid || have.count(m)) {
            ++report.merges_dropped;
            continue;
        }
        have.insert(m);
        merges.push_back(m);
    }

    bpe::Tokenizer extended(std::move(vocab), std::move(merges), base.byte_fallback());
    return Extension{std::move(extended), report};
}

enum class InitPolicy { MeanOfSubtokens, SmallRandom };

inline const char *to_string(InitPolicy p) {
    return p == InitPolicy::MeanOfSubtokens ? "mean" : "random";
}

struct NewTokenInit {
    std::string token;
    InitPolicy policy; // per-token; mean falls back to random when unencodable
    std::vector<bpe::TokenId> base_ids;
};

struct ResizePlan {
    std::array<std::int64_t, 2> old_shape{0, 0}; // (vocab, embed_dim)
    std::array<std::int64_t, 2> new_shape{0, 0};
    InitPolicy init_policy = InitPolicy::MeanOfSubtokens;
    double sigma = 0.02; // small-random stddev
    std::vector<NewTokenInit> new_tokens;

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const NewTokenInit &t : new_tokens)
            rows.push_back({{"token", t.token}, {"policy", to_string(t.policy)}, {"base_ids", t.base_ids}});
        return {{"old_shape", old_shape},
                {"new_shape", new_shape},
                {"init_policy", to_string(init_policy)},
                {"sigma", sigma},
                {"applies_to", {"input_embedding", "output_embedding"}},
                {"new_tokens", std::move(rows)}};
    }
};

// Plans the input/output embedding resize for an extension. The mean
// policy records, per new token, the base-tokenizer segmentation whose
// embedding rows average into the new row.
inline ResizePlan plan_resize(const ExtensionReport &report, const bpe::Tokenizer &base,
                              const bpe::Tokenizer &extended, std::int64_t embed_dim,
                              InitPolicy policy, double sigma = 0.02) {
    if (embed_dim <= 0) throw InvalidArgument("embed_dim must be positive");
    ResizePlan plan;
    plan.old_shape = {report.base_size, embed_dim};
    plan.new_shape = {report.extended_size, embed_dim};
    plan.init_policy = policy;
    plan.sigma = sigma;
    for (std::int64_t id = report.new_ids_begin; id < report.extended_size; ++id) {
        const std::string &piece = extended.piece(static_cast<bpe::TokenId>(id));
        NewTokenInit init{piece, policy, {}};
        if (policy == InitPolicy::MeanOfSubtokens) {
            try {
                init.base_ids = base.encode(piece);
            } catch (const bpe::UnencodableError &) {
                init.policy = InitPolicy::SmallRandom; // recorded fallback
            }
        }
        plan.new_tokens.push_back(std::move(init));
    }
    return plan;
}

// Test-scale embedding materialization; real checkpoints are out of scope
// but the arithmetic is the same.
inline std::vector<std::vector<double>> apply_resize_plan(const std::vector<std::vector<double>> &embedding,
                                                          const ResizePlan &plan, Rng rng) {
    if (static_cast<std::int64_t>(embedding.size()) != plan.old_shape[0])
        throw InvalidArgument("embedding row count does not match plan old_shape");
    std::vector<std::vector<double>> out = embedding;
    const std::size_t dim = static_cast<std::size_t>(plan.old_shape[1]);
    for (const NewTokenInit &t : plan.new_tokens) {
        std::vector<double> row(dim, 0.0);
        if (t.policy == InitPolicy::MeanOfSubtokens && !t.base_ids.empty()) {
            for (bpe::TokenId id : t.base_ids)
                for (std::size_t d = 0; d < dim; ++d) row[d] += embedding.at(static_cast<std::size_t>(id))[d];
            for (std::size_t d = 0; d < dim; ++d) row[d] /= static_cast<double>(t.base_ids.size());
        } else {
            for (std::size_t d = 0; d < dim; ++d) {
                // Box-Muller from the deterministic stream
                double u1 = rng.uniform01(), u2 = rng.uniform01();
                if (u1 <= 0.0) u1 = 0x1.0p-53;
                row[d] = plan.sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

struct CompressionReport {
    std::int64_t corpus_chars = 0;
    std::int64_t tokens_base = 0;
    std::int64_t tokens_extended = 0;
    double chars_per_token_base = 0.0;
    double chars_per_token_extended = 0.0;
    double ratio = 0.0; // tokens_base / tokens_extended

    nlohmann::json to_json() const {
        return {{"corpus_chars", corpus_chars},
                {"tokens_base", tokens_base},
                {"tokens_extended", tokens_extended},
                {"chars_per_token_base", chars_per_token_base},
                {"chars_per_token_extended", chars_per_token_extended},
                {"ratio", ratio}};
    }
};

// Full encode passes with both tokenizers over the same documents.
inline CompressionReport measure_compression(const bpe::Tokenizer &base, const bpe::Tokenizer &extended,
                                             const std::vector<std::string> &docs, int jobs = 1) {
    CompressionReport report;
    std::vector<std::array<std::int64_t, 3>> per_doc(docs.size());
    parallel_indexed(docs.size(), jobs, [&](std::size_t i) {
        per_doc[i] = {static_cast<std::int64_t>(utf8::count_scalars(docs[i])),
                      static_cast<std::int64_t>(base.encode(docs[i]).size()),
                      static_cast<std::int64_t>(extended.encode(docs[i]).size())};
    });
    for (const auto &[chars, tb, te] : per_doc) {
        report.corpus_chars += chars;
        report.tokens_base += tb;
        report.tokens_extended += te;
    }
    if (report.tokens_base > 0)
        report.chars_per_token_base = static_cast<double>(report.corpus_chars) / static_cast<double>(report.tokens_base);
    if (report.tokens_extended > 0) {
        report.chars_per_token_extended =
            static_cast<double>(report.corpus_chars) / static_cast<double>(report.tokens_extended);
        report.ratio = static_cast<double>(report.tokens_base) / static_cast<double>(report.tokens_extended);
    }
    return report;
}

// Context window in tokens times measured characters-per-token, floored
// to whole characters of the target language.
inline std::int64_t effective_context(double chars_per_token, std::int64_t context_tokens) {
    if (!(chars_per_token > 0.0) || context_tokens <= 0)
        throw InvalidArgument("effective_context requires positive inputs");
    return static_cast<std::int64_t>(std::floor(chars_per_token * static_cast<double>(context_tokens)));
}

} // namespace tokx::vocab
