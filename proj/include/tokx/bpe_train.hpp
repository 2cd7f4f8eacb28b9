#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokx/common.hpp"
#include "tokx/tokenizer.hpp"
#include "tokx/utf8.hpp"

namespace tokx::bpe {

// Exact multiset counts of adjacent token pairs under a tokenizer's
// current segmentation. Ordered map so iteration is deterministic.
using PairCounts = std::map<MergeRule, std::int64_t>;

inline PairCounts count_pairs(const std::vector<std::string> &docs, const Tokenizer &tokenizer) {
    PairCounts counts;
    for (const std::string &doc : docs) {
        std::vector<TokenId> ids = tokenizer.encode(doc);
        for (std::size_t i = 0; i + 1 < ids.size(); ++i)
            ++counts[{tokenizer.piece(ids[i]), tokenizer.piece(ids[i + 1])}];
    }
    return counts;
}

struct TrainConfig {
    std::int64_t target_new_tokens = 0;
    bool byte_fallback = true;
    // Latin corpora can opt into word-boundary isolation; CJK text has no
    // delimiters, so pairs span freely by default.
    bool pre_split_whitespace = false;
    int max_token_chars = 16; // merges producing longer pieces are skipped
    std::int64_t min_pair_count = 2;
};

struct TrainResult {
    Tokenizer tokenizer;
    std::int64_t merges_requested = 0;
    std::int64_t merges_trained = 0; // < requested when mergeable pairs exhaust
};

namespace detail {

inline bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v';
}

// Greedy merge trainer. Token sequences live in one slot arena with
// doubly-linked adjacency; pair counts and occurrence lists are updated
// incrementally per merged occurrence, and the best pair is selected via
// a lazily invalidated max-heap keyed by (count, left piece, right piece).
class Trainer {
  public:
    Trainer(const std::vector<std::string> &docs, const TrainConfig &cfg) : cfg_(cfg) {
        std::set<char32_t> alphabet;
        std::vector<std::vector<char32_t>> decoded;
        decoded.reserve(docs.size());
        for (const std::string &doc : docs) {
            if (auto bad = utf8::find_invalid(doc))
                throw InvalidArgument("training document is not valid UTF-8 at byte " + std::to_string(*bad));
            decoded.push_back(utf8::decode(doc));
            for (char32_t cp : decoded.back()) alphabet.insert(cp);
        }
        if (cfg.byte_fallback)
            for (unsigned b = 0; b < 256; ++b) add_piece(byte_piece(b), 1);
        for (char32_t cp : alphabet) add_piece(utf8::encode(cp), 1);

        for (const auto &cps : decoded) append_sequences(cps);
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (next_[i] >= 0) record_pair(static_cast<std::int32_t>(i));
        has_content_ = !ids_.empty();
    }

    TrainResult run() {
        if (cfg_.target_new_tokens > 0 && !has_content_)
            throw InvalidArgument("cannot train merges on an empty corpus");
        std::int64_t trained = 0;
        while (trained < cfg_.target_new_tokens) {
            auto best = pop_best();
            if (!best) break;
            merge_all(*best);
            ++trained;
        }
        Tokenizer tok(pieces_, merges_, cfg_.byte_fallback);
        return TrainResult{std::move(tok), cfg_.target_new_tokens, trained};
    }

  private:
    struct HeapEntry {
        std::int64_t count;
        TokenId left, right;
    };
    struct HeapCmp {
        const std::vector<std::string> *pieces;
        // priority_queue keeps the "largest"; larger means higher count,
        // then lexicographically smaller (left, right) pieces.
        bool operator()(const HeapEntry &a, const HeapEntry &b) const {
            if (a.count != b.count) return a.count < b.count;
            const std::string &al = (*pieces)[static_cast<std::size_t>(a.left)];
            const std::string &bl = (*pieces)[static_cast<std::size_t>(b.left)];
            if (al != bl) return al > bl;
            return (*pieces)[static_cast<std::size_t>(a.right)] > (*pieces)[static_cast<std::size_t>(b.right)];
        }
    };

    static std::uint64_t key_of(TokenId a, TokenId b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }

    TokenId add_piece(const std::string &piece, std::size_t char_len_hint) {
        auto it = piece_ids_.find(piece);
        if (it != piece_ids_.end()) return it->second;
        TokenId id = static_cast<TokenId>(pieces_.size());
        pieces_.push_back(piece);
        char_len_.push_back(char_len_hint ? char_len_hint : utf8::count_scalars(piece));
        piece_ids_.emplace(piece, id);
        return id;
    }

    void append_sequences(const std::vector<char32_t> &cps) {
        std::size_t i = 0;
        while (i < cps.size()) {
            std::size_t j = i;
            if (cfg_.pre_split_whitespace) {
                bool sp = is_space_cp(cps[i]);
                while (j < cps.size() && is_space_cp(cps[j]) == sp) ++j;
            } else {
                j = cps.size();
            }
            std::int32_t first = static_cast<std::int32_t>(ids_.size());
            for (std::size_t k = i; k < j; ++k) {
                ids_.push_back(piece_ids_.at(utf8::encode(cps[k])));
                std::int32_t slot = static_cast<std::int32_t>(ids_.size()) - 1;
                prev_.push_back(slot > first ? slot - 1 : -1);
                next_.push_back(-1);
                dead_.push_back(0);
                if (slot > first) next_[static_cast<std::size_t>(slot - 1)] = slot;
            }
            i = j;
        }
    }

    bool pair_pushable(TokenId a, TokenId b, std::int64_t count) const {
        if (count < cfg_.min_pair_count) return false;
        std::size_t len = char_len_[static_cast<std::size_t>(a)] + char_len_[static_cast<std::size_t>(b)];
        if (len > static_cast<std::size_t>(cfg_.max_token_chars)) return false;
        // keep the byte-token spelling reserved
        const std::string &pa = pieces_[static_cast<std::size_t>(a)];
        const std::string &pb = pieces_[static_cast<std::size_t>(b)];
        if (pa.size() + pb.size() == 6 && is_byte_piece(pa + pb)) return false;
        return true;
    }

    void push_if_eligible(TokenId a, TokenId b, std::int64_t count) {
        if (pair_pushable(a, b, count)) heap_.push(HeapEntry{count, a, b});
    }

    void record_pair(std::int32_t left_slot) {
        std::int32_t r = next_[static_cast<std::size_t>(left_slot)];
        TokenId a = ids_[static_cast<std::size_t>(left_slot)], b = ids_[static_cast<std::size_t>(r)];
        std::uint64_t k = key_of(a, b);
        std::int64_t c = ++counts_[k];
        occurrences_[k].push_back(left_slot);
        push_if_eligible(a, b, c);
    }

    void unrecord_pair(TokenId a, TokenId b) {
        std::uint64_t k = key_of(a, b);
        auto it = counts_.find(k);
        std::int64_t c = --it->second;
        if (c == 0) {
            counts_.erase(it);
            occurrences_.erase(k);
        } else {
            push_if_eligible(a, b, c); // keep a live entry at the new count
        }
    }

    std::optional<HeapEntry> pop_best() {
        while (!heap_.empty()) {
            HeapEntry e = heap_.top();
            heap_.pop();
            auto it = counts_.find(key_of(e.left, e.right));
            if (it == counts_.end() || it->second != e.count) continue; // stale
            return e;
        }
        return std::nullopt;
    }

    void merge_all(const HeapEntry &e) {
        std::uint64_t k = key_of(e.left, e.right);
        const std::string piece = pieces_[static_cast<std::size_t>(e.left)] + pieces_[static_cast<std::size_t>(e.right)];
        TokenId product = add_piece(piece, char_len_[static_cast<std::size_t>(e.left)] +
                                               char_len_[static_cast<std::size_t>(e.right)]);
        merges_.emplace_back(pieces_[static_cast<std::size_t>(e.left)],
                             pieces_[static_cast<std::size_t>(e.right)]);

        std::vector<std::int32_t> occs = std::move(occurrences_[k]);
        std::sort(occs.begin(), occs.end());
        for (std::int32_t s : occs) {
            auto su = static_cast<std::size_t>(s);
            if (dead_[su] || ids_[su] != e.left) continue;
            std::int32_t t = next_[su];
            if (t < 0 || ids_[static_cast<std::size_t>(t)] != e.right) continue;
            std::int32_t p = prev_[su], n2 = next_[static_cast<std::size_t>(t)];

            unrecord_pair(e.left, e.right);
            if (p >= 0) unrecord_pair(ids_[static_cast<std::size_t>(p)], e.left);
            if (n2 >= 0) unrecord_pair(e.right, ids_[static_cast<std::size_t>(n2)]);

            ids_[su] = product;
            dead_[static_cast<std::size_t>(t)] = 1;
            next_[su] = n2;
            if (n2 >= 0) prev_[static_cast<std::size_t>(n2)] = s;

            if (p >= 0) record_pair(p);
            if (n2 >= 0) record_pair(s);
        }
        occurrences_.erase(k);
        counts_.erase(k);
    }

    TrainConfig cfg_;
    std::vector<std::string> pieces_;
    std::vector<std::size_t> char_len_;
    std::unordered_map<std::string, TokenId> piece_ids_;
    std::vector<MergeRule> merges_;

    std::vector<TokenId> ids_;
    std::vector<std::int32_t> prev_, next_;
    std::vector<char> dead_;
    std::unordered_map<std::uint64_t, std::int64_t> counts_;
    std::unordered_map<std::uint64_t, std::vector<std::int32_t>> occurrences_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCmp> heap_{HeapCmp{&pieces_}};
    bool has_content_ = false;
};

} // namespace detail

inline TrainResult train_bpe(const std::vector<std::string> &docs, const TrainConfig &cfg) {
    if (cfg.target_new_tokens < 0) throw InvalidArgument("target_new_tokens must be >= 0");
    detail::Trainer trainer(docs, cfg);
    return trainer.run();
}

} // namespace tokx::bpe
