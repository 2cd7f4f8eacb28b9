#pragma once

#include <cstdint>
#include <fstream>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"
#include "tokx/utf8.hpp"

namespace tokx::bpe {

using TokenId = std::int32_t;
using MergeRule = std::pair<std::string, std::string>;

// Reserved piece spelling for byte-fallback tokens.
inline std::string byte_piece(unsigned byte) {
    static const char *hex = "0123456789ABCDEF";
    std::string s = "<0x00>";
    s[3] = hex[(byte >> 4) & 0xF];
    s[4] = hex[byte & 0xF];
    return s;
}

inline bool is_byte_piece(std::string_view piece) {
    return piece.size() == 6 && piece.rfind("<0x", 0) == 0 && piece[5] == '>' &&
           std::isxdigit(static_cast<unsigned char>(piece[3])) &&
           std::isxdigit(static_cast<unsigned char>(piece[4])) &&
           !std::islower(static_cast<unsigned char>(piece[3])) &&
           !std::islower(static_cast<unsigned char>(piece[4]));
}

inline unsigned byte_piece_value(std::string_view piece) {
    auto hexval = [](char c) -> unsigned {
        return c <= '9' ? static_cast<unsigned>(c - '0') : static_cast<unsigned>(c - 'A' + 10);
    };
    return (hexval(piece[3]) << 4) | hexval(piece[4]);
}

class UnencodableError : public Error {
  public:
    explicit UnencodableError(char32_t cp)
        : Error("character U+" + to_hex(cp) + " is not in the vocabulary and byte fallback is off") {}

  private:
    static std::string to_hex(char32_t cp) {
        std::string s;
        const char *hex = "0123456789ABCDEF";
        for (int shift = 20; shift >= 0; shift -= 4) s.push_back(hex[(cp >> shift) & 0xF]);
        return s.substr(s.find_first_not_of('0') == std::string::npos ? 5 : s.find_first_not_of('0'));
    }
};

class DecodeError : public Error {
  public:
    using Error::Error;
};

// Immutable BPE tokenizer: piece table plus ranked merge rules. Encoding
// applies merges strictly in ascending rank; a pair formed by a later
// merge is never folded by an earlier rank, which keeps encode() exactly
// equal to the trainer's final segmentation.
class Tokenizer {
  public:
    Tokenizer(std::vector<std::string> vocab, std::vector<MergeRule> merges, bool byte_fallback)
        : vocab_(std::move(vocab)), merges_(std::move(merges)), byte_fallback_(byte_fallback) {
        build_index();
    }

    // Character-level tokenizer over a fixed alphabet, no merges.
    static Tokenizer char_level(const std::set<char32_t> &alphabet, bool byte_fallback = true) {
        std::vector<std::string> vocab;
        if (byte_fallback)
            for (unsigned b = 0; b < 256; ++b) vocab.push_back(byte_piece(b));
        for (char32_t cp : alphabet) vocab.push_back(utf8::encode(cp));
        return Tokenizer(std::move(vocab), {}, byte_fallback);
    }

    const std::vector<std::string> &vocab() const { return vocab_; }
    const std::vector<MergeRule> &merges() const { return merges_; }
    bool byte_fallback() const { return byte_fallback_; }
    std::size_t vocab_size() const { return vocab_.size(); }

    const std::string &piece(TokenId id) const { return vocab_.at(static_cast<std::size_t>(id)); }

    std::optional<TokenId> piece_id(std::string_view piece) const {
        auto it = piece_to_id_.find(std::string(piece));
        if (it == piece_to_id_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<TokenId> encode(std::string_view text) const {
        std::vector<TokenId> ids = seed_tokens(text);
        if (merge_lookup_.empty() || ids.size() < 2) return ids;
        apply_merges(ids);
        return ids;
    }

    std::string decode(std::span<const TokenId> ids) const {
        std::string out;
        for (TokenId id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size())
                throw DecodeError("token id out of range: " + std::to_string(id));
            const std::string &p = vocab_[static_cast<std::size_t>(id)];
            if (byte_fallback_ && is_byte_piece(p))
                out.push_back(static_cast<char>(byte_piece_value(p)));
            else
                out += p;
        }
        if (auto bad = utf8::find_invalid(out))
            throw DecodeError("decoded byte sequence is not valid UTF-8 at byte " + std::to_string(*bad));
        return out;
    }

    std::string decode(const std::vector<TokenId> &ids) const {
        return decode(std::span<const TokenId>(ids.data(), ids.size()));
    }

    // Starting byte offset of each token in the decoded text, plus the
    // total byte length as a final sentinel entry.
    std::vector<std::size_t> token_byte_offsets(std::span<const TokenId> ids) const {
        std::vector<std::size_t> offsets;
        offsets.reserve(ids.size() + 1);
        std::size_t pos = 0;
        for (TokenId id : ids) {
            offsets.push_back(pos);
            const std::string &p = vocab_.at(static_cast<std::size_t>(id));
            pos += (byte_fallback_ && is_byte_piece(p)) ? 1 : p.size();
        }
        offsets.push_back(pos);
        return offsets;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = 1;
        j["byte_fallback"] = byte_fallback_;
        j["vocab"] = vocab_;
        nlohmann::json ms = nlohmann::json::array();
        for (const auto &[l, r] : merges_) ms.push_back(nlohmann::json::array({l, r}));
        j["merges"] = std::move(ms);
        return j;
    }

    static Tokenizer from_json(const nlohmann::json &j) {
        if (!j.is_object() || j.value("version", 0) != 1)
            throw InvalidArgument("unsupported tokenizer file version");
        std::vector<std::string> vocab = j.at("vocab").get<std::vector<std::string>>();
        std::vector<MergeRule> merges;
        for (const auto &m : j.at("merges")) {
            if (!m.is_array() || m.size() != 2) throw InvalidArgument("malformed merge entry");
            merges.emplace_back(m[0].get<std::string>(), m[1].get<std::string>());
        }
        return Tokenizer(std::move(vocab), std::move(merges), j.at("byte_fallback").get<bool>());
    }

    void save(const std::string &path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write tokenizer file: " + path);
        out << to_json().dump() << '\n';
        if (!out) throw IoError("write error: " + path);
    }

    static Tokenizer load(const std::string &path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open tokenizer file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception &e) {
            throw InvalidArgument("malformed tokenizer file '" + path + "': " + e.what());
        }
        return from_json(j);
    }

  private:
    struct MergeTarget {
        std::int32_t rank;
        TokenId product;
    };

    static std::uint64_t pair_key(TokenId a, TokenId b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }

    void build_index() {
        piece_to_id_.reserve(vocab_.size() * 2);
        for (std::size_t i = 0; i < vocab_.size(); ++i) {
            auto [it, inserted] = piece_to_id_.emplace(vocab_[i], static_cast<TokenId>(i));
            if (!inserted) throw InvalidArgument("duplicate vocab entry: '" + vocab_[i] + "'");
        }
        if (byte_fallback_) {
            for (unsigned b = 0; b < 256; ++b)
                if (!piece_to_id_.count(byte_piece(b)))
                    throw InvalidArgument("byte_fallback tokenizer is missing byte token " + byte_piece(b));
        }
        merge_lookup_.reserve(merges_.size() * 2);
        for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
            const auto &[l, r] = merges_[rank];
            auto li = piece_to_id_.find(l), ri = piece_to_id_.find(r), pi = piece_to_id_.find(l + r);
            if (li == piece_to_id_.end() || ri == piece_to_id_.end())
                throw InvalidArgument("merge references unknown piece: ('" + l + "','" + r + "')");
            if (pi == piece_to_id_.end())
                throw InvalidArgument("merge product missing from vocab: '" + l + r + "'");
            // On duplicate pairs the lowest rank wins; later copies are
            // unreachable because a merged pair never re-forms.
            merge_lookup_.try_emplace(pair_key(li->second, ri->second),
                                      MergeTarget{static_cast<std::int32_t>(rank), pi->second});
        }
    }

    std::vector<TokenId> seed_tokens(std::string_view text) const {
        std::vector<TokenId> ids;
        ids.reserve(text.size());
        std::size_t pos = 0;
        while (pos < text.size()) {
            utf8::DecodeResult r = utf8::decode_one(text, pos);
            if (r.length == 0) throw InvalidArgument("encode input is not valid UTF-8");
            std::string_view ch(text.data() + pos, r.length);
            auto it = piece_to_id_.find(std::string(ch));
            if (it != piece_to_id_.end()) {
                ids.push_back(it->second);
            } else if (byte_fallback_) {
                for (unsigned i = 0; i < r.length; ++i) {
                    unsigned byte = static_cast<unsigned char>(text[pos + i]);
                    ids.push_back(piece_to_id_.at(byte_piece(byte)));
                }
            } else {
                throw UnencodableError(r.cp);
            }
            pos += r.length;
        }
        return ids;
    }

    void apply_merges(std::vector<TokenId> &ids) const {
        const std::size_t n = ids.size();
        std::vector<std::int32_t> prev(n), next(n);
        for (std::size_t i = 0; i < n; ++i) {
            prev[i] = static_cast<std::int32_t>(i) - 1;
            next[i] = i + 1 < n ? static_cast<std::int32_t>(i) + 1 : -1;
        }
        std::vector<char> alive(n, 1);

        using Entry = std::pair<std::int32_t, std::int32_t>; // (rank, left slot)
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        auto rank_at = [&](std::int32_t i) -> const MergeTarget * {
            std::int32_t j = next[static_cast<std::size_t>(i)];
            if (j < 0) return nullptr;
            auto it = merge_lookup_.find(pair_key(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]));
            return it == merge_lookup_.end() ? nullptr : &it->second;
        };
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (const MergeTarget *t = rank_at(static_cast<std::int32_t>(i)))
                queue.emplace(t->rank, static_cast<std::int32_t>(i));

        while (!queue.empty()) {
            auto [rank, pos] = queue.top();
            queue.pop();
            if (!alive[static_cast<std::size_t>(pos)]) continue;
            const MergeTarget *t = rank_at(pos);
            if (t == nullptr || t->rank != rank) continue; // stale entry
            std::int32_t right = next[static_cast<std::size_t>(pos)];
            ids[static_cast<std::size_t>(pos)] = t->product;
            alive[static_cast<std::size_t>(right)] = 0;
            next[static_cast<std::size_t>(pos)] = next[static_cast<std::size_t>(right)];
            if (next[static_cast<std::size_t>(pos)] >= 0)
                prev[static_cast<std::size_t>(next[static_cast<std::size_t>(pos)])] = pos;
            // Ascending-rank pass semantics: pairs formed now only count
            // for ranks that have not run yet.
            if (std::int32_t p = prev[static_cast<std::size_t>(pos)]; p >= 0)
                if (const MergeTarget *nt = rank_at(p); nt && nt->rank > rank) queue.emplace(nt->rank, p);
            if (const MergeTarget *nt = rank_at(pos); nt && nt->rank > rank) queue.emplace(nt->rank, pos);
        }

        std::vector<TokenId> out;
        out.reserve(n);
        for (std::int32_t i = 0; i != -1; i = next[static_cast<std::size_t>(i)])
            if (alive[static_cast<std::size_t>(i)]) out.push_back(ids[static_cast<std::size_t>(i)]);
        ids = std::move(out);
    }

    std::vector<std::string> vocab_;
    std::vector<MergeRule> merges_;
    bool byte_fallback_;
    std::unordered_map<std::string, TokenId> piece_to_id_;
    std::unordered_map<std::uint64_t, MergeTarget> merge_lookup_;
};

} // namespace tokx::bpe
