#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"
#include "tokx/eval.hpp"
#include "tokx/tokenizer.hpp"

namespace tokx::eval {

// Echoes the gold answer of whichever known question appears last in the
// prompt (the target block; demonstrations come earlier). Oracle ceiling
// for accuracy-style metrics.
class EchoGoldAdapter : public ModelAdapter {
  public:
    void add(std::string question, std::string gold) {
        entries_.emplace_back(std::move(question), std::move(gold));
    }

    std::string generate(const GenerationRequest &request) override {
        // latest match wins (the target block ends the prompt); on equal
        // positions the longer question wins, so "q 3" never shadows "q 31"
        std::size_t best_pos = std::string::npos;
        std::size_t best_len = 0;
        const std::string *best = nullptr;
        for (const auto &[question, gold] : entries_) {
            std::size_t pos = request.prompt.rfind(question);
            if (pos == std::string::npos) continue;
            if (best == nullptr || pos > best_pos || (pos == best_pos && question.size() > best_len)) {
                best_pos = pos;
                best_len = question.size();
                best = &gold;
            }
        }
        return best ? *best : std::string();
    }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Always answers the same text, e.g. "A".
class FixedAnswerAdapter : public ModelAdapter {
  public:
    explicit FixedAnswerAdapter(std::string answer) : answer_(std::move(answer)) {}
    std::string generate(const GenerationRequest &) override { return answer_; }

  private:
    std::string answer_;
};

// Uniform distribution over a vocabulary of `vocab_size` tokens. The NLL
// is computed in long double so exp(mean) reproduces the vocab size
// bit-exactly.
class UniformScoringAdapter : public ModelAdapter {
  public:
    explicit UniformScoringAdapter(std::int64_t vocab_size) : vocab_size_(vocab_size) {
        if (vocab_size <= 0) throw InvalidArgument("vocab_size must be positive");
    }
    std::string generate(const GenerationRequest &) override { return ""; }
    bool supports_scoring() const override { return true; }
    std::vector<long double> token_nll(std::span<const bpe::TokenId> ids) override {
        return std::vector<long double>(ids.size(), std::log(static_cast<long double>(vocab_size_)));
    }

  private:
    std::int64_t vocab_size_;
};

// Scores token i of each document with a fixed probability sequence
// (cycled); used for closed-form perplexity fixtures.
class SequenceScoringAdapter : public ModelAdapter {
  public:
    explicit SequenceScoringAdapter(std::vector<double> probabilities)
        : probabilities_(std::move(probabilities)) {
        if (probabilities_.empty()) throw InvalidArgument("need at least one probability");
    }
    std::string generate(const GenerationRequest &) override { return ""; }
    bool supports_scoring() const override { return true; }
    std::vector<long double> token_nll(std::span<const bpe::TokenId> ids) override {
        std::vector<long double> out(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i)
            out[i] = -std::log(static_cast<long double>(probabilities_[i % probabilities_.size()]));
        return out;
    }

  private:
    std::vector<double> probabilities_;
};

// Passkey oracle: scans the prompt for the key sentence pattern and
// repeats the key. With a window set it sees only the last W tokens of
// the prompt, mimicking a model whose attention span is capped.
class KeyExtractorAdapter : public ModelAdapter {
  public:
    KeyExtractorAdapter() = default;
    KeyExtractorAdapter(const bpe::Tokenizer *tokenizer, std::int64_t window)
        : tokenizer_(tokenizer), window_(window) {
        if (window <= 0) throw InvalidArgument("window must be positive");
    }

    std::string generate(const GenerationRequest &request) override {
        std::string_view visible = request.prompt;
        std::string truncated;
        if (tokenizer_ != nullptr) {
            std::vector<bpe::TokenId> ids = tokenizer_->encode(request.prompt);
            if (static_cast<std::int64_t>(ids.size()) > window_) {
                std::size_t drop = ids.size() - static_cast<std::size_t>(window_);
                truncated = tokenizer_->decode(
                    std::span<const bpe::TokenId>(ids.data() + drop, ids.size() - drop));
                visible = truncated;
            }
        }
        // key sentence shape: "<key> is the pass key." with the marker
        // after the key; the question's "is the pass key?" never has
        // five lowercase letters right in front of it
        static constexpr std::string_view marker = " is the pass key";
        auto lower = [](char c) { return c >= 'a' && c <= 'z'; };
        std::size_t pos = 0;
        while ((pos = visible.find(marker, pos)) != std::string_view::npos) {
            if (pos >= 5) {
                std::string_view key = visible.substr(pos - 5, 5);
                bool all_lower = true;
                for (char c : key) all_lower &= lower(c);
                bool boundary = pos == 5 || !lower(visible[pos - 6]);
                if (all_lower && boundary) return std::string(key);
            }
            pos += marker.size();
        }
        return "no key found";
    }

  private:
    const bpe::Tokenizer *tokenizer_ = nullptr; // window disabled when null
    std::int64_t window_ = 0;
};

inline std::string adapter_token_from_env() {
    const char *tok = std::getenv("TOKX_ADAPTER_TOKEN");
    return tok ? tok : "";
}

} // namespace tokx::eval
