#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"
#include "tokx/parallel.hpp"
#include "tokx/tokenizer.hpp"

namespace tokx::eval {

struct GenerationRequest {
    std::string prompt;
    int max_new_tokens = 64;
    double temperature = 0.0;
};

// Pluggable model surface. Generation is mandatory; per-token scoring is
// optional. Scoring returns natural-log NLLs in long double so that
// closed-form perplexities (uniform distribution etc.) survive the
// log/exp round trip bit-exactly; the HTTP wire format remains double.
class ModelAdapter {
  public:
    virtual ~ModelAdapter() = default;
    virtual std::string generate(const GenerationRequest &request) = 0;
    virtual bool supports_scoring() const { return false; }
    virtual std::vector<long double> token_nll(std::span<const bpe::TokenId> /*ids*/) {
        throw InvalidArgument("this adapter has no scoring capability");
    }
};

// ---------------------------------------------------------------------
// Few-shot prompting
// ---------------------------------------------------------------------

struct McItem {
    std::string question;
    std::vector<std::string> choices;
    std::string answer; // gold choice label, "A".."E"
};

struct QaPair {
    std::string context;
    std::string question;
    std::string answer;
};

enum class PromptTemplate { MultipleChoice, Extractive };

inline PromptTemplate prompt_template_from_name(std::string_view name) {
    if (name == "mc") return PromptTemplate::MultipleChoice;
    if (name == "extractive") return PromptTemplate::Extractive;
    throw InvalidArgument("unknown prompt template: " + std::string(name));
}

struct FewShotSpec {
    int shots = 0;
    std::vector<McItem> mc_demonstrations;
    std::vector<QaPair> qa_demonstrations;
    PromptTemplate tmpl = PromptTemplate::MultipleChoice;

    void validate() const {
        std::size_t n = tmpl == PromptTemplate::MultipleChoice ? mc_demonstrations.size()
                                                               : qa_demonstrations.size();
        if (static_cast<std::size_t>(shots) != n)
            throw InvalidArgument("shots (" + std::to_string(shots) + ") != demonstrations (" +
                                  std::to_string(n) + ")");
    }
};

inline char choice_label(std::size_t index) { return static_cast<char>('A' + index); }

namespace detail {

inline void render_mc_block(std::string &out, const McItem &item, bool with_answer) {
    out += "Question: ";
    out += item.question;
    out += "\n";
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        out += choice_label(i);
        out += ". ";
        out += item.choices[i];
        out += "\n";
    }
    out += "Answer:";
    if (with_answer) {
        out += " ";
        out += item.answer;
    }
}

inline void render_qa_block(std::string &out, const QaPair &item, bool with_answer) {
    out += "Passage: ";
    out += item.context;
    out += "\nQuestion: ";
    out += item.question;
    out += "\nAnswer:";
    if (with_answer) {
        out += " ";
        out += item.answer;
    }
}

} // namespace detail

// Demonstrations in order, then the target block with an empty answer
// slot. The exact wording is this harness's own fixed convention.
inline std::string build_fewshot_prompt(const FewShotSpec &spec, const McItem &target) {
    spec.validate();
    if (spec.tmpl != PromptTemplate::MultipleChoice)
        throw InvalidArgument("template mismatch: target is a multiple-choice item");
    std::string out;
    for (const McItem &demo : spec.mc_demonstrations) {
        detail::render_mc_block(out, demo, true);
        out += "\n\n";
    }
    detail::render_mc_block(out, target, false);
    return out;
}

inline std::string build_fewshot_prompt(const FewShotSpec &spec, const QaPair &target) {
    spec.validate();
    if (spec.tmpl != PromptTemplate::Extractive)
        throw InvalidArgument("template mismatch: target is an extractive item");
    std::string out;
    for (const QaPair &demo : spec.qa_demonstrations) {
        detail::render_qa_block(out, demo, true);
        out += "\n\n";
    }
    detail::render_qa_block(out, target, false);
    return out;
}

// ---------------------------------------------------------------------
// Multiple-choice evaluation
// ---------------------------------------------------------------------

// First standalone A-E letter token in the completion, case-insensitive.
inline std::optional<char> extract_choice_label(std::string_view completion, std::size_t n_choices) {
    const char last = static_cast<char>('A' + (n_choices == 0 ? 4 : n_choices - 1));
    std::size_t i = 0;
    auto is_word_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    };
    while (i < completion.size()) {
        if (!is_word_char(completion[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < completion.size() && is_word_char(completion[j])) ++j;
        if (j - i == 1) {
            char c = completion[i];
            if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
            if (c >= 'A' && c <= last) return c;
        }
        i = j;
    }
    return std::nullopt;
}

struct McRecord {
    std::string question;
    std::string completion;
    std::optional<char> extracted;
    char gold = '?';
    bool correct = false;
    bool flagged = false; // unparseable output, counted wrong
};

struct McReport {
    double accuracy = 0.0;
    std::int64_t total = 0;
    std::int64_t correct = 0;
    std::int64_t flagged = 0;
    std::vector<McRecord> records;

    nlohmann::json to_json() const {
        nlohmann::json items = nlohmann::json::array();
        for (const McRecord &r : records) {
            items.push_back({{"question", r.question},
                             {"completion", r.completion},
                             {"extracted", r.extracted ? std::string(1, *r.extracted) : ""},
                             {"gold", std::string(1, r.gold)},
                             {"correct", r.correct},
                             {"flagged", r.flagged}});
        }
        return {{"accuracy", accuracy}, {"total", total},   {"correct", correct},
                {"flagged", flagged},   {"records", items}};
    }
};

inline McReport run_mc_eval(ModelAdapter &adapter, const std::vector<McItem> &items,
                            const FewShotSpec &spec, int max_new_tokens = 8, int jobs = 1) {
    spec.validate();
    McReport report;
    report.total = static_cast<std::int64_t>(items.size());
    report.records.resize(items.size());
    parallel_indexed(items.size(), jobs, [&](std::size_t i) {
        const McItem &item = items[i];
        if (item.answer.size() != 1 || item.answer[0] < 'A' ||
            item.answer[0] >= static_cast<char>('A' + item.choices.size()))
            throw InvalidArgument("item has no valid gold choice label: " + item.question);
        McRecord rec;
        rec.question = item.question;
        rec.gold = item.answer[0];
        rec.completion = adapter.generate({build_fewshot_prompt(spec, item), max_new_tokens, 0.0});
        rec.extracted = extract_choice_label(rec.completion, item.choices.size());
        rec.flagged = !rec.extracted.has_value();
        rec.correct = rec.extracted && *rec.extracted == rec.gold;
        report.records[i] = std::move(rec);
    });
    for (const McRecord &r : report.records) {
        if (r.correct) ++report.correct;
        if (r.flagged) ++report.flagged;
    }
    if (report.total > 0)
        report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
    return report;
}

// ---------------------------------------------------------------------
// Perplexity
// ---------------------------------------------------------------------

struct PplResult {
    double ppl = 0.0;
    std::int64_t token_count = 0;
    std::int64_t doc_count = 0;
};

// exp(mean per-token NLL), documents scored independently with no
// cross-document context. Accumulation and exponentiation stay in long
// double; see ModelAdapter::token_nll.
inline PplResult perplexity(ModelAdapter &adapter, const std::vector<std::string> &docs,
                            const bpe::Tokenizer &tokenizer) {
    if (!adapter.supports_scoring()) throw InvalidArgument("adapter does not support scoring");
    PplResult result;
    long double total_nll = 0.0L;
    for (const std::string &doc : docs) {
        std::vector<bpe::TokenId> ids = tokenizer.encode(doc);
        if (ids.empty()) continue;
        std::vector<long double> nll = adapter.token_nll(ids);
        if (nll.size() != ids.size())
            throw InvalidArgument("adapter returned " + std::to_string(nll.size()) + " NLLs for " +
                                  std::to_string(ids.size()) + " tokens");
        for (long double v : nll) total_nll += v;
        result.token_count += static_cast<std::int64_t>(ids.size());
        ++result.doc_count;
    }
    if (result.token_count == 0) throw InvalidArgument("perplexity over an empty corpus");
    result.ppl = static_cast<double>(
        std::exp(total_nll / static_cast<long double>(result.token_count)));
    return result;
}

// ---------------------------------------------------------------------
// Judge protocol
// ---------------------------------------------------------------------

inline constexpr std::string_view kJudgeTemplateHead =
    "[Instruction]\n"
    "Please act as an impartial judge and evaluate the quality of the response provided by an AI "
    "assistant to the user question displayed below. Your evaluation should consider factors such as "
    "the helpfulness, relevance, accuracy, depth, creativity, and level of detail of the response. "
    "Responses in Traditional Chinese are expected and are more favourable than Simplified Chinese, "
    "English, and other languages. Begin your evaluation by providing a short explanation. Be as "
    "objective as possible. After providing your explanation, you must rate the response on a scale "
    "of 1 to 10 by strictly following this format: [[rating]], for example: Rating: [[5]].\n\n"
    "[Question]\n\n";

inline constexpr std::string_view kJudgeTemplateMid = "\n\n[The Start of Assistant's Answer]\n\n";
inline constexpr std::string_view kJudgeTemplateTail = "\n\n[The End of Assistant's Answer]";

inline std::string render_judge_prompt(std::string_view question, std::string_view answer) {
    std::string out;
    out.reserve(kJudgeTemplateHead.size() + question.size() + kJudgeTemplateMid.size() + answer.size() +
                kJudgeTemplateTail.size());
    out += kJudgeTemplateHead;
    out += question;
    out += kJudgeTemplateMid;
    out += answer;
    out += kJudgeTemplateTail;
    return out;
}

// Last [[k]] with integer k in 1..10; anything else is unparsed. The
// rendered template itself carries the literal example "Rating: [[5]]",
// so taking the last bracket keeps prompt-echoing judges parseable.
inline std::optional<int> parse_rating(std::string_view text) {
    std::optional<int> rating;
    std::size_t pos = 0;
    while ((pos = text.find("[[", pos)) != std::string_view::npos) {
        std::size_t digits = pos + 2;
        std::size_t end = digits;
        while (end < text.size() && text[end] >= '0' && text[end] <= '9') ++end;
        bool closed = end + 1 < text.size() && text[end] == ']' && text[end + 1] == ']';
        if (closed && end > digits && end - digits <= 2) {
            int value = 0;
            for (std::size_t i = digits; i < end; ++i) value = value * 10 + (text[i] - '0');
            if (value >= 1 && value <= 10) rating = value;
        }
        pos += 2;
    }
    return rating;
}

struct JudgeRecord {
    std::string question;
    std::string answer;
    std::string rendered_prompt;
    std::optional<int> rating; // 1..10 when parsed
};

// ---------------------------------------------------------------------
// Two-turn conversations
// ---------------------------------------------------------------------

struct TwoTurnItem {
    std::string turn1;
    std::string turn2;
    std::string category;
};

struct TwoTurnOutcome {
    std::string completion1;
    std::string completion2;
};

// Turn 2 sees the full first exchange, matching two-turn chat benchmarks.
inline std::string build_second_turn_prompt(std::string_view turn1, std::string_view completion1,
                                            std::string_view turn2) {
    std::string out;
    out += "User: ";
    out += turn1;
    out += "\nAssistant: ";
    out += completion1;
    out += "\nUser: ";
    out += turn2;
    out += "\nAssistant:";
    return out;
}

inline TwoTurnOutcome run_two_turn(ModelAdapter &adapter, const TwoTurnItem &item,
                                   int max_new_tokens = 256) {
    TwoTurnOutcome out;
    std::string p1 = "User: " + item.turn1 + "\nAssistant:";
    out.completion1 = adapter.generate({p1, max_new_tokens, 0.0});
    out.completion2 =
        adapter.generate({build_second_turn_prompt(item.turn1, out.completion1, item.turn2),
                          max_new_tokens, 0.0});
    return out;
}

// ---------------------------------------------------------------------
// Category aggregation
// ---------------------------------------------------------------------

struct CategoryScores {
    std::string category;
    std::vector<double> scores;
};

struct CategoryAverages {
    std::vector<std::pair<std::string, double>> per_category; // input order
    double overall = 0.0;                                     // mean of category means

    nlohmann::json to_json() const {
        nlohmann::json cats = nlohmann::json::array();
        for (const auto &[name, avg] : per_category) cats.push_back({{"category", name}, {"average", avg}});
        return {{"categories", cats}, {"overall", overall}};
    }
};

// Arithmetic mean per category, overall mean of category means. No
// rounding here; display rounding is the caller's concern.
inline CategoryAverages aggregate_categories(const std::vector<CategoryScores> &groups) {
    if (groups.empty()) throw InvalidArgument("no categories to aggregate");
    CategoryAverages out;
    double sum_of_means = 0.0;
    for (const CategoryScores &g : groups) {
        if (g.scores.empty()) throw InvalidArgument("empty category: " + g.category);
        double s = 0.0;
        for (double v : g.scores) s += v;
        double mean = s / static_cast<double>(g.scores.size());
        out.per_category.emplace_back(g.category, mean);
        sum_of_means += mean;
    }
    out.overall = sum_of_means / static_cast<double>(groups.size());
    return out;
}

// Fixed-point display rounding used by the report writers: 2 decimals for
// accuracy tables, 1 for chat scores.
inline double display_round(double value, int places) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", places, value);
    return std::strtod(buf, nullptr);
}

} // namespace tokx::eval
