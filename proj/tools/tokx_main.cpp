// tokx: tokenizer extension and long-context evaluation toolkit.
//
// Subcommands cover BPE training, vocabulary extension with compression
// accounting, rotary-embedding context probes, long-context benchmark
// synthesis and scoring, and a pluggable evaluation harness. Every run
// writes a manifest; `tokx rerun --manifest <file>` reproduces the run
// byte for byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tokx/adapters.hpp"
#include "tokx/bpe_train.hpp"
#include "tokx/common.hpp"
#include "tokx/corpus.hpp"
#include "tokx/eval.hpp"
#include "tokx/http_adapter.hpp"
#include "tokx/longbench.hpp"
#include "tokx/manifest.hpp"
#include "tokx/rope.hpp"
#include "tokx/tokenizer.hpp"
#include "tokx/vocab_extend.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ------------------------------------------------------------------
// Small helpers
// ------------------------------------------------------------------

std::string unescape(const std::string &s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            switch (s[++i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '\\': out.push_back('\\'); break;
                default: out.push_back(s[i]);
            }
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

void write_text(const fs::path &path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tokx::IoError("cannot write: " + path.string());
    out << content;
    if (!out) throw tokx::IoError("write error: " + path.string());
}

void write_json_file(const fs::path &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

fs::path ensure_out_dir(const json &params) {
    fs::path dir = params.value("out_dir", ".");
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const json &params, const std::string &subcommand) {
    tokx::Manifest m;
    m.subcommand = subcommand;
    m.params = params;
    fs::path dir = params.value("out_dir", ".");
    m.save((dir / (subcommand + ".manifest.json")).string());
}

tokx::corpus::CorpusSource source_from_params(const json &params) {
    tokx::corpus::CorpusSource src;
    src.paths = params.at("corpus").get<std::vector<std::string>>();
    src.doc_separator = unescape(params.value("doc_separator", "\\n\\n"));
    src.normalize_nfc = params.value("nfc", false);
    return src;
}

// Adapter factory for specs like "echo-gold", "fixed:A", "uniform:61872",
// "oracle-extract", "oracle-extract-window:4096", "http".
std::unique_ptr<tokx::eval::ModelAdapter> make_adapter(const std::string &spec, const json &params,
                                                       const tokx::bpe::Tokenizer *tokenizer) {
    using namespace tokx::eval;
    auto starts_with = [&](std::string_view prefix) { return spec.rfind(prefix, 0) == 0; };
    if (spec == "oracle-extract") return std::make_unique<KeyExtractorAdapter>();
    if (starts_with("oracle-extract-window:")) {
        if (tokenizer == nullptr)
            throw tokx::InvalidArgument("oracle-extract-window requires --tokenizer");
        std::int64_t window = std::stoll(spec.substr(std::string("oracle-extract-window:").size()));
        return std::make_unique<KeyExtractorAdapter>(tokenizer, window);
    }
    if (starts_with("fixed:")) return std::make_unique<FixedAnswerAdapter>(spec.substr(6));
    if (starts_with("uniform:")) return std::make_unique<UniformScoringAdapter>(std::stoll(spec.substr(8)));
    if (spec == "http") {
        std::string endpoint = params.value("endpoint", "");
        if (endpoint.empty()) throw tokx::InvalidArgument("--endpoint is required for the http adapter");
        return std::make_unique<HttpAdapter>(endpoint, adapter_token_from_env());
    }
    throw tokx::InvalidArgument("unknown adapter spec: " + spec);
}

// ------------------------------------------------------------------
// Subcommand handlers (params in, artifacts + manifest out)
// ------------------------------------------------------------------

void run_train_bpe(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    std::vector<std::string> docs = tokx::corpus::load_corpus(source_from_params(params));
    tokx::bpe::TrainConfig cfg;
    cfg.target_new_tokens = params.at("new_tokens").get<std::int64_t>();
    cfg.byte_fallback = params.value("byte_fallback", true);
    cfg.pre_split_whitespace = params.value("pre_split_whitespace", false);
    cfg.max_token_chars = params.value("max_token_chars", 16);
    cfg.min_pair_count = params.value("min_pair_count", std::int64_t{2});
    tokx::bpe::TrainResult result = tokx::bpe::train_bpe(docs, cfg);

    fs::path tok_path = out_dir / params.value("out", "tokenizer.json");
    result.tokenizer.save(tok_path.string());
    write_json_file(out_dir / "train_report.json",
                    {{"merges_requested", result.merges_requested},
                     {"merges_trained", result.merges_trained},
                     {"vocab_size", result.tokenizer.vocab_size()},
                     {"tokenizer", tok_path.filename().string()}});
    write_manifest(params, "train-bpe");
    std::cout << "trained " << result.merges_trained << "/" << result.merges_requested
              << " merges; vocab " << result.tokenizer.vocab_size() << " -> " << tok_path.string() << "\n";
}

void run_extend_vocab(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    tokx::bpe::Tokenizer base = tokx::bpe::Tokenizer::load(params.at("base").get<std::string>());
    tokx::bpe::Tokenizer candidate = tokx::bpe::Tokenizer::load(params.at("candidate").get<std::string>());
    tokx::vocab::Extension ext = tokx::vocab::extend_vocabulary(base, candidate);

    fs::path tok_path = out_dir / params.value("out", "extended.json");
    ext.tokenizer.save(tok_path.string());
    write_json_file(out_dir / "extension_report.json", ext.report.to_json());
    write_manifest(params, "extend-vocab");
    std::cout << "extended " << ext.report.base_size << " + " << ext.report.candidates_in << " - "
              << ext.report.duplicates_removed << " duplicates = " << ext.report.extended_size << "\n";
}

void run_measure_compression(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    tokx::bpe::Tokenizer base = tokx::bpe::Tokenizer::load(params.at("base").get<std::string>());
    tokx::bpe::Tokenizer extended = tokx::bpe::Tokenizer::load(params.at("extended").get<std::string>());
    std::vector<std::string> docs = tokx::corpus::load_corpus(source_from_params(params));
    tokx::vocab::CompressionReport report =
        tokx::vocab::measure_compression(base, extended, docs, params.value("jobs", 1));

    json j = report.to_json();
    if (params.contains("context_tokens")) {
        std::int64_t ctx = params.at("context_tokens").get<std::int64_t>();
        j["effective_context"] = {
            {"context_tokens", ctx},
            {"base_chars", tokx::vocab::effective_context(report.chars_per_token_base, ctx)},
            {"extended_chars", tokx::vocab::effective_context(report.chars_per_token_extended, ctx)}};
    }
    write_json_file(out_dir / "compression_report.json", j);
    write_manifest(params, "measure-compression");
    std::cout << "tokens " << report.tokens_base << " -> " << report.tokens_extended
              << ", ratio " << report.ratio << "\n";
}

void run_resize_plan(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    tokx::bpe::Tokenizer base = tokx::bpe::Tokenizer::load(params.at("base").get<std::string>());
    tokx::bpe::Tokenizer extended = tokx::bpe::Tokenizer::load(params.at("extended").get<std::string>());
    if (extended.vocab_size() < base.vocab_size())
        throw tokx::InvalidArgument("extended tokenizer is smaller than the base");
    for (std::size_t i = 0; i < base.vocab_size(); ++i)
        if (extended.vocab()[i] != base.vocab()[i])
            throw tokx::InvalidArgument("extended tokenizer does not preserve base ids (mismatch at id " +
                                        std::to_string(i) + ")");

    tokx::vocab::ExtensionReport report;
    report.base_size = static_cast<std::int64_t>(base.vocab_size());
    report.extended_size = static_cast<std::int64_t>(extended.vocab_size());
    report.new_ids_begin = report.base_size;
    report.candidates_in = report.extended_size - report.base_size;

    std::string policy = params.value("policy", "mean");
    tokx::vocab::ResizePlan plan = tokx::vocab::plan_resize(
        report, base, extended, params.at("embed_dim").get<std::int64_t>(),
        policy == "mean" ? tokx::vocab::InitPolicy::MeanOfSubtokens : tokx::vocab::InitPolicy::SmallRandom,
        params.value("sigma", 0.02));
    write_json_file(out_dir / "resize_plan.json", plan.to_json());
    write_manifest(params, "resize-plan");
    std::cout << "resize plan: (" << plan.old_shape[0] << "," << plan.old_shape[1] << ") -> ("
              << plan.new_shape[0] << "," << plan.new_shape[1] << ")\n";
}

void run_rope_probe(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    tokx::rope::RopeConfig cfg;
    cfg.head_dim = params.value("head_dim", 128);
    cfg.base = params.value("theta", 10000.0);
    cfg.max_context = params.value("max_context", std::int64_t{8192});
    if (params.contains("window")) cfg.sliding_window = params.at("window").get<std::int64_t>();
    cfg.validate();

    const std::uint64_t seed = params.value("seed", std::uint64_t{0});
    const int trials = params.value("trials", 1000);
    tokx::Rng rng(seed);
    std::vector<double> freqs = tokx::rope::rope_frequencies(cfg);

    bool freq_monotone = true;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] <= 0.0 || freqs[i] > 1.0) freq_monotone = false;
        if (i > 0 && freqs[i] >= freqs[i - 1]) freq_monotone = false;
    }

    tokx::Rng norm_rng = rng.derive("norm");
    double max_norm_err = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> v(static_cast<std::size_t>(cfg.head_dim));
        for (double &x : v) x = norm_rng.uniform(-1.0, 1.0);
        std::int64_t pos = static_cast<std::int64_t>(norm_rng.below(1u << 20));
        std::vector<double> r = tokx::rope::apply_rope(v, pos, freqs);
        double n0 = 0.0, n1 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            n0 += v[i] * v[i];
            n1 += r[i] * r[i];
        }
        max_norm_err = std::max(max_norm_err, std::abs(std::sqrt(n1) - std::sqrt(n0)) / std::sqrt(n0));
    }

    tokx::Rng off_rng = rng.derive("offset");
    double max_offset_err = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> q(static_cast<std::size_t>(cfg.head_dim)), k(q.size());
        for (double &x : q) x = off_rng.uniform(-1.0, 1.0);
        for (double &x : k) x = off_rng.uniform(-1.0, 1.0);
        std::int64_t delta = static_cast<std::int64_t>(off_rng.below(4096));
        std::int64_t p1 = static_cast<std::int64_t>(off_rng.below(1u << 16));
        std::int64_t p2 = static_cast<std::int64_t>(off_rng.below(1u << 16));
        auto score = [&](std::int64_t p) {
            std::vector<double> rq = tokx::rope::apply_rope(q, p + delta, freqs);
            std::vector<double> rk = tokx::rope::apply_rope(k, p, freqs);
            double dot = 0.0;
            for (std::size_t i = 0; i < rq.size(); ++i) dot += rq[i] * rk[i];
            return dot;
        };
        max_offset_err = std::max(max_offset_err, std::abs(score(p1) - score(p2)));
    }

    // Sliding-window mask: exhaustive over short sequences.
    bool mask_ok = true;
    for (int n = 1; n <= 16 && mask_ok; ++n) {
        for (std::int64_t w = 1; w <= n + 1 && mask_ok; ++w) {
            tokx::rope::RopeConfig mc = cfg;
            mc.max_context = std::max<std::int64_t>(mc.max_context, n);
            mc.sliding_window = std::min<std::int64_t>(w, mc.max_context);
            tokx::rope::AttentionProbe probe;
            for (int i = 0; i < n; ++i) {
                std::vector<double> unit(static_cast<std::size_t>(cfg.head_dim), 0.0);
                unit[0] = 1.0;
                probe.queries.push_back(unit);
                probe.keys.push_back(unit);
                probe.positions.push_back(i);
            }
            auto scores = tokx::rope::attention_scores(probe, mc);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    bool finite = std::isfinite(scores[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    bool expected = j <= i && (i - j) < *mc.sliding_window;
                    if (finite != expected) mask_ok = false;
                }
        }
    }

    json report{{"config", cfg.to_json()},
                {"frequencies", freqs},
                {"checks",
                 {{"frequency_monotone", freq_monotone},
                  {"norm_preservation_max_rel_err", max_norm_err},
                  {"norm_preservation_pass", max_norm_err <= 1e-9},
                  {"offset_invariance_max_abs_err", max_offset_err},
                  {"offset_invariance_pass", max_offset_err <= 1e-6},
                  {"window_mask_exhaustive_pass", mask_ok},
                  {"trials", trials}}}};

    if (params.contains("target_context")) {
        tokx::rope::BaseChange method;
        std::string method_name = params.value("method", "fixed");
        if (method_name == "ntk-scale") {
            method.method = tokx::rope::BaseChange::Method::NtkScale;
        } else if (method_name == "fixed") {
            method.method = tokx::rope::BaseChange::Method::Fixed;
            method.fixed_theta = params.value("theta_prime", 1000000.0);
        } else {
            throw tokx::InvalidArgument("unknown base-change method: " + method_name);
        }
        tokx::rope::RopeConfig changed =
            tokx::rope::base_change(cfg, params.at("target_context").get<std::int64_t>(), method);
        report["base_change"] = {{"method", method_name}, {"result", changed.to_json()}};
    }

    std::cout << report.dump(2) << "\n";
    write_json_file(out_dir / "rope_probe.json", report);
    write_manifest(params, "rope-probe");
}

void run_gen_passkey(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    tokx::bpe::Tokenizer tokenizer = tokx::bpe::Tokenizer::load(params.at("tokenizer").get<std::string>());
    tokx::bench::PasskeyConfig cfg;
    cfg.lengths = params.at("lengths").get<std::vector<std::int64_t>>();
    cfg.bins = params.value("bins", 16);
    cfg.per_bin = params.value("per_bin", 20);
    cfg.seed = params.value("seed", std::uint64_t{0});
    cfg.jobs = params.value("jobs", 1);
    cfg.filler_lang = params.value("filler_lang", std::string("en")) == "zh"
                          ? tokx::bench::FillerLang::Chinese
                          : tokx::bench::FillerLang::English;
    std::vector<tokx::bench::PasskeyCase> cases = tokx::bench::gen_passkey_suite(cfg, tokenizer);

    fs::path out = out_dir / params.value("out", "passkey_suite.jsonl");
    tokx::bench::write_jsonl(cases, out.string(), tokx::bench::passkey_case_to_json);
    write_manifest(params, "gen-passkey");
    std::cout << "wrote " << cases.size() << " cases -> " << out.string() << "\n";
}

void run_gen_longqa(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    std::vector<tokx::bench::QaItem> items;
    tokx::bench::read_jsonl(params.at("source").get<std::string>(), [&](const json &j) {
        items.push_back({j.at("context").get<std::string>(), j.at("question").get<std::string>(),
                         j.at("answer").get<std::string>()});
    });
    std::vector<tokx::bench::LongQaCase> cases = tokx::bench::gen_longqa(
        items, params.at("target_chars").get<std::int64_t>(), params.value("seed", std::uint64_t{0}));

    fs::path out = out_dir / params.value("out", "longqa_suite.jsonl");
    tokx::bench::write_jsonl(cases, out.string(), tokx::bench::longqa_case_to_json);
    write_manifest(params, "gen-longqa");
    std::cout << "wrote " << cases.size() << " cases -> " << out.string() << "\n";
}

void run_score(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    const std::string task = params.at("task").get<std::string>();

    if (task == "passkey") {
        std::vector<tokx::bench::PasskeyCase> cases;
        tokx::bench::read_jsonl(params.at("suite").get<std::string>(), [&](const json &j) {
            cases.push_back(tokx::bench::passkey_case_from_json(j));
        });

        std::map<std::string, std::string> predictions;
        std::optional<tokx::bpe::Tokenizer> tokenizer;
        if (params.contains("predictions")) {
            tokx::bench::read_jsonl(params.at("predictions").get<std::string>(), [&](const json &j) {
                predictions[j.at("id").get<std::string>()] = j.at("prediction").get<std::string>();
            });
        } else if (params.contains("adapter")) {
            if (params.contains("tokenizer"))
                tokenizer = tokx::bpe::Tokenizer::load(params.at("tokenizer").get<std::string>());
            auto adapter = make_adapter(params.at("adapter").get<std::string>(), params,
                                        tokenizer ? &*tokenizer : nullptr);
            for (const auto &c : cases)
                predictions[c.id] = adapter->generate({c.context, 32, 0.0});
        } else {
            throw tokx::InvalidArgument("score needs --predictions or --adapter");
        }

        std::vector<tokx::bench::PasskeyOutcome> outcomes;
        json outcome_rows = json::array();
        for (const auto &c : cases) {
            auto it = predictions.find(c.id);
            if (it == predictions.end()) throw tokx::InvalidArgument("missing prediction for case " + c.id);
            tokx::bench::PasskeyOutcome o = tokx::bench::score_passkey(c, it->second);
            outcomes.push_back(o);
            outcome_rows.push_back({{"id", c.id}, {"outcome", tokx::bench::to_string(o)}});
        }
        int per_bin = params.value("per_bin", 20);
        int bins = params.value("bins", 16);
        tokx::bench::GridResult grid = tokx::bench::aggregate_grid(cases, outcomes, bins, per_bin);

        write_text(out_dir / "outcomes.jsonl", [&] {
            std::string s;
            for (const auto &row : outcome_rows) s += row.dump() + "\n";
            return s;
        }());
        write_text(out_dir / "grid.csv", tokx::bench::grid_to_csv(grid));
        write_json_file(out_dir / "grid.json", tokx::bench::grid_to_json(grid));
        write_text(out_dir / "heatmap.ppm", tokx::bench::grid_to_ppm(grid));
        write_manifest(params, "score");
        std::cout << "scored " << cases.size() << " passkey cases\n";
        return;
    }

    if (task == "em") {
        struct Row {
            std::string id, gold;
        };
        std::vector<Row> rows;
        tokx::bench::read_jsonl(params.at("suite").get<std::string>(), [&](const json &j) {
            rows.push_back({j.at("id").get<std::string>(), j.at("answer").get<std::string>()});
        });
        std::map<std::string, std::string> predictions;
        tokx::bench::read_jsonl(params.at("predictions").get<std::string>(), [&](const json &j) {
            predictions[j.at("id").get<std::string>()] = j.at("prediction").get<std::string>();
        });
        std::int64_t correct = 0;
        json per_case = json::array();
        for (const Row &r : rows) {
            auto it = predictions.find(r.id);
            if (it == predictions.end()) throw tokx::InvalidArgument("missing prediction for case " + r.id);
            int em = tokx::bench::score_em(it->second, r.gold);
            correct += em;
            per_case.push_back({{"id", r.id}, {"em", em}});
        }
        double em_score = rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
        write_json_file(out_dir / "em_report.json",
                        {{"em", em_score}, {"correct", correct}, {"total", rows.size()}, {"cases", per_case}});
        write_manifest(params, "score");
        std::cout << "EM " << em_score << " (" << correct << "/" << rows.size() << ")\n";
        return;
    }
    throw tokx::InvalidArgument("unknown score task: " + task);
}

void run_eval_mc(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    std::vector<tokx::eval::McItem> items;
    tokx::bench::read_jsonl(params.at("dataset").get<std::string>(), [&](const json &j) {
        items.push_back({j.at("question").get<std::string>(),
                         j.at("choices").get<std::vector<std::string>>(),
                         j.at("answer").get<std::string>()});
    });

    tokx::eval::FewShotSpec spec;
    spec.tmpl = tokx::eval::PromptTemplate::MultipleChoice;
    if (params.contains("demos")) {
        tokx::bench::read_jsonl(params.at("demos").get<std::string>(), [&](const json &j) {
            spec.mc_demonstrations.push_back({j.at("question").get<std::string>(),
                                              j.at("choices").get<std::vector<std::string>>(),
                                              j.at("answer").get<std::string>()});
        });
    }
    spec.shots = params.value("shots", static_cast<int>(spec.mc_demonstrations.size()));
    if (spec.shots != static_cast<int>(spec.mc_demonstrations.size()))
        throw tokx::InvalidArgument("--shots must match the number of demonstrations");

    std::string adapter_spec = params.at("adapter").get<std::string>();
    std::unique_ptr<tokx::eval::ModelAdapter> adapter;
    if (adapter_spec == "echo-gold") {
        auto echo = std::make_unique<tokx::eval::EchoGoldAdapter>();
        for (const auto &item : items) echo->add(item.question, item.answer);
        adapter = std::move(echo);
    } else {
        adapter = make_adapter(adapter_spec, params, nullptr);
    }

    tokx::eval::McReport report = tokx::eval::run_mc_eval(
        *adapter, items, spec, params.value("max_new_tokens", 8), params.value("jobs", 1));
    write_json_file(out_dir / "mc_report.json", report.to_json());
    write_manifest(params, "eval-mc");
    std::cout << "accuracy " << report.accuracy << " (" << report.correct << "/" << report.total
              << ", flagged " << report.flagged << ")\n";
}

void run_perplexity(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    tokx::bpe::Tokenizer tokenizer = tokx::bpe::Tokenizer::load(params.at("tokenizer").get<std::string>());
    std::vector<std::string> docs = tokx::corpus::load_corpus(source_from_params(params));
    auto adapter = make_adapter(params.at("adapter").get<std::string>(), params, &tokenizer);
    tokx::eval::PplResult result = tokx::eval::perplexity(*adapter, docs, tokenizer);
    write_json_file(out_dir / "perplexity.json",
                    {{"ppl", result.ppl}, {"token_count", result.token_count}, {"doc_count", result.doc_count}});
    write_manifest(params, "perplexity");
    std::cout << "ppl " << result.ppl << " over " << result.token_count << " tokens\n";
}

void run_judge_render(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    std::string question = params.at("question").get<std::string>();
    std::string answer = params.at("answer").get<std::string>();
    std::string prompt = tokx::eval::render_judge_prompt(question, answer);
    fs::path out = out_dir / params.value("out", "judge_prompt.txt");
    write_text(out, prompt);
    write_manifest(params, "judge-render");
    std::cout << prompt << "\n";
}

void run_aggregate(const json &params) {
    fs::path out_dir = ensure_out_dir(params);
    const bool parse_ratings = params.value("parse_ratings", false);
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> by_category;
    std::int64_t unparsed = 0;
    tokx::bench::read_jsonl(params.at("scores").get<std::string>(), [&](const json &j) {
        std::string category = j.at("category").get<std::string>();
        std::optional<double> score;
        if (parse_ratings) {
            if (auto rating = tokx::eval::parse_rating(j.at("judge_output").get<std::string>()))
                score = static_cast<double>(*rating);
            else
                ++unparsed;
        } else {
            score = j.at("score").get<double>();
        }
        if (!by_category.count(category)) order.push_back(category);
        auto &bucket = by_category[category];
        if (score) bucket.push_back(*score);
    });

    std::vector<tokx::eval::CategoryScores> groups;
    for (const std::string &name : order) groups.push_back({name, by_category[name]});
    tokx::eval::CategoryAverages averages = tokx::eval::aggregate_categories(groups);

    const int places = params.value("places", 2);
    json display = json::array();
    for (const auto &[name, avg] : averages.per_category)
        display.push_back({{"category", name}, {"average", tokx::eval::display_round(avg, places)}});
    json out = averages.to_json();
    out["display"] = {{"places", places},
                      {"categories", display},
                      {"overall", tokx::eval::display_round(averages.overall, places)}};
    out["unparsed"] = unparsed;
    write_json_file(out_dir / "aggregate.json", out);
    write_manifest(params, "aggregate");
    std::cout << "overall " << averages.overall << " over " << averages.per_category.size()
              << " categories\n";
}

void dispatch(const std::string &subcommand, const json &params);

void run_rerun(const json &params) {
    tokx::Manifest m = tokx::Manifest::load(params.at("manifest").get<std::string>());
    json replay = m.params;
    if (params.contains("out_dir")) replay["out_dir"] = params.at("out_dir");
    dispatch(m.subcommand, replay);
}

void dispatch(const std::string &subcommand, const json &params) {
    if (subcommand == "train-bpe") return run_train_bpe(params);
    if (subcommand == "extend-vocab") return run_extend_vocab(params);
    if (subcommand == "measure-compression") return run_measure_compression(params);
    if (subcommand == "resize-plan") return run_resize_plan(params);
    if (subcommand == "rope-probe") return run_rope_probe(params);
    if (subcommand == "gen-passkey") return run_gen_passkey(params);
    if (subcommand == "gen-longqa") return run_gen_longqa(params);
    if (subcommand == "score") return run_score(params);
    if (subcommand == "eval-mc") return run_eval_mc(params);
    if (subcommand == "perplexity") return run_perplexity(params);
    if (subcommand == "judge-render") return run_judge_render(params);
    if (subcommand == "aggregate") return run_aggregate(params);
    if (subcommand == "rerun") return run_rerun(params);
    throw tokx::InvalidArgument("unknown subcommand: " + subcommand);
}

// JSON config files mirroring the flags; flags take precedence.
class ConfigJson : public CLI::Config {
  public:
    std::string to_config(const CLI::App *, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
        json j;
        input >> j;
        return walk(j, "", {});
    }

  private:
    static std::vector<CLI::ConfigItem> walk(const json &j, const std::string &name,
                                             std::vector<std::string> prefix) {
        std::vector<CLI::ConfigItem> results;
        if (j.is_object()) {
            if (!name.empty()) prefix.push_back(name);
            for (auto it = j.cbegin(); it != j.cend(); ++it) {
                auto sub = walk(it.value(), it.key(), prefix);
                results.insert(results.end(), sub.begin(), sub.end());
            }
            return results;
        }
        if (name.empty()) throw CLI::ConversionError("config file must be a JSON object");
        CLI::ConfigItem item;
        item.name = name;
        item.parents = std::move(prefix);
        if (j.is_boolean()) {
            item.inputs = {j.get<bool>() ? "true" : "false"};
        } else if (j.is_number_unsigned()) {
            item.inputs = {std::to_string(j.get<std::uint64_t>())};
        } else if (j.is_number_integer()) {
            item.inputs = {std::to_string(j.get<std::int64_t>())};
        } else if (j.is_number_float()) {
            std::ostringstream ss;
            ss.precision(17);
            ss << j.get<double>();
            item.inputs = {ss.str()};
        } else if (j.is_string()) {
            item.inputs = {j.get<std::string>()};
        } else if (j.is_array()) {
            for (const auto &el : j)
                item.inputs.push_back(el.is_string() ? el.get<std::string>() : el.dump());
        } else {
            throw CLI::ConversionError("unsupported config value for " + name);
        }
        results.push_back(std::move(item));
        return results;
    }
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"tokenizer extension and long-context evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config")->description("JSON config mirroring the flags; flags take precedence");
    app.config_formatter(std::make_shared<ConfigJson>());

    // Values shared across subcommands; each handler reads what it needs
    // from the params json assembled below.
    struct {
        std::vector<std::string> corpus, lengths;
        std::string base, candidate, extended, tokenizer, suite, predictions, dataset, demos, source,
            manifest, adapter, endpoint, out, out_dir = ".", doc_separator = "\\n\\n", task, policy = "mean",
            method = "fixed", filler_lang = "en", question, answer;
        std::int64_t new_tokens = 0, context_tokens = 0, target_chars = 0, target_context = 0,
                     max_context = 8192, window = 0, embed_dim = 0;
        std::uint64_t seed = 0;
        int jobs = 1, bins = 16, per_bin = 20, shots = 0, max_new_tokens = 8, trials = 1000,
            head_dim = 128, max_token_chars = 16, places = 2;
        std::int64_t min_pair_count = 2;
        double theta = 10000.0, theta_prime = 1000000.0, sigma = 0.02;
        bool byte_fallback = true, pre_split_whitespace = false, nfc = false, parse_ratings = false;
    } opt;

    auto add_corpus = [&](CLI::App *cmd) {
        cmd->add_option("--corpus", opt.corpus, "corpus files or glob patterns")->required();
        cmd->add_option("--doc-separator", opt.doc_separator, "document separator (escapes allowed)");
        cmd->add_flag("--nfc", opt.nfc, "apply NFC normalization to input text");
    };
    auto add_out_dir = [&](CLI::App *cmd) {
        cmd->add_option("--out-dir", opt.out_dir, "directory for artifacts and the manifest");
    };

    CLI::App *train = app.add_subcommand("train-bpe", "train BPE merges on a corpus");
    add_corpus(train);
    add_out_dir(train);
    train->add_option("--new-tokens", opt.new_tokens, "number of merges to learn")->required();
    train->add_option("--out", opt.out, "tokenizer file name (within --out-dir)");
    train->add_flag("--byte-fallback,!--no-byte-fallback", opt.byte_fallback, "include byte fallback tokens");
    train->add_flag("--pre-split-whitespace", opt.pre_split_whitespace, "never merge across whitespace");
    train->add_option("--max-token-chars", opt.max_token_chars, "skip merges above this piece length");
    train->add_option("--min-pair-count", opt.min_pair_count, "minimum pair frequency to merge");

    CLI::App *extend = app.add_subcommand("extend-vocab", "merge a candidate tokenizer into a base");
    add_out_dir(extend);
    extend->add_option("--base", opt.base, "base tokenizer JSON")->required();
    extend->add_option("--candidate", opt.candidate, "candidate tokenizer JSON")->required();
    extend->add_option("--out", opt.out, "extended tokenizer file name");

    CLI::App *compress = app.add_subcommand("measure-compression", "token counts under two tokenizers");
    add_corpus(compress);
    add_out_dir(compress);
    compress->add_option("--base", opt.base)->required();
    compress->add_option("--extended", opt.extended)->required();
    compress->add_option("--context-tokens", opt.context_tokens, "also report effective context length");
    compress->add_option("--jobs", opt.jobs);

    CLI::App *resize = app.add_subcommand("resize-plan", "plan the embedding resize for an extension");
    add_out_dir(resize);
    resize->add_option("--base", opt.base)->required();
    resize->add_option("--extended", opt.extended)->required();
    resize->add_option("--embed-dim", opt.embed_dim)->required();
    resize->add_option("--policy", opt.policy, "mean | random");
    resize->add_option("--sigma", opt.sigma, "stddev for the random policy");

    CLI::App *rope = app.add_subcommand("rope-probe", "rotary embedding invariant checks");
    add_out_dir(rope);
    rope->add_option("--head-dim", opt.head_dim);
    rope->add_option("--theta", opt.theta, "rotary base");
    rope->add_option("--max-context", opt.max_context);
    rope->add_option("--window", opt.window, "sliding window size");
    rope->add_option("--target-context", opt.target_context, "run base_change to this context");
    rope->add_option("--method", opt.method, "fixed | ntk-scale");
    rope->add_option("--theta-prime", opt.theta_prime, "new base for the fixed method");
    rope->add_option("--trials", opt.trials);
    rope->add_option("--seed", opt.seed);

    CLI::App *passkey = app.add_subcommand("gen-passkey", "synthesize a passkey retrieval suite");
    add_out_dir(passkey);
    passkey->add_option("--tokenizer", opt.tokenizer, "tokenizer defining token lengths")->required();
    passkey->add_option("--lengths", opt.lengths, "context lengths in tokens")->delimiter(',');
    passkey->add_option("--bins", opt.bins);
    passkey->add_option("--per-bin", opt.per_bin);
    passkey->add_option("--seed", opt.seed);
    passkey->add_option("--filler-lang", opt.filler_lang, "en | zh");
    passkey->add_option("--jobs", opt.jobs);
    passkey->add_option("--out", opt.out, "suite file name");

    CLI::App *longqa = app.add_subcommand("gen-longqa", "pack QA contexts to a target length");
    add_out_dir(longqa);
    longqa->add_option("--source", opt.source, "JSONL of {context,question,answer}")->required();
    longqa->add_option("--target-chars", opt.target_chars)->required();
    longqa->add_option("--seed", opt.seed);
    longqa->add_option("--out", opt.out, "suite file name");

    CLI::App *score = app.add_subcommand("score", "score predictions against a suite");
    add_out_dir(score);
    score->add_option("--task", opt.task, "passkey | em")->required();
    score->add_option("--suite", opt.suite)->required();
    score->add_option("--predictions", opt.predictions, "JSONL of {id,prediction}");
    score->add_option("--adapter", opt.adapter, "generate predictions with a reference adapter");
    score->add_option("--tokenizer", opt.tokenizer, "needed by windowed adapters");
    score->add_option("--bins", opt.bins);
    score->add_option("--per-bin", opt.per_bin);

    CLI::App *mc = app.add_subcommand("eval-mc", "few-shot multiple-choice evaluation");
    add_out_dir(mc);
    mc->add_option("--dataset", opt.dataset, "JSONL of {question,choices,answer}")->required();
    mc->add_option("--demos", opt.demos, "JSONL of demonstration items");
    mc->add_option("--shots", opt.shots);
    mc->add_option("--adapter", opt.adapter, "echo-gold | fixed:<text> | http")->required();
    mc->add_option("--endpoint", opt.endpoint);
    mc->add_option("--max-new-tokens", opt.max_new_tokens);
    mc->add_option("--jobs", opt.jobs);

    CLI::App *ppl = app.add_subcommand("perplexity", "corpus perplexity through a scoring adapter");
    add_corpus(ppl);
    add_out_dir(ppl);
    ppl->add_option("--tokenizer", opt.tokenizer)->required();
    ppl->add_option("--adapter", opt.adapter, "uniform:<V> | http")->required();
    ppl->add_option("--endpoint", opt.endpoint);

    CLI::App *judge = app.add_subcommand("judge-render", "render the LLM-judge prompt");
    add_out_dir(judge);
    judge->add_option("--question", opt.question)->required();
    judge->add_option("--answer", opt.answer)->required();
    judge->add_option("--out", opt.out, "prompt file name");

    CLI::App *agg = app.add_subcommand("aggregate", "category averages and overall mean");
    add_out_dir(agg);
    agg->add_option("--scores", opt.source, "JSONL of {category,score} or {category,judge_output}")
        ->required();
    agg->add_flag("--parse-ratings", opt.parse_ratings, "scores are raw judge outputs");
    agg->add_option("--places", opt.places, "display rounding decimals");

    CLI::App *rerun = app.add_subcommand("rerun", "replay a run from its manifest");
    rerun->add_option("--manifest", opt.manifest)->required();
    rerun->add_option("--out-dir", opt.out_dir, "redirect artifacts");

    CLI11_PARSE(app, argc, argv);

    CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    json params;
    params["out_dir"] = opt.out_dir;
    auto set_if = [&](const char *key, const CLI::App *cmd, const char *flag, const json &value) {
        if (cmd->count(flag) > 0) params[key] = value;
    };

    try {
        if (name == "train-bpe") {
            params["corpus"] = opt.corpus;
            params["doc_separator"] = opt.doc_separator;
            params["nfc"] = opt.nfc;
            params["new_tokens"] = opt.new_tokens;
            params["byte_fallback"] = opt.byte_fallback;
            params["pre_split_whitespace"] = opt.pre_split_whitespace;
            params["max_token_chars"] = opt.max_token_chars;
            params["min_pair_count"] = opt.min_pair_count;
            set_if("out", train, "--out", opt.out);
        } else if (name == "extend-vocab") {
            params["base"] = opt.base;
            params["candidate"] = opt.candidate;
            set_if("out", extend, "--out", opt.out);
        } else if (name == "measure-compression") {
            params["corpus"] = opt.corpus;
            params["doc_separator"] = opt.doc_separator;
            params["nfc"] = opt.nfc;
            params["base"] = opt.base;
            params["extended"] = opt.extended;
            params["jobs"] = opt.jobs;
            set_if("context_tokens", compress, "--context-tokens", opt.context_tokens);
        } else if (name == "resize-plan") {
            params["base"] = opt.base;
            params["extended"] = opt.extended;
            params["embed_dim"] = opt.embed_dim;
            params["policy"] = opt.policy;
            params["sigma"] = opt.sigma;
        } else if (name == "rope-probe") {
            params["head_dim"] = opt.head_dim;
            params["theta"] = opt.theta;
            params["max_context"] = opt.max_context;
            params["trials"] = opt.trials;
            params["seed"] = opt.seed;
            params["method"] = opt.method;
            params["theta_prime"] = opt.theta_prime;
            set_if("window", rope, "--window", opt.window);
            set_if("target_context", rope, "--target-context", opt.target_context);
        } else if (name == "gen-passkey") {
            params["tokenizer"] = opt.tokenizer;
            std::vector<std::int64_t> lengths;
            for (const std::string &l : opt.lengths) lengths.push_back(std::stoll(l));
            if (lengths.empty()) lengths = {4096, 8192, 16384, 24576, 32768};
            params["lengths"] = lengths;
            params["bins"] = opt.bins;
            params["per_bin"] = opt.per_bin;
            params["seed"] = opt.seed;
            params["filler_lang"] = opt.filler_lang;
            params["jobs"] = opt.jobs;
            set_if("out", passkey, "--out", opt.out);
        } else if (name == "gen-longqa") {
            params["source"] = opt.source;
            params["target_chars"] = opt.target_chars;
            params["seed"] = opt.seed;
            set_if("out", longqa, "--out", opt.out);
        } else if (name == "score") {
            params["task"] = opt.task;
            params["suite"] = opt.suite;
            params["bins"] = opt.bins;
            params["per_bin"] = opt.per_bin;
            set_if("predictions", score, "--predictions", opt.predictions);
            set_if("adapter", score, "--adapter", opt.adapter);
            set_if("tokenizer", score, "--tokenizer", opt.tokenizer);
        } else if (name == "eval-mc") {
            params["dataset"] = opt.dataset;
            params["adapter"] = opt.adapter;
            params["max_new_tokens"] = opt.max_new_tokens;
            params["jobs"] = opt.jobs;
            set_if("demos", mc, "--demos", opt.demos);
            if (mc->count("--shots") > 0) params["shots"] = opt.shots;
            set_if("endpoint", mc, "--endpoint", opt.endpoint);
        } else if (name == "perplexity") {
            params["corpus"] = opt.corpus;
            params["doc_separator"] = opt.doc_separator;
            params["nfc"] = opt.nfc;
            params["tokenizer"] = opt.tokenizer;
            params["adapter"] = opt.adapter;
            set_if("endpoint", ppl, "--endpoint", opt.endpoint);
        } else if (name == "judge-render") {
            params["question"] = opt.question;
            params["answer"] = opt.answer;
            set_if("out", judge, "--out", opt.out);
        } else if (name == "aggregate") {
            params["scores"] = opt.source;
            params["parse_ratings"] = opt.parse_ratings;
            params["places"] = opt.places;
        } else if (name == "rerun") {
            params["manifest"] = opt.manifest;
            if (rerun->count("--out-dir") == 0) params.erase("out_dir");
        }

        dispatch(name, params);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
