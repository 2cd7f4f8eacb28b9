#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"
#include "tokx/rng.hpp"

namespace tokx::rope {

struct RopeConfig {
    int head_dim = 128;
    double base = 10000.0;
    std::int64_t max_context = 8192;
    std::optional<std::int64_t> sliding_window;

    void validate() const {
        if (head_dim <= 0 || head_dim % 2 != 0) throw InvalidArgument("head_dim must be a positive even number");
        if (!(base > 1.0)) throw InvalidArgument("rope base must be > 1");
        if (max_context <= 0) throw InvalidArgument("max_context must be positive");
        if (sliding_window && (*sliding_window <= 0 || *sliding_window > max_context))
            throw InvalidArgument("sliding_window must be in (0, max_context]");
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"head_dim", head_dim}, {"base", base}, {"max_context", max_context}};
        j["sliding_window"] = sliding_window ? nlohmann::json(*sliding_window) : nlohmann::json(nullptr);
        return j;
    }

    static RopeConfig from_json(const nlohmann::json &j) {
        RopeConfig cfg;
        cfg.head_dim = j.at("head_dim").get<int>();
        cfg.base = j.at("base").get<double>();
        cfg.max_context = j.at("max_context").get<std::int64_t>();
        if (j.contains("sliding_window") && !j.at("sliding_window").is_null())
            cfg.sliding_window = j.at("sliding_window").get<std::int64_t>();
        cfg.validate();
        return cfg;
    }
};

// Angular frequency per 2-dim plane: base^(-2i/head_dim), strictly
// decreasing from 1.0.
inline std::vector<double> rope_frequencies(const RopeConfig &cfg) {
    cfg.validate();
    std::vector<double> freqs(static_cast<std::size_t>(cfg.head_dim / 2));
    for (std::size_t i = 0; i < freqs.size(); ++i)
        freqs[i] = std::pow(cfg.base, -2.0 * static_cast<double>(i) / static_cast<double>(cfg.head_dim));
    return freqs;
}

// Rotates each (2i, 2i+1) plane by position * freqs[i]. Norm-preserving;
// position 0 is the identity.
inline std::vector<double> apply_rope(std::span<const double> vec, std::int64_t position,
                                      std::span<const double> freqs) {
    if (vec.size() != freqs.size() * 2)
        throw InvalidArgument("vector length does not match head_dim implied by frequencies");
    std::vector<double> out(vec.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        double angle = static_cast<double>(position) * freqs[i];
        double c = std::cos(angle), s = std::sin(angle);
        double x = vec[2 * i], y = vec[2 * i + 1];
        out[2 * i] = x * c - y * s;
        out[2 * i + 1] = x * s + y * c;
    }
    return out;
}

// Query/key probe sequences at explicit positions. A test vehicle for
// positional geometry, not a model: no projections, no softmax.
struct AttentionProbe {
    std::vector<std::vector<double>> queries;
    std::vector<std::vector<double>> keys;
    std::vector<std::int64_t> positions;

    void validate(int head_dim) const {
        if (queries.size() != keys.size() || queries.size() != positions.size())
            throw InvalidArgument("probe sequences must have equal length");
        for (std::size_t i = 0; i < queries.size(); ++i) {
            if (queries[i].size() != static_cast<std::size_t>(head_dim) ||
                keys[i].size() != static_cast<std::size_t>(head_dim))
                throw InvalidArgument("probe vector dimension mismatch");
            if (i > 0 && positions[i] <= positions[i - 1])
                throw InvalidArgument("probe positions must be strictly increasing");
        }
    }
};

// score[i][j] = <rope(q_i, p_i), rope(k_j, p_j)> for attendable (i, j);
// -inf above the diagonal and outside the sliding window. Raw dot
// products by default; `scaled` divides by sqrt(head_dim).
inline std::vector<std::vector<double>> attention_scores(const AttentionProbe &probe, const RopeConfig &cfg,
                                                         bool scaled = false) {
    cfg.validate();
    probe.validate(cfg.head_dim);
    const std::vector<double> freqs = rope_frequencies(cfg);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const std::size_t n = probe.queries.size();

    std::vector<std::vector<double>> rotated_q(n), rotated_k(n);
    for (std::size_t i = 0; i < n; ++i) {
        rotated_q[i] = apply_rope(probe.queries[i], probe.positions[i], freqs);
        rotated_k[i] = apply_rope(probe.keys[i], probe.positions[i], freqs);
    }

    std::vector<std::vector<double>> scores(n, std::vector<double>(n, neg_inf));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            std::int64_t offset = probe.positions[i] - probe.positions[j];
            if (cfg.sliding_window && offset >= *cfg.sliding_window) continue;
            double dot = 0.0;
            for (std::size_t d = 0; d < rotated_q[i].size(); ++d) dot += rotated_q[i][d] * rotated_k[j][d];
            scores[i][j] = scaled ? dot / std::sqrt(static_cast<double>(cfg.head_dim)) : dot;
        }
    }
    return scores;
}

struct BaseChange {
    enum class Method { Fixed, NtkScale };
    Method method = Method::Fixed;
    double fixed_theta = 1000000.0; // used by Fixed
};

// Context extension by raising the rotary base. Clears the sliding
// window: long-context operation runs with the window off.
inline RopeConfig base_change(const RopeConfig &cfg, std::int64_t target_context, const BaseChange &method) {
    cfg.validate();
    if (target_context < cfg.max_context)
        throw InvalidArgument("target context must be >= current max_context");
    RopeConfig out = cfg;
    out.max_context = target_context;
    out.sliding_window.reset();
    if (method.method == BaseChange::Method::Fixed) {
        out.base = method.fixed_theta;
    } else {
        double s = static_cast<double>(target_context) / static_cast<double>(cfg.max_context);
        double d = static_cast<double>(cfg.head_dim);
        out.base = cfg.base * std::pow(s, d / (d - 2.0));
    }
    out.validate();
    return out;
}

} // namespace tokx::rope
