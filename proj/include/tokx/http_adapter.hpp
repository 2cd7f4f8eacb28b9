#pragma once

// Split from adapters.hpp so that translation units without remote-model
// needs do not pay for the httplib include.

#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tokx/adapters.hpp"
#include "tokx/common.hpp"
#include "tokx/eval.hpp"

namespace tokx::eval {

// JSON-over-HTTP model adapter.
//   POST /generate  {"prompt","max_new_tokens","temperature"} -> {"completion"}
//   POST /score     {"token_ids":[...]}                      -> {"nll":[...]}
// The bearer token comes from configuration or TOKX_ADAPTER_TOKEN; it is
// never hard-coded.
class HttpAdapter : public ModelAdapter {
  public:
    explicit HttpAdapter(const std::string &endpoint, std::string auth_token = "")
        : client_(endpoint), auth_token_(std::move(auth_token)) {
        client_.set_connection_timeout(10);
        client_.set_read_timeout(120);
    }

    std::string generate(const GenerationRequest &request) override {
        nlohmann::json body{{"prompt", request.prompt},
                            {"max_new_tokens", request.max_new_tokens},
                            {"temperature", request.temperature}};
        nlohmann::json reply = post("/generate", body);
        return reply.at("completion").get<std::string>();
    }

    bool supports_scoring() const override { return true; }

    std::vector<long double> token_nll(std::span<const bpe::TokenId> ids) override {
        nlohmann::json body{{"token_ids", std::vector<bpe::TokenId>(ids.begin(), ids.end())}};
        nlohmann::json reply = post("/score", body);
        std::vector<double> nll = reply.at("nll").get<std::vector<double>>();
        return {nll.begin(), nll.end()};
    }

  private:
    nlohmann::json post(const std::string &path, const nlohmann::json &body) {
        httplib::Headers headers;
        if (!auth_token_.empty()) headers.emplace("Authorization", "Bearer " + auth_token_);
        auto res = client_.Post(path, headers, body.dump(), "application/json");
        if (!res) throw IoError("adapter endpoint unreachable: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw IoError("adapter returned HTTP " + std::to_string(res->status) + " for " + path);
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception &e) {
            throw IoError(std::string("adapter returned malformed JSON: ") + e.what());
        }
    }

    httplib::Client client_;
    std::string auth_token_;
};

} // namespace tokx::eval
