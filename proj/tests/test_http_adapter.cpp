#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <thread>

#include <filesystem>
#include <fstream>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tokx/eval.hpp"
#include "tokx/http_adapter.hpp"
#include "tokx/tokenizer.hpp"

using namespace tokx;
using nlohmann::json;

namespace {

// In-process server implementing the adapter wire contract.
class ContractServer {
  public:
    ContractServer() {
        server_.Post("/generate", [this](const httplib::Request &req, httplib::Response &res) {
            last_auth_ = req.get_header_value("Authorization");
            json body = json::parse(req.body);
            std::string prompt = body.at("prompt").get<std::string>();
            json reply{{"completion", "echo:" + prompt.substr(0, 16)}};
            res.set_content(reply.dump(), "application/json");
        });
        server_.Post("/score", [this](const httplib::Request &req, httplib::Response &res) {
            last_auth_ = req.get_header_value("Authorization");
            json body = json::parse(req.body);
            auto ids = body.at("token_ids").get<std::vector<int>>();
            std::vector<double> nll(ids.size(), std::log(32.0));
            res.set_content(json{{"nll", nll}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~ContractServer() {
        server_.stop();
        thread_.join();
    }
    int port() const { return port_; }
    std::string last_auth() const { return last_auth_; }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string last_auth_;
};

} // namespace

TEST_CASE("http adapter speaks the generate contract") {
    ContractServer server;
    eval::HttpAdapter adapter("http://127.0.0.1:" + std::to_string(server.port()));
    std::string completion = adapter.generate({"hello world prompt", 16, 0.0});
    CHECK(completion == "echo:hello world prom");
    CHECK(server.last_auth().empty());
}

TEST_CASE("http adapter speaks the scoring contract") {
    ContractServer server;
    eval::HttpAdapter adapter("http://127.0.0.1:" + std::to_string(server.port()));
    REQUIRE(adapter.supports_scoring());
    std::vector<bpe::TokenId> ids{1, 2, 3, 4};
    auto nll = adapter.token_nll(ids);
    REQUIRE(nll.size() == 4);
    for (long double v : nll) CHECK(static_cast<double>(v) == Catch::Approx(std::log(32.0)));
}

TEST_CASE("auth token is sent as a bearer header") {
    ContractServer server;
    eval::HttpAdapter adapter("http://127.0.0.1:" + std::to_string(server.port()), "sekrit");
    adapter.generate({"x", 1, 0.0});
    CHECK(server.last_auth() == "Bearer sekrit");
}

TEST_CASE("unreachable endpoint raises an io error") {
    eval::HttpAdapter adapter("http://127.0.0.1:1"); // nothing listens there
    CHECK_THROWS_AS(adapter.generate({"x", 1, 0.0}), IoError);
}

namespace {

// Answers every generation request with "A" and records request shapes.
class FixedAServer {
  public:
    FixedAServer() {
        server_.Post("/generate", [this](const httplib::Request &req, httplib::Response &res) {
            last_auth_ = req.get_header_value("Authorization");
            json body = json::parse(req.body);
            fields_ok_ = body.contains("prompt") && body.contains("max_new_tokens") &&
                         body.contains("temperature");
            res.set_content(json{{"completion", "A"}}.dump(), "application/json");
        });
        server_.Post("/score", [this](const httplib::Request &req, httplib::Response &res) {
            last_auth_ = req.get_header_value("Authorization");
            json body = json::parse(req.body);
            std::vector<double> nll(body.at("token_ids").size(), std::log(2.0));
            res.set_content(json{{"nll", nll}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FixedAServer() {
        server_.stop();
        thread_.join();
    }
    int port() const { return port_; }
    std::string last_auth() const { return last_auth_; }
    bool fields_ok() const { return fields_ok_; }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string last_auth_;
    bool fields_ok_ = false;
};

int run_cli_here(const std::string &args) {
    std::string cmd = std::string(TOKX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("cli drives a remote adapter with the bearer token from the environment") {
    FixedAServer server;
    std::string endpoint = "http://127.0.0.1:" + std::to_string(server.port());

    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "tokx-cli-http";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    // all-gold-A dataset: the fixed-A server should score 1.0
    {
        std::ofstream out(tmp / "mc.jsonl");
        for (int i = 0; i < 4; ++i)
            out << json{{"question", "only q" + std::to_string(i)},
                        {"choices", {"w", "x", "y", "z"}},
                        {"answer", "A"}}
                       .dump()
                << "\n";
    }
    setenv("TOKX_ADAPTER_TOKEN", "cli-token", 1);
    int rc = run_cli_here("eval-mc --dataset " + (tmp / "mc.jsonl").string() +
                          " --adapter http --endpoint " + endpoint + " --out-dir " + (tmp / "mc").string());
    unsetenv("TOKX_ADAPTER_TOKEN");
    REQUIRE(rc == 0);
    json report = json::parse(std::ifstream((tmp / "mc" / "mc_report.json").string()));
    CHECK(report.at("accuracy") == 1.0);
    CHECK(server.last_auth() == "Bearer cli-token");
    CHECK(server.fields_ok());

    // perplexity through the scoring endpoint: constant log(2) NLL
    {
        std::ofstream out(tmp / "corpus.txt");
        out << "abab";
    }
    std::set<char32_t> alphabet{U'a', U'b'};
    tokx::bpe::Tokenizer::char_level(alphabet, false).save((tmp / "tok.json").string());
    rc = run_cli_here("perplexity --corpus " + (tmp / "corpus.txt").string() + " --tokenizer " +
                      (tmp / "tok.json").string() + " --adapter http --endpoint " + endpoint +
                      " --out-dir " + (tmp / "ppl").string());
    REQUIRE(rc == 0);
    json ppl = json::parse(std::ifstream((tmp / "ppl" / "perplexity.json").string()));
    CHECK(ppl.at("ppl").get<double>() == Catch::Approx(2.0).epsilon(1e-12));
    fs::remove_all(tmp);
}
