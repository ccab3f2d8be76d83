#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "agp/errors.hpp"
#include "agp/gateway.hpp"
#include "agp/http_backend.hpp"

using namespace agp;
using nlohmann::json;

namespace {

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

ChatRequest sample_request() {
    ChatRequest req;
    req.purpose = Purpose::rerank;
    req.messages = {{"system", "rank things"}, {"user", "candidates..."}};
    req.temperature = 0.0;
    req.max_tokens = 64;
    return req;
}

GatewayOptions instant_options(int retries = 2) {
    GatewayOptions opt;
    opt.retry.max_retries = retries;
    opt.sleeper = [](std::chrono::milliseconds) {};
    return opt;
}

}  // namespace

TEST_CASE("http backend speaks the chat-completion wire format") {
    json seen_body;
    std::string seen_auth;
    LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = json::parse(req.body);
        if (req.has_header("Authorization")) seen_auth = req.get_header_value("Authorization");
        json reply = {{"choices", {{{"message", {{"content", "RANKING: 1"}}}}}},
                      {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 2}}}};
        res.set_content(reply.dump(), "application/json");
    });

    setenv("AGP_TEST_KEY", "sk-test-credential", 1);
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "test-model";
    cfg.api_key_env = "AGP_TEST_KEY";
    HttpBackend backend(cfg);
    Gateway gw(backend, instant_options());

    auto resp = gw.complete(sample_request());
    CHECK(resp.text == "RANKING: 1");
    REQUIRE(resp.usage.has_value());
    CHECK(resp.usage->prompt_tokens == 5);
    CHECK(gw.ledger().count(Purpose::rerank) == 1);

    CHECK(seen_body["model"] == "test-model");
    CHECK(seen_body["messages"].size() == 2);
    CHECK(seen_body["messages"][0]["role"] == "system");
    CHECK(seen_body["messages"][1]["content"] == "candidates...");
    CHECK(seen_body["temperature"] == 0.0);
    CHECK(seen_body["max_tokens"] == 64);
    CHECK(seen_auth == "Bearer sk-test-credential");
}

TEST_CASE("auth rejections are not retried and leave the ledger unchanged") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("{\"error\":\"bad key\"}", "application/json");
    });
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "m";
    HttpBackend backend(cfg);
    Gateway gw(backend, instant_options(3));
    CHECK_THROWS_AS(gw.complete(sample_request()), AuthError);
    CHECK(hits == 1);
    CHECK(gw.ledger().count(Purpose::rerank) == 0);
    CHECK(gw.ledger().total() == 0);
}

TEST_CASE("transient 5xx responses are retried until success") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++hits <= 2) {
            res.status = 503;
            return;
        }
        json reply = {{"choices", {{{"message", {{"content", "ok"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "m";
    HttpBackend backend(cfg);
    Gateway gw(backend, instant_options(3));
    auto resp = gw.complete(sample_request());
    CHECK(resp.text == "ok");
    CHECK(hits == 3);
    CHECK(gw.ledger().total() == 1);
}

TEST_CASE("shapeless payloads raise malformed-response errors") {
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"unexpected\":true}", "application/json");
    });
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "m";
    HttpBackend backend(cfg);
    Gateway gw(backend, instant_options());
    CHECK_THROWS_AS(gw.complete(sample_request()), MalformedResponseError);
}

TEST_CASE("base urls must carry a scheme") {
    HttpBackendConfig cfg;
    cfg.base_url = "localhost:8080/v1";
    CHECK_THROWS_AS(HttpBackend{cfg}, ConfigError);
    cfg.base_url = "";
    CHECK_THROWS_AS(HttpBackend{cfg}, ConfigError);
}
