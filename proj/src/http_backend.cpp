#include "agp/http_backend.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "agp/errors.hpp"

namespace agp {

using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const std::string& url = config_.base_url;
    if (url.empty()) throw ConfigError("http backend: base_url not set");
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("http backend: base_url must include a scheme: " + url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.rfind("https://", 0) == 0)
        throw ConfigError(
            "http backend: built without TLS support; use an http:// endpoint or a "
            "local TLS-terminating proxy");
#endif
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = url;
        path_prefix_.clear();
    } else {
        host_ = url.substr(0, path_start);
        path_prefix_ = url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    json body;
    body["model"] = config_.model;
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;

    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                              "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (!result)
        throw TransientError("http backend: transport failure: " +
                             httplib::to_string(result.error()));
    if (result->status == 401 || result->status == 403)
        throw AuthError("http backend: authentication rejected (status " +
                        std::to_string(result->status) + ")");
    if (result->status == 429 || result->status >= 500)
        throw TransientError("http backend: status " + std::to_string(result->status));
    if (result->status != 200)
        throw GatewayError("http backend: unexpected status " +
                           std::to_string(result->status) + ": " + result->body);

    json parsed;
    try {
        parsed = json::parse(result->body);
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("http backend: invalid JSON: ") + e.what());
    }
    ChatResponse resp;
    resp.latency = elapsed;
    try {
        resp.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw MalformedResponseError("http backend: response has no choices[0].message.content");
    }
    if (parsed.contains("usage")) {
        TokenUsage usage;
        usage.prompt_tokens = parsed["usage"].value("prompt_tokens", 0L);
        usage.completion_tokens = parsed["usage"].value("completion_tokens", 0L);
        resp.usage = usage;
    }
    return resp;
}

}  // namespace agp
