#pragma once
// Generic chat-completion HTTP backend: POST {base_url}/chat/completions with
// a bearer credential read from an environment variable.

#include <string>

#include "agp/gateway.hpp"

namespace agp {

struct HttpBackendConfig {
    std::string base_url;                    // e.g. "http://localhost:8000/v1"
    std::string model;                       // model name sent in the body
    std::string api_key_env = "AGP_API_KEY"; // env var holding the credential
    int timeout_seconds = 120;
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    ChatResponse complete(const ChatRequest& request) override;
    std::string name() const override { return "http"; }

private:
    HttpBackendConfig config_;
    std::string host_;         // scheme://host[:port]
    std::string path_prefix_;  // path portion of base_url
};

}  // namespace agp
