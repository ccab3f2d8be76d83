#pragma once
// Uniform chat-completion interface with exact API-call accounting.
//
// A Gateway wraps a Backend (HTTP or deterministic mock) and adds retries
// with bounded exponential backoff, an optional requests-per-minute ceiling,
// and a thread-safe call ledger keyed by call purpose.

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace agp {

enum class Purpose { profile, rerank, loss, summarize, optimize };
constexpr int kPurposeCount = 5;

const char* purpose_name(Purpose p);

struct ChatMessage {
    std::string role;  // "system" or "user"
    std::string content;
};

struct ChatRequest {
    Purpose purpose = Purpose::profile;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;

    // Concatenated message contents; what backends and the mock rules see.
    std::string full_text() const;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    std::optional<TokenUsage> usage;
    std::chrono::milliseconds latency{0};
};

// Per-purpose call counters plus counters for the current batch. total always
// equals the sum of the per-purpose counts.
class CallLedger {
public:
    void record(Purpose p);
    void begin_batch();

    long count(Purpose p) const;
    long batch_count(Purpose p) const;
    long total() const;

    std::map<std::string, long> snapshot() const;
    std::string to_csv() const;  // columns purpose,count plus a totals row

private:
    mutable std::mutex mutex_;
    std::array<long, kPurposeCount> counts_{};
    std::array<long, kPurposeCount> batch_counts_{};
    long total_ = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct RetryPolicy {
    int max_retries = 3;  // retries after the first attempt
    std::chrono::milliseconds base_delay{250};
};

struct GatewayOptions {
    RetryPolicy retry;
    int requests_per_minute = 0;  // 0 = unlimited
    // Injectable for tests; default to the steady clock and thread sleep.
    std::function<std::chrono::steady_clock::time_point()> clock;
    std::function<void(std::chrono::milliseconds)> sleeper;
};

class Gateway {
public:
    explicit Gateway(Backend& backend, GatewayOptions options = {});

    // Issues the request, retrying transient failures with exponential
    // backoff. The ledger is incremented only on success.
    ChatResponse complete(const ChatRequest& request);

    CallLedger& ledger() { return ledger_; }
    const CallLedger& ledger() const { return ledger_; }
    Backend& backend() { return backend_; }

private:
    void throttle();

    Backend& backend_;
    GatewayOptions options_;
    CallLedger ledger_;
    std::mutex limiter_mutex_;
    std::deque<std::chrono::steady_clock::time_point> window_;
};

struct CallEstimate {
    long long calls = 0;
    bool exact = true;  // false when batch count was rounded up
};

// Expected training-stage API calls per epoch: 3 per user (profile, rerank,
// loss) plus 2 per batch (summarize, optimize). Non-divisible n_train uses a
// ceiling batch count and is flagged as an approximation.
CallEstimate expected_calls(int batch_size, int n_train);

}  // namespace agp
