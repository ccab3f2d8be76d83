#include "agp/gateway.hpp"

#include <sstream>
#include <thread>

#include "agp/errors.hpp"

namespace agp {

const char* purpose_name(Purpose p) {
    switch (p) {
        case Purpose::profile: return "profile";
        case Purpose::rerank: return "rerank";
        case Purpose::loss: return "loss";
        case Purpose::summarize: return "summarize";
        case Purpose::optimize: return "optimize";
    }
    return "unknown";
}

std::string ChatRequest::full_text() const {
    std::string out;
    for (const auto& m : messages) {
        out += m.content;
        out += "\n";
    }
    return out;
}

void CallLedger::record(Purpose p) {
    std::lock_guard<std::mutex> lock(mutex_);
    counts_[static_cast<int>(p)]++;
    batch_counts_[static_cast<int>(p)]++;
    total_++;
}

void CallLedger::begin_batch() {
    std::lock_guard<std::mutex> lock(mutex_);
    batch_counts_.fill(0);
}

long CallLedger::count(Purpose p) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return counts_[static_cast<int>(p)];
}

long CallLedger::batch_count(Purpose p) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return batch_counts_[static_cast<int>(p)];
}

long CallLedger::total() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return total_;
}

std::map<std::string, long> CallLedger::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::map<std::string, long> out;
    for (int i = 0; i < kPurposeCount; ++i)
        out[purpose_name(static_cast<Purpose>(i))] = counts_[i];
    out["total"] = total_;
    return out;
}

std::string CallLedger::to_csv() const {
    auto snap = snapshot();
    std::ostringstream os;
    os << "purpose,count\n";
    for (int i = 0; i < kPurposeCount; ++i) {
        const char* name = purpose_name(static_cast<Purpose>(i));
        os << name << "," << snap[name] << "\n";
    }
    os << "total," << snap["total"] << "\n";
    return os.str();
}

Gateway::Gateway(Backend& backend, GatewayOptions options)
    : backend_(backend), options_(std::move(options)) {
    if (!options_.clock)
        options_.clock = [] { return std::chrono::steady_clock::now(); };
    if (!options_.sleeper)
        options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Gateway::throttle() {
    if (options_.requests_per_minute <= 0) return;
    const auto minute = std::chrono::seconds(60);
    while (true) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(limiter_mutex_);
            const auto now = options_.clock();
            while (!window_.empty() && now - window_.front() >= minute) window_.pop_front();
            if (static_cast<int>(window_.size()) < options_.requests_per_minute) {
                window_.push_back(now);
                return;
            }
            wait = std::chrono::duration_cast<std::chrono::milliseconds>(
                window_.front() + minute - now);
        }
        if (wait.count() > 0) options_.sleeper(wait);
    }
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    if (request.messages.empty())
        throw PreconditionError("chat request must contain at least one message");
    int attempt = 0;
    while (true) {
        throttle();
        try {
            ChatResponse resp = backend_.complete(request);
            ledger_.record(request.purpose);
            return resp;
        } catch (const TransientError& e) {
            if (attempt >= options_.retry.max_retries)
                throw GatewayError(std::string("retry budget exhausted after ") +
                                   std::to_string(attempt + 1) + " attempts: " + e.what());
            const auto delay = options_.retry.base_delay * (1LL << attempt);
            options_.sleeper(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
            ++attempt;
        }
    }
}

CallEstimate expected_calls(int batch_size, int n_train) {
    if (batch_size < 1 || n_train < 1)
        throw PreconditionError("expected_calls: batch_size and n_train must be positive");
    CallEstimate est;
    const long long batches = (n_train + batch_size - 1) / batch_size;
    est.exact = (n_train % batch_size == 0);
    est.calls = static_cast<long long>(batch_size * 3 + 2) * batches;
    return est;
}

}  // namespace agp
