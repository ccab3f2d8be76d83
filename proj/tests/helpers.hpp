#pragma once
// Shared test fixtures: scripted backends and small world builders.

#include <functional>
#include <string>
#include <vector>

#include "agp/dataset.hpp"
#include "agp/errors.hpp"
#include "agp/gateway.hpp"
#include "agp/mock_world.hpp"
#include "agp/synth.hpp"

namespace agp::test {

// Returns canned responses in order; repeats the last one when exhausted.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    ChatResponse complete(const ChatRequest& request) override {
        requests.push_back(request);
        if (responses_.empty()) throw GatewayError("scripted backend has no responses");
        const std::size_t i = std::min(requests.size() - 1, responses_.size() - 1);
        return ChatResponse{responses_[i], std::nullopt, std::chrono::milliseconds{0}};
    }
    std::string name() const override { return "scripted"; }

    std::vector<ChatRequest> requests;

private:
    std::vector<std::string> responses_;
};

// Fails with a transient error a fixed number of times, then delegates.
class FlakyBackend : public Backend {
public:
    FlakyBackend(Backend& inner, int failures) : inner_(inner), failures_left_(failures) {}

    ChatResponse complete(const ChatRequest& request) override {
        ++attempts;
        if (failures_left_ > 0) {
            --failures_left_;
            throw TransientError("scripted transient failure");
        }
        return inner_.complete(request);
    }
    std::string name() const override { return "flaky"; }

    int attempts = 0;

private:
    Backend& inner_;
    int failures_left_;
};

class AlwaysFailBackend : public Backend {
public:
    ChatResponse complete(const ChatRequest&) override {
        ++attempts;
        throw TransientError("permanent transient failure");
    }
    std::string name() const override { return "always-fail"; }
    int attempts = 0;
};

// Succeeds for the first n calls, then fails permanently.
class FailAfterBackend : public Backend {
public:
    FailAfterBackend(Backend& inner, int successes) : inner_(inner), left_(successes) {}

    ChatResponse complete(const ChatRequest& request) override {
        if (left_ <= 0) throw TransientError("budget exhausted (scripted)");
        --left_;
        return inner_.complete(request);
    }
    std::string name() const override { return "fail-after"; }

private:
    Backend& inner_;
    int left_;
};

inline std::vector<std::string> test_genres(int n = 8) {
    const std::vector<std::string> all = {"fantasy", "noir",    "scifi",   "romance",
                                          "horror",  "western", "mystery", "drama",
                                          "epic",    "pastoral", "cyber",  "gothic"};
    return {all.begin(), all.begin() + n};
}

inline SyntheticWorldSpec small_world_spec(std::uint64_t seed, int n_users = 24,
                                           double noise_rate = 0.2, int list_length = 10) {
    SyntheticWorldSpec spec;
    spec.seed = seed;
    spec.genre_vocabulary = test_genres();
    spec.n_users = n_users;
    spec.n_items = n_users * (5 + list_length) + 16;
    spec.history_length = 5;
    spec.list_length = list_length;
    spec.noise_rate = noise_rate;
    return spec;
}

}  // namespace agp::test
