#pragma once
// Deterministic mock chat backend.
//
// Responses are pure functions of (request text, world state). The mock
// understands the request formats rendered by the profile, rerank, feedback
// and optimizer modules:
//
//   profile   — extracts a genre-frequency profile from the numbered history
//               titles; extraction quality is gated by which control tokens
//               appear in the prompt (see below).
//   rerank    — scores each "[i] title (id:...)" candidate by its overlap
//               with the profile strengths and answers "RANKING: ...";
//               ties break by item_id. Requests without a profile block
//               (direct rerank) fall back to raw-history extraction with no
//               control tokens unlocked.
//   loss      — verbalizes the supplied (actual, target) position pairs and,
//               when positions deviate, recommends the control tokens plus an
//               observed-preference note naming the misranked item's genre.
//   summarize — emits the deduplicated, canonically ordered union of the
//               position statements plus the union of recommended tokens;
//               per-user observations are filtered out.
//   optimize  — appends the highest-priority control token that the summary
//               names but the prompt lacks; raw (unsummarized) feedback can
//               additionally pin a single observed per-user preference.
//               With nothing to add, returns the prompt unchanged.
//
// Control tokens, in priority order, each unlock one extraction rule:
//   FOCUS_RECURRING_GENRES     read the whole history, not just the last item
//   IGNORE_NOISE_TITLES        drop genres occurring only once
//   RANK_BY_PREFERENCE_STRENGTH grade strengths by count instead of flat 1s
//   WEIGHT_RECENT_ITEMS        boost genres recurring among recent items

#include <string>
#include <vector>

#include "agp/dataset.hpp"
#include "agp/gateway.hpp"

namespace agp {

struct MockWorldState {
    SyntheticWorldSpec spec;                   // the world this mock narrates
    std::vector<std::string> control_tokens;   // priority order, highest first
};

std::vector<std::string> default_control_tokens();

MockWorldState make_mock_world(const SyntheticWorldSpec& spec);

// Pure; identical (request, world) pairs produce identical responses.
ChatResponse mock_complete(const ChatRequest& request, const MockWorldState& world);

class MockBackend : public Backend {
public:
    explicit MockBackend(MockWorldState world) : world_(std::move(world)) {}

    ChatResponse complete(const ChatRequest& request) override {
        return mock_complete(request, world_);
    }
    std::string name() const override { return "mock"; }

    const MockWorldState& world() const { return world_; }

private:
    MockWorldState world_;
};

}  // namespace agp
