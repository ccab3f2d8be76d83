#pragma once
// Reranking: profile-conditioned rerank, the single-pass direct/chain-of-
// thought baselines, and robust parsing/repair of model ranking output.

#include <string>
#include <vector>

#include "agp/dataset.hpp"
#include "agp/gateway.hpp"
#include "agp/profile.hpp"

namespace agp {

enum class RerankMode { agp, dir, cot, base };

const char* mode_name(RerankMode mode);
RerankMode mode_from_string(const std::string& name);

struct RerankedList {
    std::string user_id;
    std::vector<std::string> items;  // permutation of the baseline item_ids
    RerankMode mode = RerankMode::base;
    bool repair_applied = false;
    int prompt_version = -1;
};

struct ParsedRanking {
    std::vector<std::string> items;
    bool repaired = false;
};

// Accepts "RANKING:"/"FINAL:" index lines or numbered lists referencing
// candidate indices or titles. Repair policy: drop unknown entries, keep the
// first occurrence of duplicates, append missing baseline items in their
// original relative order. Throws UnparseableRankingError when fewer than
// half the baseline items are recognizable.
ParsedRanking parse_ranking(const std::string& response_text, const BaselineRanking& baseline);

RerankedList rerank_with_profile(const UserProfile& profile, const BaselineRanking& baseline,
                                 Gateway& gateway);

RerankedList rerank_direct(const UserRecord& user, const BaselineRanking& baseline,
                           RerankMode mode, Gateway& gateway);

// Baseline passthrough (no model call).
RerankedList rerank_base(const BaselineRanking& baseline);

// Line-delimited persistence: {user_id, mode, items, repair_applied, prompt_version}.
void append_reranked(const RerankedList& list, const std::string& path);

}  // namespace agp
