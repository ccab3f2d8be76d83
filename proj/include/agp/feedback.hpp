#pragma once
// Position-based feedback: per-ground-truth-item (actual, target) pairs, the
// per-user weight 1/avgPos, and the batch weight 1/avgPos over the batch.

#include <string>
#include <vector>

#include "agp/dataset.hpp"
#include "agp/gateway.hpp"
#include "agp/profile.hpp"
#include "agp/rerank.hpp"

namespace agp {

struct FeedbackPair {
    std::string item_id;
    std::string title;
    int actual_pos = 0;  // 1-indexed rank in the reranked list
    int target_pos = 0;  // 1-indexed target rank
};

struct FeedbackSet {
    std::string user_id;
    std::vector<FeedbackPair> pairs;
    std::string diagnosis;
    double avg_pos = 0.0;  // mean of actual positions
    double weight = 0.0;   // 1 / avg_pos

    bool all_at_target() const {
        for (const auto& p : pairs)
            if (p.actual_pos != p.target_pos) return false;
        return true;
    }
};

// The j-th ground-truth item (list order) gets target position j; its actual
// position is its 1-indexed rank in the reranked items. Throws DataError when
// a ground-truth item is missing from the reranked list.
FeedbackSet compute_feedback(const RerankedList& reranked,
                             const std::vector<std::string>& ground_truth,
                             const BaselineRanking& baseline);

struct VerbalizeOptions {
    bool pbf_enabled = true;
    double metric = 0.0;  // reported instead of positions when pbf is off
};

// One loss call that turns the pairs into a natural-language diagnosis. With
// position-based feedback disabled only the scalar metric is verbalized.
FeedbackSet verbalize_feedback(FeedbackSet fs, const UserProfile& profile, Gateway& gateway,
                               const VerbalizeOptions& options = {});

// 1 / mean over users of avg_pos(u).
double batch_weight(const std::vector<FeedbackSet>& feedbacks);

// Line-delimited feedback log:
// {user_id, pairs, avg_pos, weight, diagnosis, epoch, batch_index}.
void append_feedback(const FeedbackSet& fs, int epoch, int batch_index,
                     const std::string& path);

}  // namespace agp
