#pragma once
// The batched training loop: weighted feedback summarization, textual
// prompt updates, epoch iteration with validation-based early stopping, and
// run evaluation.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agp/dataset.hpp"
#include "agp/feedback.hpp"
#include "agp/gateway.hpp"
#include "agp/metrics.hpp"
#include "agp/profile.hpp"
#include "agp/rerank.hpp"

namespace agp {

struct TrainConfig {
    int batch_size = 10;
    int history_len = 5;
    int max_epochs = 10;
    int patience = 3;  // epochs without validation improvement before stopping
    bool summarization_enabled = true;
    bool pbf_enabled = true;
    std::uint64_t seed = 0;
    int parallelism = 1;
};

struct Batch {
    int epoch = 0;
    int index = 0;
    std::vector<std::string> user_ids;
};

struct BatchFeedbackSummary {
    std::string text;
    std::vector<std::pair<std::string, double>> contributing;  // (user_id, weight)
    double batch_wt = 0.0;
    bool all_at_target = false;
};

enum class Intensity { light, moderate, aggressive };

// batch_wt >= 0.5 -> light, >= 0.2 -> moderate, below -> aggressive.
Intensity intensity_for(double batch_wt);
const char* intensity_name(Intensity intensity);

struct TextualGradient {
    std::string instruction_text;
    Intensity intensity = Intensity::light;
};

struct EpochMetrics {
    int epoch = 0;
    double train_ndcg = 0.0;
    double train_avg_pos = 0.0;
    double train_repair_rate = 0.0;
    double val_ndcg = 0.0;
    double val_avg_pos = 0.0;
    double val_repair_rate = 0.0;
    long train_stage_calls = 0;  // ledger delta of the batch phase (excludes validation calls)
    int prompt_version_at_end = 0;
};

struct RunState {
    std::vector<PromptState> lineage;
    std::vector<int> committed_versions;  // lineage as of the last completed epoch
    std::vector<EpochMetrics> history;
    int best_version = 0;
    double best_val_ndcg = -1.0;
    std::map<std::string, long> ledger_snapshot;
    std::uint64_t seed = 0;
    int epochs_run = 0;
    bool stopped_early = false;
};

// Optional on-disk persistence for a training run.
struct RunPersist {
    std::string run_dir;
};

// Presents diagnoses to the summarizer sorted by descending weight with
// HIGH/MED/LOW emphasis labels; exactly one summarize call. With
// summarization disabled, concatenates the labeled diagnoses verbatim and
// issues no call.
BatchFeedbackSummary summarize_batch(const std::vector<FeedbackSet>& feedbacks,
                                     const TrainConfig& cfg, Gateway& gateway);

// One optimize call carrying the current prompt, the summary and an intensity
// directive derived from the batch weight. Returns the unchanged prompt when
// every pair is already at its target (zero gradient, no call) or when the
// response is degenerate.
PromptState apply_update(const PromptState& prompt, const BatchFeedbackSummary& summary,
                         const TrainConfig& cfg, Gateway& gateway);

RunState train(const DatasetBundle& bundle, const TrainConfig& cfg, const PromptState& seed,
               Gateway& gateway, const RunPersist* persist = nullptr,
               const RunState* resume_from = nullptr);

// Reranks every eval-split user in the given mode and aggregates metrics.
// base uses the ingested order, dir/cot the single-pass baselines, agp the
// supplied prompt. Per-user failures are excluded and counted.
MetricReport evaluate_run(const DatasetBundle& bundle, const PromptState* prompt,
                          RerankMode mode, const TrainConfig& cfg, Gateway& gateway,
                          const std::string& rerank_log_path = "");

void save_run_state(const RunState& state, const std::string& path);
RunState load_run_state(const std::string& path);
void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::string& path);

}  // namespace agp
