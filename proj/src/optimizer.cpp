#include "agp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agp/errors.hpp"
#include "agp/parallel.hpp"
#include "agp/prompts.hpp"
#include "agp/rng.hpp"

namespace agp {

namespace fs = std::filesystem;
using nlohmann::json;

Intensity intensity_for(double batch_wt) {
    if (batch_wt >= 0.5) return Intensity::light;
    if (batch_wt >= 0.2) return Intensity::moderate;
    return Intensity::aggressive;
}

const char* intensity_name(Intensity intensity) {
    switch (intensity) {
        case Intensity::light: return "light";
        case Intensity::moderate: return "moderate";
        case Intensity::aggressive: return "aggressive";
    }
    return "unknown";
}

namespace {

std::string rtrimmed(const std::string& s) {
    auto e = s.find_last_not_of(" \t\r\n");
    if (e == std::string::npos) return "";
    return s.substr(0, e + 1);
}

std::string weight_labeled_blocks(const std::vector<FeedbackSet>& feedbacks) {
    std::vector<const FeedbackSet*> sorted;
    sorted.reserve(feedbacks.size());
    for (const auto& f : feedbacks) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](const FeedbackSet* a, const FeedbackSet* b) {
        if (a->weight != b->weight) return a->weight > b->weight;
        return a->user_id < b->user_id;
    });
    const std::size_t n = sorted.size();
    std::ostringstream os;
    for (std::size_t r = 0; r < n; ++r) {
        const char* label = (r * 3 < n) ? "HIGH" : (r * 3 < 2 * n) ? "MED" : "LOW";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", sorted[r]->weight);
        os << "[" << label << " weight=" << buf << "] user=" << sorted[r]->user_id << "\n"
           << rtrimmed(sorted[r]->diagnosis) << "\n---\n";
    }
    return os.str();
}

std::string summary_digest(const std::string& text) {
    std::string digest;
    for (char c : text) {
        if (c == '\n') {
            if (!digest.empty() && digest.back() != ' ') digest += ' ';
        } else {
            digest += c;
        }
        if (digest.size() >= 96) break;
    }
    return digest;
}

}  // namespace

BatchFeedbackSummary summarize_batch(const std::vector<FeedbackSet>& feedbacks,
                                     const TrainConfig& cfg, Gateway& gateway) {
    if (feedbacks.empty()) throw PreconditionError("summarize_batch: empty batch");

    BatchFeedbackSummary summary;
    summary.batch_wt = batch_weight(feedbacks);
    summary.all_at_target = true;
    for (const auto& f : feedbacks) {
        summary.contributing.emplace_back(f.user_id, f.weight);
        if (!f.all_at_target()) summary.all_at_target = false;
    }

    const std::string blocks = weight_labeled_blocks(feedbacks);
    if (!cfg.summarization_enabled) {
        summary.text = blocks;
        return summary;
    }
    ChatRequest req;
    req.purpose = Purpose::summarize;
    req.messages.push_back(
        {"system",
         "You summarize a batch of per-user ranking feedback into batch-level "
         "improvement instructions. Weight-ordered entries follow; HIGH entries "
         "matter most. Merge duplicates.\n"});
    req.messages.push_back({"user", blocks});
    summary.text = gateway.complete(req).text;
    return summary;
}

PromptState apply_update(const PromptState& prompt, const BatchFeedbackSummary& summary,
                         const TrainConfig& cfg, Gateway& gateway) {
    (void)cfg;
    if (summary.text.empty()) throw PreconditionError("apply_update: empty summary");
    if (summary.all_at_target) return prompt;  // zero gradient, no call

    TextualGradient gradient;
    gradient.intensity = intensity_for(summary.batch_wt);
    switch (gradient.intensity) {
        case Intensity::light:
            gradient.instruction_text = "light - adjust at most one instruction (edit budget: 1)";
            break;
        case Intensity::moderate:
            gradient.instruction_text =
                "moderate - adjust at most three instructions (edit budget: 3)";
            break;
        case Intensity::aggressive:
            gradient.instruction_text =
                "aggressive - you may rewrite the prompt freely (edit budget: unrestricted)";
            break;
    }

    char wt[32];
    std::snprintf(wt, sizeof(wt), "%.3f", summary.batch_wt);
    std::ostringstream user;
    user << "Current prompt:\n" << kPromptOpen << "\n" << prompt.text << "\n" << kPromptClose
         << "\n\nBatch feedback summary:\n" << kSummaryOpen << "\n" << summary.text << "\n"
         << kSummaryClose << "\n\nBatch weight: " << wt
         << "\nUpdate intensity: " << gradient.instruction_text << "\n";

    ChatRequest req;
    req.purpose = Purpose::optimize;
    req.messages.push_back({"system", optimize_system_prompt()});
    req.messages.push_back({"user", user.str()});
    ChatResponse resp = gateway.complete(req);

    const std::string new_text = rtrimmed(resp.text);
    if (new_text.empty() || new_text == rtrimmed(prompt.text)) {
        // Degenerate response: keep the prompt as is.
        return prompt;
    }
    PromptState next;
    next.text = new_text;
    next.version = prompt.version + 1;
    next.parent_version = prompt.version;
    next.created_by = PromptState::Origin::optimizer;
    next.note = summary_digest(summary.text);
    return next;
}

namespace {

struct UserStepResult {
    double ndcg = 0.0;
    double avg_pos = 0.0;
    bool repaired = false;
    FeedbackSet feedback;
};

struct EpochAccumulator {
    double ndcg = 0.0;
    double avg_pos = 0.0;
    double repairs = 0.0;
    long count = 0;

    void add(double n, double p, bool r) {
        ndcg += n;
        avg_pos += p;
        repairs += r ? 1.0 : 0.0;
        ++count;
    }
};

const BaselineRanking& ranking_for(const DatasetBundle& bundle, const std::string& uid) {
    auto it = bundle.rankings.find(uid);
    if (it == bundle.rankings.end())
        throw DataError("no baseline ranking for user " + uid);
    return it->second;
}

const UserRecord& user_for(const DatasetBundle& bundle, const std::string& uid) {
    auto it = bundle.users.find(uid);
    if (it == bundle.users.end()) throw DataError("unknown user " + uid);
    return it->second;
}

void persist_prompt(const RunPersist* persist, const PromptState& prompt) {
    if (!persist) return;
    save_prompt_checkpoint(prompt, (fs::path(persist->run_dir) / "prompts").string());
}

std::map<std::string, long> merged_ledger(const std::map<std::string, long>& base,
                                          const CallLedger& ledger) {
    auto out = ledger.snapshot();
    for (const auto& [k, v] : base) out[k] += v;
    return out;
}

void write_ledger_csv(const std::map<std::string, long>& snapshot, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write ledger: " + path);
    f << "purpose,count\n";
    for (int i = 0; i < kPurposeCount; ++i) {
        const char* name = purpose_name(static_cast<Purpose>(i));
        auto it = snapshot.find(name);
        f << name << "," << (it == snapshot.end() ? 0 : it->second) << "\n";
    }
    auto t = snapshot.find("total");
    f << "total," << (t == snapshot.end() ? 0 : t->second) << "\n";
}

}  // namespace

RunState train(const DatasetBundle& bundle, const TrainConfig& cfg, const PromptState& seed,
               Gateway& gateway, const RunPersist* persist, const RunState* resume_from) {
    if (bundle.split.train.empty()) throw PreconditionError("train: empty train split");
    if (cfg.batch_size < 1 || cfg.batch_size > static_cast<int>(bundle.split.train.size()))
        throw ConfigError("train: batch_size must be in [1, |train|]");
    if (cfg.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
    if (cfg.history_len < 1) throw ConfigError("train: history_len must be >= 1");
    for (const auto& uid : bundle.split.train) {
        user_for(bundle, uid);
        ranking_for(bundle, uid);
    }

    RunState state;
    state.seed = cfg.seed;
    int epochs_without_improvement = 0;
    if (resume_from) {
        state = *resume_from;
        // An abort mid-epoch may have checkpointed prompt versions past the
        // last committed epoch; drop them so the epoch restarts cleanly.
        if (!state.committed_versions.empty()) {
            std::vector<PromptState> committed;
            for (const auto& p : state.lineage)
                for (int v : state.committed_versions)
                    if (p.version == v) committed.push_back(p);
            state.lineage = std::move(committed);
        }
        if (state.lineage.empty()) throw DataError("resume: run state has no prompt lineage");
    } else {
        state.lineage.push_back(seed);
        persist_prompt(persist, seed);
    }
    std::map<std::string, long> ledger_base = state.ledger_snapshot;

    // Prompt versions created during an epoch count as committed only once
    // the epoch completes; an abort rolls the resumable state back to here.
    std::size_t committed_lineage = state.lineage.size();
    auto persist_state = [&] {
        if (!persist) return;
        state.committed_versions.clear();
        for (std::size_t i = 0; i < committed_lineage; ++i)
            state.committed_versions.push_back(state.lineage[i].version);
        state.ledger_snapshot = merged_ledger(ledger_base, gateway.ledger());
        save_run_state(state, (fs::path(persist->run_dir) / "run.json").string());
        write_metrics_csv(state.history, (fs::path(persist->run_dir) / "metrics.csv").string());
        write_ledger_csv(state.ledger_snapshot,
                         (fs::path(persist->run_dir) / "ledger.csv").string());
    };

    try {
        for (int epoch = state.epochs_run; epoch < cfg.max_epochs; ++epoch) {
            PromptState prompt = state.lineage.back();
            const long epoch_calls_before = gateway.ledger().total();

            std::vector<std::string> order = bundle.split.train;
            auto rng = substream(cfg.seed, 0xE90C0000ull + static_cast<std::uint64_t>(epoch));
            deterministic_shuffle(order, rng);

            EpochAccumulator train_acc;
            int batch_index = 0;
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
                Batch batch;
                batch.epoch = epoch;
                batch.index = batch_index;
                const std::size_t end =
                    std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
                batch.user_ids.assign(order.begin() + start, order.begin() + end);

                gateway.ledger().begin_batch();
                std::vector<UserStepResult> results(batch.user_ids.size());
                parallel_for_indexed(batch.user_ids.size(), cfg.parallelism, [&](std::size_t i) {
                    const auto& uid = batch.user_ids[i];
                    const UserRecord user = truncate_history(user_for(bundle, uid), cfg.history_len);
                    const BaselineRanking& baseline = ranking_for(bundle, uid);
                    UserProfile profile = generate_profile(user, prompt, gateway);
                    RerankedList reranked = rerank_with_profile(profile, baseline, gateway);
                    FeedbackSet fs = compute_feedback(reranked, user.ground_truth, baseline);
                    UserStepResult r;
                    r.ndcg = ndcg_at_k(reranked.items, user.ground_truth, 10);
                    r.avg_pos = fs.avg_pos;
                    r.repaired = reranked.repair_applied;
                    VerbalizeOptions vo;
                    vo.pbf_enabled = cfg.pbf_enabled;
                    vo.metric = r.ndcg;
                    r.feedback = verbalize_feedback(std::move(fs), profile, gateway, vo);
                    results[i] = std::move(r);
                });

                std::vector<FeedbackSet> feedbacks;
                feedbacks.reserve(results.size());
                for (auto& r : results) {
                    train_acc.add(r.ndcg, r.avg_pos, r.repaired);
                    feedbacks.push_back(std::move(r.feedback));
                }
                if (persist) {
                    const std::string log =
                        (fs::path(persist->run_dir) / "feedback.log").string();
                    for (const auto& f : feedbacks)
                        append_feedback(f, epoch, batch.index, log);
                }

                BatchFeedbackSummary summary = summarize_batch(feedbacks, cfg, gateway);
                PromptState updated = apply_update(prompt, summary, cfg, gateway);
                if (updated.version != prompt.version) {
                    state.lineage.push_back(updated);
                    persist_prompt(persist, updated);
                }
                prompt = std::move(updated);
            }
            const long train_stage_calls = gateway.ledger().total() - epoch_calls_before;

            // Validation: each user's validation item scored as ground truth
            // against its baseline list with the epoch's final prompt.
            EpochAccumulator val_acc;
            {
                const auto& ids = bundle.split.train;
                std::vector<UserStepResult> results(ids.size());
                parallel_for_indexed(ids.size(), cfg.parallelism, [&](std::size_t i) {
                    const auto& uid = ids[i];
                    const UserRecord user = truncate_history(user_for(bundle, uid), cfg.history_len);
                    const BaselineRanking& baseline = ranking_for(bundle, uid);
                    UserProfile profile = generate_profile(user, prompt, gateway);
                    RerankedList reranked = rerank_with_profile(profile, baseline, gateway);
                    UserStepResult r;
                    const std::vector<std::string> relevant = {user.validation_item};
                    r.ndcg = ndcg_at_k(reranked.items, relevant, 10);
                    bool present = false;
                    for (std::size_t p = 0; p < reranked.items.size(); ++p) {
                        if (reranked.items[p] == user.validation_item) {
                            r.avg_pos = static_cast<double>(p + 1);
                            present = true;
                            break;
                        }
                    }
                    // A validation item outside the candidate list counts as
                    // ranked just below it.
                    if (!present) r.avg_pos = static_cast<double>(reranked.items.size() + 1);
                    r.repaired = reranked.repair_applied;
                    results[i] = std::move(r);
                });
                for (const auto& r : results) val_acc.add(r.ndcg, r.avg_pos, r.repaired);
            }

            EpochMetrics em;
            em.epoch = epoch;
            em.train_ndcg = train_acc.ndcg / static_cast<double>(train_acc.count);
            em.train_avg_pos = train_acc.avg_pos / static_cast<double>(train_acc.count);
            em.train_repair_rate = train_acc.repairs / static_cast<double>(train_acc.count);
            em.val_ndcg = val_acc.ndcg / static_cast<double>(val_acc.count);
            em.val_avg_pos = val_acc.avg_pos / static_cast<double>(val_acc.count);
            em.val_repair_rate = val_acc.repairs / static_cast<double>(val_acc.count);
            em.train_stage_calls = train_stage_calls;
            em.prompt_version_at_end = prompt.version;
            state.history.push_back(em);
            state.epochs_run = epoch + 1;
            committed_lineage = state.lineage.size();

            if (em.val_ndcg > state.best_val_ndcg + 1e-15) {
                state.best_val_ndcg = em.val_ndcg;
                state.best_version = prompt.version;
                epochs_without_improvement = 0;
            } else {
                ++epochs_without_improvement;
            }
            persist_state();
            if (epochs_without_improvement >= cfg.patience) {
                state.stopped_early = true;
                break;
            }
        }
    } catch (const GatewayError&) {
        persist_state();
        throw;
    }
    state.ledger_snapshot = merged_ledger(ledger_base, gateway.ledger());
    persist_state();
    return state;
}

MetricReport evaluate_run(const DatasetBundle& bundle, const PromptState* prompt,
                          RerankMode mode, const TrainConfig& cfg, Gateway& gateway,
                          const std::string& rerank_log_path) {
    if (bundle.split.eval.empty()) throw PreconditionError("evaluate_run: empty eval split");
    if (mode == RerankMode::agp && !prompt)
        throw PreconditionError("evaluate_run: agp mode requires a prompt");

    const auto& ids = bundle.split.eval;
    std::vector<PerUserResult> rows(ids.size());
    std::vector<RerankedList> lists(ids.size());
    std::vector<char> ok(ids.size(), 0);
    std::vector<std::string> failures(ids.size());

    parallel_for_indexed(ids.size(), cfg.parallelism, [&](std::size_t i) {
        const auto& uid = ids[i];
        try {
            const UserRecord user = truncate_history(user_for(bundle, uid), cfg.history_len);
            const BaselineRanking& baseline = ranking_for(bundle, uid);
            RerankedList reranked;
            switch (mode) {
                case RerankMode::base:
                    reranked = rerank_base(baseline);
                    break;
                case RerankMode::dir:
                case RerankMode::cot:
                    reranked = rerank_direct(user, baseline, mode, gateway);
                    break;
                case RerankMode::agp: {
                    UserProfile profile = generate_profile(user, *prompt, gateway);
                    reranked = rerank_with_profile(profile, baseline, gateway);
                    break;
                }
            }
            PerUserResult row;
            row.user_id = uid;
            row.mode = mode_name(mode);
            row.ndcg_at_10 = ndcg_at_k(reranked.items, user.ground_truth, 10);
            row.gt_avg_pos = average_position(reranked.items, user.ground_truth);
            row.repair_applied = reranked.repair_applied;
            row.prompt_version = reranked.prompt_version;
            const std::size_t top = std::min<std::size_t>(10, reranked.items.size());
            for (std::size_t p = 0; p < top && !row.hit_at_k; ++p)
                for (const auto& g : user.ground_truth)
                    if (reranked.items[p] == g) {
                        row.hit_at_k = true;
                        break;
                    }
            rows[i] = std::move(row);
            lists[i] = std::move(reranked);
            ok[i] = 1;
        } catch (const AgpError& e) {
            failures[i] = e.what();
        }
    });

    std::vector<PerUserResult> kept;
    int n_failures = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ok[i]) {
            kept.push_back(rows[i]);
            if (!rerank_log_path.empty()) append_reranked(lists[i], rerank_log_path);
        } else {
            ++n_failures;
        }
    }
    if (kept.empty()) throw DataError("evaluate_run: every per-user evaluation failed");
    MetricReport report = build_report(kept, mode_name(mode));
    report.n_failures = n_failures;
    return report;
}

void save_run_state(const RunState& state, const std::string& path) {
    json j;
    j["seed"] = state.seed;
    j["epochs_run"] = state.epochs_run;
    j["best_version"] = state.best_version;
    j["best_val_ndcg"] = state.best_val_ndcg;
    j["stopped_early"] = state.stopped_early;
    json versions = json::array();
    if (!state.committed_versions.empty())
        for (int v : state.committed_versions) versions.push_back(v);
    else
        for (const auto& p : state.lineage) versions.push_back(p.version);
    j["lineage_versions"] = std::move(versions);
    json history = json::array();
    for (const auto& em : state.history) {
        history.push_back({{"epoch", em.epoch},
                           {"train_ndcg", em.train_ndcg},
                           {"train_avg_pos", em.train_avg_pos},
                           {"train_repair_rate", em.train_repair_rate},
                           {"val_ndcg", em.val_ndcg},
                           {"val_avg_pos", em.val_avg_pos},
                           {"val_repair_rate", em.val_repair_rate},
                           {"train_stage_calls", em.train_stage_calls},
                           {"prompt_version_at_end", em.prompt_version_at_end}});
    }
    j["history"] = std::move(history);
    j["ledger"] = state.ledger_snapshot;
    std::ofstream f(path);
    if (!f) throw DataError("cannot write run state: " + path);
    f << j.dump(2) << "\n";
}

RunState load_run_state(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open run state: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    RunState state;
    state.seed = j.at("seed").get<std::uint64_t>();
    state.epochs_run = j.at("epochs_run").get<int>();
    state.best_version = j.at("best_version").get<int>();
    state.best_val_ndcg = j.at("best_val_ndcg").get<double>();
    state.stopped_early = j.at("stopped_early").get<bool>();
    for (const auto& em_json : j.at("history")) {
        EpochMetrics em;
        em.epoch = em_json.at("epoch").get<int>();
        em.train_ndcg = em_json.at("train_ndcg").get<double>();
        em.train_avg_pos = em_json.at("train_avg_pos").get<double>();
        em.train_repair_rate = em_json.at("train_repair_rate").get<double>();
        em.val_ndcg = em_json.at("val_ndcg").get<double>();
        em.val_avg_pos = em_json.at("val_avg_pos").get<double>();
        em.val_repair_rate = em_json.at("val_repair_rate").get<double>();
        em.train_stage_calls = em_json.at("train_stage_calls").get<long>();
        em.prompt_version_at_end = em_json.at("prompt_version_at_end").get<int>();
        state.history.push_back(em);
    }
    if (j.contains("lineage_versions"))
        for (const auto& v : j["lineage_versions"])
            state.committed_versions.push_back(v.get<int>());
    if (j.contains("ledger"))
        state.ledger_snapshot = j["ledger"].get<std::map<std::string, long>>();
    return state;
}

void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write metrics: " + path);
    f << "epoch,split,ndcg_at_10,avg_pos,repair_rate\n";
    char buf[160];
    for (const auto& em : history) {
        std::snprintf(buf, sizeof(buf), "%d,train,%.6f,%.6f,%.6f\n", em.epoch, em.train_ndcg,
                      em.train_avg_pos, em.train_repair_rate);
        f << buf;
        std::snprintf(buf, sizeof(buf), "%d,validation,%.6f,%.6f,%.6f\n", em.epoch, em.val_ndcg,
                      em.val_avg_pos, em.val_repair_rate);
        f << buf;
    }
}

}  // namespace agp
