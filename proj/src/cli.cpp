#include "agp/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>

#include "agp/errors.hpp"
#include "agp/mock_world.hpp"
#include "agp/synth.hpp"

namespace agp {

namespace fs = std::filesystem;

namespace {

DatasetBundle make_bundle(const AppConfig& cfg) {
    DatasetBundle bundle;
    if (!cfg.users_path.empty()) {
        if (cfg.rankings_path.empty())
            throw ConfigError("data.users given without data.rankings");
        bundle = load_bundle(cfg.users_path, cfg.rankings_path);
    } else if (cfg.has_world) {
        bundle = generate_synthetic_world(cfg.world);
    } else {
        throw ConfigError("no dataset source: set [data] users/rankings or a [world] section");
    }
    return sample_split(std::move(bundle), cfg.n_train, cfg.n_eval, cfg.split_seed,
                        cfg.allow_overlap);
}

std::unique_ptr<Backend> make_backend(const AppConfig& cfg) {
    if (cfg.backend == "mock") {
        SyntheticWorldSpec spec = cfg.has_world ? cfg.world : SyntheticWorldSpec{};
        return std::make_unique<MockBackend>(make_mock_world(spec));
    }
    HttpBackendConfig http = cfg.http;
    if (const char* url = std::getenv("AGP_BASE_URL"); url && *url) http.base_url = url;
    return std::make_unique<HttpBackend>(std::move(http));
}

GatewayOptions gateway_options(const AppConfig& cfg) {
    GatewayOptions opt;
    opt.retry.max_retries = cfg.max_retries;
    opt.requests_per_minute = cfg.requests_per_minute;
    return opt;
}

void print_epoch_table(const std::vector<EpochMetrics>& history) {
    std::printf("%-6s %-11s %-11s %-10s %-10s %-8s %-8s %s\n", "epoch", "train_n@10",
                "val_n@10", "train_pos", "val_pos", "repair", "calls", "prompt_v");
    for (const auto& em : history) {
        std::printf("%-6d %-11.4f %-11.4f %-10.3f %-10.3f %-8.3f %-8ld %d\n", em.epoch,
                    em.train_ndcg, em.val_ndcg, em.train_avg_pos, em.val_avg_pos,
                    em.train_repair_rate, em.train_stage_calls, em.prompt_version_at_end);
    }
}

bool is_infeasible(const ConfigError& e) {
    return std::string(e.what()).find("infeasible") != std::string::npos;
}

}  // namespace

int cmd_train(const AppConfig& cfg, bool resume) {
    try {
        const fs::path run_dir(cfg.run_dir);
        const fs::path run_json = run_dir / "run.json";
        RunState resume_state;
        bool have_resume = false;
        if (resume) {
            if (!fs::exists(run_json))
                throw DataError("--resume: no run.json in " + cfg.run_dir);
            resume_state = load_run_state(run_json.string());
            auto lineage = load_prompt_lineage((run_dir / "prompts").string());
            if (lineage.empty()) throw DataError("--resume: no prompt checkpoints");
            resume_state.lineage = std::move(lineage);
            have_resume = true;
        } else {
            if (fs::exists(run_dir) && !fs::is_empty(run_dir))
                throw ConfigError("run directory is not empty (use --resume to continue): " +
                                  cfg.run_dir);
            fs::create_directories(run_dir);
        }

        DatasetBundle bundle = make_bundle(cfg);
        auto backend = make_backend(cfg);
        Gateway gateway(*backend, gateway_options(cfg));
        PromptState seed = seed_prompt(cfg.seed_template);
        RunPersist persist{cfg.run_dir};

        RunState state = train(bundle, cfg.train, seed, gateway, &persist,
                               have_resume ? &resume_state : nullptr);
        print_epoch_table(state.history);
        std::printf("best prompt version: %d (validation N@10 %.4f)%s\n", state.best_version,
                    state.best_val_ndcg, state.stopped_early ? " [early stop]" : "");
        std::printf("artifacts in %s\n", cfg.run_dir.c_str());
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const GatewayError& e) {
        std::fprintf(stderr, "gateway error: %s (run state persisted, resume with --resume)\n",
                     e.what());
        return 3;
    } catch (const AgpError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    }
}

int cmd_eval(const AppConfig& cfg, const std::string& mode_str, int prompt_version) {
    try {
        const RerankMode mode = mode_from_string(mode_str);
        DatasetBundle bundle = make_bundle(cfg);
        auto backend = make_backend(cfg);
        Gateway gateway(*backend, gateway_options(cfg));

        PromptState prompt;
        const PromptState* prompt_ptr = nullptr;
        if (mode == RerankMode::agp) {
            const fs::path prompts_dir = fs::path(cfg.run_dir) / "prompts";
            std::vector<PromptState> lineage;
            try {
                lineage = load_prompt_lineage(prompts_dir.string());
            } catch (const AgpError&) {
                std::fprintf(stderr, "eval: no prompt checkpoints in %s\n",
                             prompts_dir.string().c_str());
                return 2;
            }
            int wanted = prompt_version;
            if (wanted < 0) {
                const fs::path run_json = fs::path(cfg.run_dir) / "run.json";
                if (fs::exists(run_json))
                    wanted = load_run_state(run_json.string()).best_version;
                else
                    wanted = lineage.back().version;
            }
            bool found = false;
            for (const auto& p : lineage) {
                if (p.version == wanted) {
                    prompt = p;
                    found = true;
                    break;
                }
            }
            if (!found) {
                std::fprintf(stderr, "eval: prompt version %d not found\n", wanted);
                return 2;
            }
            prompt_ptr = &prompt;
        }

        fs::create_directories(cfg.run_dir);
        const std::string rerank_log =
            (fs::path(cfg.run_dir) / ("reranked_" + mode_str + ".jsonl")).string();
        if (fs::exists(rerank_log)) fs::remove(rerank_log);
        MetricReport report =
            evaluate_run(bundle, prompt_ptr, mode, cfg.train, gateway, rerank_log);

        const std::string csv =
            (fs::path(cfg.run_dir) / ("report_" + mode_str + ".csv")).string();
        write_report_csv(report, csv);
        const std::string summary = report_summary(report);
        std::ofstream sf(fs::path(cfg.run_dir) / ("report_" + mode_str + ".txt"));
        sf << summary << "\n";
        std::printf("%s\n", summary.c_str());
        std::printf("mean N@10: %.4f\n", report.mean_ndcg_at_k);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const GatewayError& e) {
        std::fprintf(stderr, "gateway error: %s\n", e.what());
        return 3;
    } catch (const AgpError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    }
}

int cmd_budget(int batch_size, int n_train, int epochs) {
    if (batch_size < 1 || n_train < 1 || epochs < 1) {
        std::fprintf(stderr, "budget: batch-size, n-train and epochs must be positive\n");
        return 1;
    }
    const CallEstimate est = expected_calls(batch_size, n_train);
    std::printf("batch_size=%d n_train=%d\n", batch_size, n_train);
    std::printf("per-epoch calls: %lld%s\n", est.calls,
                est.exact ? "" : " (approximate: last batch is smaller)");
    std::printf("epochs=%d total: %lld\n", epochs, est.calls * epochs);
    return 0;
}

int cmd_synth(const AppConfig& cfg, const std::string& out_dir) {
    try {
        if (!cfg.has_world) throw ConfigError("synth: config has no [world] section");
        DatasetBundle bundle = generate_synthetic_world(cfg.world);
        fs::create_directories(out_dir);
        const std::string users = (fs::path(out_dir) / "users.jsonl").string();
        const std::string rankings = (fs::path(out_dir) / "rankings.jsonl").string();
        save_bundle(bundle, users, rankings);
        std::printf("wrote %s and %s (%zu users)\n", users.c_str(), rankings.c_str(),
                    bundle.users.size());
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "synth error: %s\n", e.what());
        return is_infeasible(e) ? 2 : 1;
    } catch (const AgpError& e) {
        std::fprintf(stderr, "synth error: %s\n", e.what());
        return 2;
    }
}

}  // namespace agp
