#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "agp/cli.hpp"
#include "agp/errors.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string run_dir;
    std::string backend;
    int batch_size = -1;
    int history_len = -1;
    int max_epochs = -1;
    int patience = -1;
    long long seed = -1;
    int parallelism = -1;
    int n_train = -1;
    int n_eval = -1;
    long long split_seed = -1;
    bool allow_overlap = false;
    bool no_summarization = false;
    bool no_pbf = false;
};

void add_common_flags(CLI::App* app, CommonFlags& flags, bool with_train_flags) {
    app->add_option("--config", flags.config_path, "config file path")->required();
    app->add_option("--run-dir", flags.run_dir, "run directory override");
    app->add_option("--backend", flags.backend, "backend override: mock or http");
    app->add_option("--n-train", flags.n_train, "train split size override");
    app->add_option("--n-eval", flags.n_eval, "eval split size override");
    app->add_option("--split-seed", flags.split_seed, "split seed override");
    app->add_flag("--allow-overlap", flags.allow_overlap,
                  "allow train and eval splits to overlap");
    if (with_train_flags) {
        app->add_option("--batch-size", flags.batch_size, "batch size override");
        app->add_option("--history-len", flags.history_len, "history length override");
        app->add_option("--max-epochs", flags.max_epochs, "epoch cap override");
        app->add_option("--patience", flags.patience, "early-stopping patience override");
        app->add_option("--seed", flags.seed, "training seed override");
        app->add_option("--parallelism", flags.parallelism, "per-batch parallelism override");
        app->add_flag("--no-summarization", flags.no_summarization,
                      "disable batch feedback summarization");
        app->add_flag("--no-pbf", flags.no_pbf, "disable position-based feedback");
    }
}

agp::AppConfig resolve_config(const CommonFlags& flags) {
    agp::AppConfig cfg = agp::load_config(flags.config_path);
    if (!flags.run_dir.empty()) cfg.run_dir = flags.run_dir;
    if (!flags.backend.empty()) {
        if (flags.backend != "mock" && flags.backend != "http")
            throw agp::ConfigError("--backend must be mock or http");
        cfg.backend = flags.backend;
    }
    if (flags.batch_size >= 0) cfg.train.batch_size = flags.batch_size;
    if (flags.history_len >= 0) cfg.train.history_len = flags.history_len;
    if (flags.max_epochs >= 0) cfg.train.max_epochs = flags.max_epochs;
    if (flags.patience >= 0) cfg.train.patience = flags.patience;
    if (flags.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.parallelism >= 0) cfg.train.parallelism = flags.parallelism;
    if (flags.n_train >= 0) cfg.n_train = flags.n_train;
    if (flags.n_eval >= 0) cfg.n_eval = flags.n_eval;
    if (flags.split_seed >= 0) cfg.split_seed = static_cast<std::uint64_t>(flags.split_seed);
    if (flags.allow_overlap) cfg.allow_overlap = true;
    if (flags.no_summarization) cfg.train.summarization_enabled = false;
    if (flags.no_pbf) cfg.train.pbf_enabled = false;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agp - batched prompt optimization for LLM recommendation reranking"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    bool resume = false;
    auto* train_cmd = app.add_subcommand("train", "run the training loop");
    add_common_flags(train_cmd, train_flags, true);
    train_cmd->add_flag("--resume", resume, "continue from run.json in the run directory");

    CommonFlags eval_flags;
    std::string mode = "agp";
    int prompt_version = -1;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a rerank mode on the eval split");
    add_common_flags(eval_cmd, eval_flags, true);
    eval_cmd->add_option("--mode", mode, "agp | dir | cot | base")->required();
    eval_cmd->add_option("--prompt-version", prompt_version,
                         "prompt checkpoint version (default: best)");

    int budget_batch = 0, budget_n = 0, budget_epochs = 1;
    auto* budget_cmd = app.add_subcommand("budget", "print expected API-call counts");
    budget_cmd->add_option("--batch-size", budget_batch, "batch size")->required();
    budget_cmd->add_option("--n-train", budget_n, "training users")->required();
    budget_cmd->add_option("--epochs", budget_epochs, "epoch count");

    std::string spec_path, out_dir = "data";
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset to disk");
    synth_cmd->add_option("--spec", spec_path, "config file with a [world] section")->required();
    synth_cmd->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return agp::cmd_train(resolve_config(train_flags), resume);
        if (eval_cmd->parsed())
            return agp::cmd_eval(resolve_config(eval_flags), mode, prompt_version);
        if (budget_cmd->parsed())
            return agp::cmd_budget(budget_batch, budget_n, budget_epochs);
        if (synth_cmd->parsed()) {
            agp::AppConfig cfg = agp::load_config(spec_path);
            return agp::cmd_synth(cfg, out_dir);
        }
    } catch (const agp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const agp::AgpError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
