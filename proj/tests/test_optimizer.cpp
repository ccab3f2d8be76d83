#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "agp/errors.hpp"
#include "agp/mock_world.hpp"
#include "agp/optimizer.hpp"
#include "agp/synth.hpp"
#include "helpers.hpp"

using namespace agp;
using namespace agp::test;
namespace fs = std::filesystem;

namespace {

FeedbackSet feedback_with(const std::string& uid, double avg_pos, const std::string& diagnosis) {
    FeedbackSet fs;
    fs.user_id = uid;
    fs.avg_pos = avg_pos;
    fs.weight = 1.0 / avg_pos;
    FeedbackPair pair;
    pair.item_id = "g_" + uid;
    pair.title = "G [fantasy]";
    pair.actual_pos = static_cast<int>(avg_pos);
    pair.target_pos = 1;
    fs.pairs = {pair};
    fs.diagnosis = diagnosis;
    return fs;
}

TrainConfig quick_config(int batch_size, std::uint64_t seed = 11) {
    TrainConfig cfg;
    cfg.batch_size = batch_size;
    cfg.history_len = 5;
    cfg.max_epochs = 10;
    cfg.patience = 3;
    cfg.seed = seed;
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("agp_opt_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("intensity thresholds") {
    CHECK(intensity_for(1.0) == Intensity::light);
    CHECK(intensity_for(0.5) == Intensity::light);
    CHECK(intensity_for(0.49) == Intensity::moderate);
    CHECK(intensity_for(0.2) == Intensity::moderate);
    CHECK(intensity_for(0.15) == Intensity::aggressive);
}

TEST_CASE("summarize_batch orders diagnoses by weight with emphasis labels") {
    ScriptedBackend backend({"summary text"});
    Gateway gw(backend);
    TrainConfig cfg;
    auto heavy = feedback_with("uH", 1.0, "heavy diagnosis");
    auto light = feedback_with("uL", 5.0, "light diagnosis");
    auto summary = summarize_batch({light, heavy}, cfg, gw);
    REQUIRE(backend.requests.size() == 1);
    const std::string sent = backend.requests[0].full_text();
    auto high = sent.find("[HIGH weight=1.000] user=uH");
    auto low_pos = sent.find("light diagnosis");
    REQUIRE(high != std::string::npos);
    REQUIRE(low_pos != std::string::npos);
    CHECK(high < low_pos);
    CHECK(sent.find("heavy diagnosis") < sent.find("light diagnosis"));
    CHECK(summary.batch_wt == doctest::Approx(1.0 / 3.0));
    CHECK(summary.contributing.size() == 2);
    CHECK(backend.requests[0].purpose == Purpose::summarize);
}

TEST_CASE("disabled summarization concatenates diagnoses and skips the call") {
    ScriptedBackend backend({"should never be used"});
    Gateway gw(backend);
    TrainConfig cfg;
    cfg.summarization_enabled = false;
    auto summary = summarize_batch({feedback_with("u1", 2.0, "alpha"),
                                    feedback_with("u2", 3.0, "beta"),
                                    feedback_with("u3", 4.0, "gamma")},
                                   cfg, gw);
    CHECK(summary.text.find("alpha") != std::string::npos);
    CHECK(summary.text.find("beta") != std::string::npos);
    CHECK(summary.text.find("gamma") != std::string::npos);
    CHECK(gw.ledger().count(Purpose::summarize) == 0);
    CHECK(backend.requests.empty());
}

TEST_CASE("duplicate diagnoses collapse in the mock summary") {
    MockBackend backend(make_mock_world(small_world_spec(1, 4)));
    Gateway gw(backend);
    TrainConfig cfg;
    const std::string dup = "Ground-truth item iX was ranked 4 but should be ranked 1.";
    auto summary =
        summarize_batch({feedback_with("u1", 4.0, dup), feedback_with("u2", 4.0, dup)}, cfg, gw);
    auto first = summary.text.find("ranked 4 should move to position 1");
    REQUIRE(first != std::string::npos);
    CHECK(summary.text.find("ranked 4 should move to position 1", first + 1) ==
          std::string::npos);
}

TEST_CASE("apply_update skips the call entirely at the zero-gradient point") {
    ScriptedBackend backend({"unused"});
    Gateway gw(backend);
    TrainConfig cfg;
    auto prompt = seed_prompt("default");
    BatchFeedbackSummary summary;
    summary.text = "all good";
    summary.batch_wt = 1.0;
    summary.all_at_target = true;
    auto out = apply_update(prompt, summary, cfg, gw);
    CHECK(out.version == 0);
    CHECK(gw.ledger().count(Purpose::optimize) == 0);
    CHECK(backend.requests.empty());
}

TEST_CASE("apply_update renders the intensity directive from the batch weight") {
    auto prompt = seed_prompt("default");
    TrainConfig cfg;
    BatchFeedbackSummary summary;
    summary.text = "fix things";
    summary.all_at_target = false;

    SUBCASE("deep errors request an aggressive rewrite") {
        ScriptedBackend backend({prompt.text + "\nextra line"});
        Gateway gw(backend);
        summary.batch_wt = 0.15;
        apply_update(prompt, summary, cfg, gw);
        REQUIRE(backend.requests.size() == 1);
        CHECK(backend.requests[0].full_text().find("aggressive") != std::string::npos);
        CHECK(backend.requests[0].purpose == Purpose::optimize);
    }
    SUBCASE("mild errors request a light touch") {
        ScriptedBackend backend({prompt.text + "\nextra line"});
        Gateway gw(backend);
        summary.batch_wt = 0.8;
        apply_update(prompt, summary, cfg, gw);
        CHECK(backend.requests[0].full_text().find("light") != std::string::npos);
    }
}

TEST_CASE("apply_update appends the missing token and bumps the version") {
    MockBackend backend(make_mock_world(small_world_spec(1, 4)));
    Gateway gw(backend);
    TrainConfig cfg;
    auto prompt = seed_prompt("default");
    BatchFeedbackSummary summary;
    summary.text = "Recommended prompt instructions: FOCUS_RECURRING_GENRES.";
    summary.batch_wt = 0.4;
    summary.all_at_target = false;
    auto updated = apply_update(prompt, summary, cfg, gw);
    CHECK(updated.version == 1);
    CHECK(updated.parent_version == 0);
    CHECK(updated.created_by == PromptState::Origin::optimizer);
    CHECK(updated.text.find("FOCUS_RECURRING_GENRES") != std::string::npos);
    CHECK(updated.text.find(prompt.text.substr(0, 40)) != std::string::npos);
    CHECK(gw.ledger().count(Purpose::optimize) == 1);
}

TEST_CASE("degenerate optimizer responses leave the prompt unchanged") {
    auto prompt = seed_prompt("default");
    TrainConfig cfg;
    BatchFeedbackSummary summary;
    summary.text = "nothing useful";
    summary.batch_wt = 0.4;
    summary.all_at_target = false;

    SUBCASE("identical text") {
        ScriptedBackend backend({prompt.text});
        Gateway gw(backend);
        auto out = apply_update(prompt, summary, cfg, gw);
        CHECK(out.version == 0);
        CHECK(out.text == prompt.text);
    }
    SUBCASE("empty text") {
        ScriptedBackend backend({"   \n"});
        Gateway gw(backend);
        auto out = apply_update(prompt, summary, cfg, gw);
        CHECK(out.version == 0);
    }
}

TEST_CASE("one training epoch issues the expected ledger activity") {
    auto spec = small_world_spec(11, 24, 0.2);
    auto bundle = sample_split(generate_synthetic_world(spec), 20, 4, 3);
    MockBackend backend(make_mock_world(spec));
    Gateway gw(backend);
    auto cfg = quick_config(5);
    cfg.max_epochs = 1;
    auto state = train(bundle, cfg, seed_prompt("default"), gw);
    REQUIRE(state.history.size() == 1);
    const long expected = expected_calls(5, 20).calls;
    CHECK(state.history[0].train_stage_calls == expected);
    // validation adds one profile and one rerank call per train user
    CHECK(gw.ledger().total() == expected + 2 * 20);
    CHECK(gw.ledger().count(Purpose::summarize) == 4);
    CHECK(gw.ledger().count(Purpose::optimize) == 4);
    CHECK(gw.ledger().count(Purpose::loss) == 20);
}

TEST_CASE("a saturated world stops after patience runs out") {
    // list_length 3 with no noise: the seed prompt already ranks perfectly.
    auto spec = small_world_spec(5, 10, 0.0, 3);
    spec.genre_vocabulary = test_genres(4);
    auto bundle = sample_split(generate_synthetic_world(spec), 8, 2, 1);
    MockBackend backend(make_mock_world(spec));
    Gateway gw(backend);
    auto cfg = quick_config(4, 7);
    cfg.patience = 1;
    auto state = train(bundle, cfg, seed_prompt("default"), gw);
    CHECK(state.epochs_run == 2);  // epoch 1 improves from nothing, epoch 2 exhausts patience
    CHECK(state.stopped_early);
    CHECK(state.lineage.back().version == 0);
    CHECK(gw.ledger().count(Purpose::optimize) == 0);
}

TEST_CASE("training is deterministic across identical runs") {
    auto spec = small_world_spec(11, 24, 0.2);
    auto run = [&] {
        auto bundle = sample_split(generate_synthetic_world(spec), 16, 8, 3);
        MockBackend backend(make_mock_world(spec));
        Gateway gw(backend);
        auto cfg = quick_config(4, 21);
        cfg.max_epochs = 5;
        return train(bundle, cfg, seed_prompt("default"), gw);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_ndcg == b.history[i].train_ndcg);
        CHECK(a.history[i].val_ndcg == b.history[i].val_ndcg);
        CHECK(a.history[i].prompt_version_at_end == b.history[i].prompt_version_at_end);
    }
    REQUIRE(a.lineage.size() == b.lineage.size());
    for (std::size_t i = 0; i < a.lineage.size(); ++i)
        CHECK(a.lineage[i].text == b.lineage[i].text);
    CHECK(a.best_version == b.best_version);
}

TEST_CASE("parallel batches reproduce the serial result") {
    auto spec = small_world_spec(13, 20, 0.2);
    auto run = [&](int parallelism) {
        auto bundle = sample_split(generate_synthetic_world(spec), 12, 4, 3);
        MockBackend backend(make_mock_world(spec));
        Gateway gw(backend);
        auto cfg = quick_config(4, 5);
        cfg.max_epochs = 3;
        cfg.parallelism = parallelism;
        return train(bundle, cfg, seed_prompt("default"), gw);
    };
    auto serial = run(1);
    auto parallel = run(4);
    REQUIRE(serial.history.size() == parallel.history.size());
    for (std::size_t i = 0; i < serial.history.size(); ++i) {
        CHECK(serial.history[i].train_ndcg == parallel.history[i].train_ndcg);
        CHECK(serial.history[i].val_ndcg == parallel.history[i].val_ndcg);
    }
    CHECK(serial.lineage.back().text == parallel.lineage.back().text);
}

TEST_CASE("evaluate_run covers every mode") {
    auto spec = small_world_spec(11, 30, 0.2);
    auto bundle = sample_split(generate_synthetic_world(spec), 16, 12, 3);
    MockBackend backend(make_mock_world(spec));
    Gateway gw(backend);
    auto cfg = quick_config(4, 9);
    cfg.max_epochs = 4;
    auto state = train(bundle, cfg, seed_prompt("default"), gw);
    const PromptState best = state.lineage.back();

    auto base = evaluate_run(bundle, nullptr, RerankMode::base, cfg, gw);
    // base equals the metric of the ingested order
    double expect = 0.0;
    for (const auto& uid : bundle.split.eval) {
        std::vector<std::string> order;
        for (const auto& it : bundle.rankings.at(uid).items) order.push_back(it.item_id);
        expect += ndcg_at_k(order, bundle.users.at(uid).ground_truth, 10);
    }
    expect /= static_cast<double>(bundle.split.eval.size());
    CHECK(base.mean_ndcg_at_k == doctest::Approx(expect).epsilon(1e-12));

    // base mode touches no backend at all
    {
        MockBackend fresh_backend(make_mock_world(spec));
        Gateway fresh_gw(fresh_backend);
        evaluate_run(bundle, nullptr, RerankMode::base, cfg, fresh_gw);
        CHECK(fresh_gw.ledger().total() == 0);
    }

    auto dir = evaluate_run(bundle, nullptr, RerankMode::dir, cfg, gw);
    auto agp_report = evaluate_run(bundle, &best, RerankMode::agp, cfg, gw);
    CHECK(agp_report.mean_ndcg_at_k >= dir.mean_ndcg_at_k);
    CHECK(dir.mean_ndcg_at_k >= base.mean_ndcg_at_k);
    CHECK(agp_report.n_users == 12);

    CHECK_THROWS_AS(evaluate_run(bundle, nullptr, RerankMode::agp, cfg, gw), PreconditionError);
    DatasetBundle no_eval = bundle;
    no_eval.split.eval.clear();
    CHECK_THROWS_AS(evaluate_run(no_eval, nullptr, RerankMode::base, cfg, gw),
                    PreconditionError);
}

TEST_CASE("aborted runs persist state and resume to completion") {
    auto spec = small_world_spec(11, 16, 0.2);
    auto bundle = sample_split(generate_synthetic_world(spec), 12, 4, 3);
    auto dir = fresh_dir("resume");
    RunPersist persist{dir.string()};
    auto cfg = quick_config(4, 31);
    cfg.max_epochs = 3;
    cfg.patience = 3;

    MockBackend inner(make_mock_world(spec));
    // enough calls for epoch 1 (68 + 24 validation) but not epoch 2
    FailAfterBackend flaky(inner, 100);
    GatewayOptions opt;
    opt.retry.max_retries = 0;
    opt.sleeper = [](std::chrono::milliseconds) {};
    Gateway gw1(flaky, opt);
    CHECK_THROWS_AS(train(bundle, cfg, seed_prompt("default"), gw1, &persist), GatewayError);
    REQUIRE(fs::exists(dir / "run.json"));

    auto resumed_state = load_run_state((dir / "run.json").string());
    CHECK(resumed_state.epochs_run >= 1);
    resumed_state.lineage = load_prompt_lineage((dir / "prompts").string());

    MockBackend backend2(make_mock_world(spec));
    Gateway gw2(backend2);
    auto finished = train(bundle, cfg, seed_prompt("default"), gw2, &persist, &resumed_state);
    CHECK(finished.epochs_run == 3);
    CHECK(finished.history.size() == 3);

    // ledger snapshot accumulates across sessions
    CHECK(finished.ledger_snapshot.at("total") > 0);
    const std::string metrics = slurp(dir / "metrics.csv");
    CHECK(metrics.find("2,validation") != std::string::npos);

    // the resumed run reproduces an uninterrupted one
    MockBackend backend3(make_mock_world(spec));
    Gateway gw3(backend3);
    auto straight = train(bundle, cfg, seed_prompt("default"), gw3);
    REQUIRE(straight.history.size() == finished.history.size());
    for (std::size_t i = 0; i < straight.history.size(); ++i) {
        CHECK(straight.history[i].train_ndcg == finished.history[i].train_ndcg);
        CHECK(straight.history[i].val_ndcg == finished.history[i].val_ndcg);
        CHECK(straight.history[i].prompt_version_at_end ==
              finished.history[i].prompt_version_at_end);
    }
    CHECK(straight.lineage.back().text == finished.lineage.back().text);
}

TEST_CASE("train validates its configuration") {
    auto spec = small_world_spec(11, 8, 0.2);
    auto bundle = sample_split(generate_synthetic_world(spec), 6, 2, 3);
    MockBackend backend(make_mock_world(spec));
    Gateway gw(backend);
    auto cfg = quick_config(0);
    CHECK_THROWS_AS(train(bundle, cfg, seed_prompt("default"), gw), ConfigError);
    cfg = quick_config(4);
    cfg.max_epochs = 0;
    CHECK_THROWS_AS(train(bundle, cfg, seed_prompt("default"), gw), ConfigError);
    DatasetBundle empty = bundle;
    empty.split.train.clear();
    CHECK_THROWS_AS(train(empty, quick_config(4), seed_prompt("default"), gw),
                    PreconditionError);
}
