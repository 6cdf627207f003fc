#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "gapnet/clustering.hpp"
#include "gapnet/error.hpp"
#include "gapnet/experiment.hpp"
#include "gapnet/report.hpp"
#include "gapnet/synth.hpp"

using namespace gapnet;

namespace {

// Small gapped Madelon: 200 rows, 3 clusters, 40 complete rows (121-160).
GappedDataset toy() {
    MadelonConfig cfg = MadelonConfig::paper(3);
    cfg.n_samples = 200;
    GapPattern gaps{{{0, 80, 0, 15}, {80, 120, 35, 40}, {160, 200, 15, 35}}};
    return inject_gaps(generate_madelon(cfg), gaps);
}

ExperimentConfig quick(std::size_t runs) {
    ExperimentConfig cfg;
    cfg.train.epochs = 15;
    cfg.runs = runs;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("run seeds do not depend on job count") {
    CHECK(run_seed(11, 0) == 11);
    CHECK(run_seed(11, 3) == (11u ^ 3u));
}

TEST_CASE("one run trains every model and keeps test rows out") {
    const GappedDataset ds = toy();
    const ClusterPlan plan = signature_clusters(ds);
    REQUIRE(plan.clusters.size() == 3);
    const TrainedRun run = run_once(ds, plan, quick(1), 0);
    const RunResult& r = run.result;
    CHECK(r.seed == 11);
    CHECK(r.test_rows.size() == 8);
    CHECK(r.exclusion_ok);
    CHECK(r.bodies_unchanged);
    CHECK(r.find(kGapNet) != nullptr);
    CHECK(r.find(kGapNetFinetuned) != nullptr);
    CHECK(r.find(kVanilla) != nullptr);
    for (const auto& c : plan.clusters) CHECK(r.find(cluster_model_name(c.name)) != nullptr);
    for (const auto& m : r.models) CHECK(m.scores.size() == r.test_rows.size());
    CHECK(r.vanilla_train_rows == 32);
    CHECK(r.stage2_train_rows == 32);
    CHECK(r.stage1_train_rows.size() == 3);
    for (std::size_t k = 0; k < plan.clusters.size(); ++k)
        CHECK(r.stage1_train_rows[k] == plan.complete_counts[k] - 8);
    for (std::size_t k = 0; k < run.subnets.size(); ++k) {
        // frozen bodies differ only in their trainable flag
        MlpNetwork body = run.subnets[k].net.without_head();
        body.set_trainable(false);
        CHECK(run.gapnet->bodies()[k].body == body);
    }
    CHECK(run.gapnet->freeze_bodies());
    CHECK_FALSE(run.gapnet_alt->freeze_bodies());
    // same index, same result
    CHECK(run_once(ds, plan, quick(1), 0).result.models[0].scores == r.models[0].scores);
}

TEST_CASE("unfrozen primary model is reported under its own name") {
    ExperimentConfig cfg = quick(1);
    cfg.train.freeze_bodies = false;
    const GappedDataset ds = toy();
    const RunResult r = run_once(ds, signature_clusters(ds), cfg, 0).result;
    CHECK(r.find(kGapNetFrozen) != nullptr);
    CHECK(r.find(kGapNetFinetuned) == nullptr);
}

TEST_CASE("benchmark smoke test emits every report section") {
    const GappedDataset ds = toy();
    const ClusterPlan plan = signature_clusters(ds);
    const BenchmarkReport rep = run_benchmark(ds, plan, quick(2));
    CHECK(rep.runs.size() == 2);
    CHECK(rep.freeze_contract_held);
    CHECK(rep.exclusion_held);
    REQUIRE(rep.models.size() == 3 + plan.clusters.size());
    CHECK(rep.models[0].name == kVanilla);
    CHECK(rep.models[1].name == kGapNet);
    CHECK(rep.models[2].name == kGapNetFinetuned);
    for (std::size_t i = 4; i < rep.models.size(); ++i)
        CHECK(rep.models[i - 1].aggregate.auc_summary.median >= rep.models[i].aggregate.auc_summary.median);
    for (const auto& m : rep.models) {
        CHECK(m.aggregate.aucs.size() == 2);
        CHECK(m.aggregate.fpr_grid.size() == 101);
    }
    CHECK(rep.pooled_delong.has_value());
    CHECK(rep.per_run_delong.size() == 2);
    CHECK(rep.median_ranking.size() == rep.models.size());

    const Json j = to_json(rep);
    for (const char* key : {"config", "models", "median_ranking", "delong_gapnet_vs_vanilla", "freeze_contract_held",
                            "exclusion_held", "runs"})
        CHECK(j.contains(key));
    CHECK(!roc_csv(rep).empty());
    CHECK(!histogram_csv(rep).empty());
    CHECK(!run_auc_csv(rep).empty());
}

TEST_CASE("benchmark output is independent of the job count") {
    const GappedDataset ds = toy();
    const ClusterPlan plan = signature_clusters(ds);
    ExperimentConfig one = quick(4), many = quick(4);
    many.jobs = 4;
    Json a = to_json(run_benchmark(ds, plan, one));
    Json b = to_json(run_benchmark(ds, plan, many));
    a["config"].erase("jobs");
    b["config"].erase("jobs");
    CHECK(a.dump() == b.dump());
}

TEST_CASE("a failing run names its seed") {
    // two complete rows, both drawn for testing: nothing left to train the baseline
    const GappedDataset ds = parse_csv("a,b,label\n1,2,0\n2,3,1\n1,,0\n,4,1\n3,,1\n,1,0\n");
    ExperimentConfig cfg = quick(2);
    cfg.test_fraction = 0.99;
    try {
        run_benchmark(ds, signature_clusters(ds), cfg);
        FAIL("expected a failure");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("seed 11") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = quick(1);
    const GappedDataset ds = toy();
    CHECK_THROWS_AS(run_benchmark(ds, signature_clusters(ds), cfg), ValidationError);  // runs < 2
    cfg = quick(2);
    cfg.jobs = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = quick(2);
    cfg.test_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
