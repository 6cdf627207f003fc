#include "gapnet/experiment.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "gapnet/error.hpp"

namespace gapnet {
namespace {

bool intersects(const RowIndices& a, const RowIndices& b) {
    RowIndices common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return !common.empty();
}

bool same_bodies(const GapNetModel& a, const GapNetModel& b) {
    if (a.bodies().size() != b.bodies().size()) return false;
    for (std::size_t k = 0; k < a.bodies().size(); ++k)
        if (!(a.bodies()[k].body == b.bodies()[k].body)) return false;
    return true;
}

}  // namespace

void ExperimentConfig::validate() const {
    train.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must be in (0, 1)");
    if (jobs < 1) throw ValidationError("jobs must be >= 1");
    if (!train_vanilla && !train_gapnet) throw ValidationError("nothing to train");
}

std::string cluster_model_name(const std::string& cluster) { return "cluster:" + cluster; }

const ModelScores* RunResult::find(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return &m;
    return nullptr;
}

const ModelSummary* BenchmarkReport::find(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return &m;
    return nullptr;
}

TrainedRun run_once(const GappedDataset& ds, const ClusterPlan& plan, const ExperimentConfig& cfg,
                    std::size_t run_index) {
    cfg.validate();
    TrainedRun out;
    RunResult& r = out.result;
    r.index = run_index;
    r.seed = run_seed(cfg.seed, run_index);

    out.split = split(ds, cfg.test_fraction, derive_seed(r.seed, 7), cfg.stratified);
    const DataSplit& sp = out.split;
    r.test_rows = sp.test_rows;
    r.test_labels = labels_for(ds, sp.test_rows);

    GappedDataset work = ds;
    if (cfg.normalize) {
        out.stats = compute_stats(ds, sp.train_rows);
        work = normalize(ds, *out.stats);
    }
    TrainConfig tc = cfg.train;
    tc.seed = r.seed;

    const RowIndices complete = complete_rows(ds);
    r.exclusion_ok = std::includes(complete.begin(), complete.end(), sp.test_rows.begin(), sp.test_rows.end());

    if (cfg.train_vanilla) {
        const RowIndices rows = vanilla_training_rows(work, sp);
        r.vanilla_train_rows = rows.size();
        r.exclusion_ok = r.exclusion_ok && !intersects(rows, sp.test_rows);
        out.vanilla = train_vanilla(work, sp, tc);
        r.models.push_back({kVanilla, predict(*out.vanilla, work, sp.test_rows)});
    }

    if (cfg.train_gapnet) {
        for (const auto& c : plan.clusters) {
            const RowIndices rows = stage1_training_rows(work, c, sp);
            r.stage1_train_rows.push_back(rows.size());
            r.exclusion_ok = r.exclusion_ok && !intersects(rows, sp.test_rows);
        }
        const RowIndices stage2_rows = stage2_training_rows(work, sp);
        r.stage2_train_rows = stage2_rows.size();
        r.exclusion_ok = r.exclusion_ok && !intersects(stage2_rows, sp.test_rows);

        out.subnets = train_stage1(work, plan, sp, tc);
        RandomStream fuse_rng = make_stream(r.seed, 2);
        const GapNetModel fused = fuse(out.subnets, tc.freeze_bodies, fuse_rng);

        auto train_fused = [&](GapNetModel start) {
            GapNetModel trained = train_stage2(start, work, sp, tc);
            if (start.freeze_bodies() && !same_bodies(start, trained)) r.bodies_unchanged = false;
            return trained;
        };
        out.gapnet = train_fused(fused);
        r.models.push_back({kGapNet, predict(*out.gapnet, work, sp.test_rows)});
        if (cfg.both_freeze_modes) {
            GapNetModel alt = fused;
            alt.set_freeze_bodies(!tc.freeze_bodies);
            out.gapnet_alt = train_fused(std::move(alt));
            r.models.push_back({tc.freeze_bodies ? kGapNetFinetuned : kGapNetFrozen,
                                predict(*out.gapnet_alt, work, sp.test_rows)});
        }
        for (const auto& s : out.subnets) r.models.push_back({cluster_model_name(s.name), predict(s, work, sp.test_rows)});
    }
    return out;
}

BenchmarkReport summarize(const ExperimentConfig& cfg, std::vector<RunResult> runs) {
    if (runs.size() < 2) throw ValidationError("benchmark needs at least two runs");
    BenchmarkReport report;
    report.config = cfg;

    std::vector<std::string> names;
    for (const auto& m : runs.front().models) names.push_back(m.name);

    for (const auto& name : names) {
        ModelSummary summary;
        summary.name = name;
        std::vector<RocCurve> curves;
        std::vector<double> aucs;
        std::array<std::vector<double>, 4> per_metric;
        for (const auto& run : runs) {
            const ModelScores* ms = run.find(name);
            if (ms == nullptr) throw TrainingError("run " + std::to_string(run.index) + " has no scores for " + name);
            curves.push_back(roc_curve(ms->scores, run.test_labels));
            aucs.push_back(auc(ms->scores, run.test_labels));
            const ConfusionCounts c = confusion_at(ms->scores, run.test_labels, 0.5);
            summary.metrics.pooled.tp += c.tp;
            summary.metrics.pooled.fp += c.fp;
            summary.metrics.pooled.tn += c.tn;
            summary.metrics.pooled.fn += c.fn;
            const MetricReport mr = metrics(c);
            const std::optional<double> vals[4] = {mr.sensitivity, mr.specificity, mr.accuracy, mr.precision};
            for (int k = 0; k < 4; ++k)
                if (vals[k]) per_metric[k].push_back(*vals[k]);
        }
        summary.aggregate = aggregate_runs(curves, aucs, cfg.aggregate);
        std::optional<double>* targets[4] = {&summary.metrics.sensitivity, &summary.metrics.specificity,
                                             &summary.metrics.accuracy, &summary.metrics.precision};
        for (int k = 0; k < 4; ++k) {
            summary.metrics.runs_defined[k] = per_metric[k].size();
            if (!per_metric[k].empty()) *targets[k] = mean(per_metric[k]);
        }
        report.models.push_back(std::move(summary));
    }

    // Fixed models first, then single-cluster models by descending median AUC.
    auto is_cluster = [](const ModelSummary& m) { return m.name.rfind("cluster:", 0) == 0; };
    std::stable_partition(report.models.begin(), report.models.end(), [&](const ModelSummary& m) { return !is_cluster(m); });
    const auto first_cluster = std::find_if(report.models.begin(), report.models.end(), is_cluster);
    std::stable_sort(first_cluster, report.models.end(), [](const ModelSummary& a, const ModelSummary& b) {
        return a.aggregate.auc_summary.median > b.aggregate.auc_summary.median;
    });
    std::vector<const ModelSummary*> ranked;
    for (const auto& m : report.models) ranked.push_back(&m);
    std::stable_sort(ranked.begin(), ranked.end(), [](const ModelSummary* a, const ModelSummary* b) {
        return a->aggregate.auc_summary.median > b->aggregate.auc_summary.median;
    });
    for (const auto* m : ranked) report.median_ranking.push_back(m->name);

    const bool comparable = runs.front().find(kGapNet) && runs.front().find(kVanilla);
    if (comparable) {
        std::vector<double> pooled_g, pooled_v;
        std::vector<int> pooled_y;
        for (const auto& run : runs) {
            const auto& g = run.find(kGapNet)->scores;
            const auto& v = run.find(kVanilla)->scores;
            pooled_g.insert(pooled_g.end(), g.begin(), g.end());
            pooled_v.insert(pooled_v.end(), v.begin(), v.end());
            pooled_y.insert(pooled_y.end(), run.test_labels.begin(), run.test_labels.end());
            try {
                report.per_run_delong.push_back(delong_test(g, v, run.test_labels));
            } catch (const std::exception&) {
                report.per_run_delong.push_back(std::nullopt);
            }
        }
        try {
            report.pooled_delong = delong_test(pooled_g, pooled_v, pooled_y);
        } catch (const std::exception&) {
            report.pooled_delong = std::nullopt;
        }
    }
    for (const auto& run : runs) {
        report.freeze_contract_held = report.freeze_contract_held && run.bodies_unchanged;
        report.exclusion_held = report.exclusion_held && run.exclusion_ok;
    }
    report.runs = std::move(runs);
    return report;
}

BenchmarkReport run_benchmark(const GappedDataset& ds, const ClusterPlan& plan, const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.runs < 2) throw ValidationError("benchmark needs at least two runs");
    const long n = static_cast<long>(cfg.runs);
    std::vector<std::optional<RunResult>> results(cfg.runs);
    std::vector<std::string> errors(cfg.runs);
    std::vector<bool> validation(cfg.runs, false);

#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
    for (long i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            results[idx] = run_once(ds, plan, cfg, idx).result;
        } catch (const ValidationError& e) {
            errors[idx] = e.what();
            validation[idx] = true;
        } catch (const std::exception& e) {
            errors[idx] = e.what();
        }
    }

    std::vector<RunResult> runs;
    for (std::size_t i = 0; i < cfg.runs; ++i) {
        if (!results[i]) {
            const std::string msg = "run " + std::to_string(i) + " (seed " + std::to_string(run_seed(cfg.seed, i)) +
                                    ") failed: " + errors[i];
            if (validation[i]) throw ValidationError(msg);
            throw TrainingError(msg);
        }
        runs.push_back(std::move(*results[i]));
    }
    return summarize(cfg, std::move(runs));
}

}  // namespace gapnet
