// Acceptance suite: one PASS/FAIL line per criterion.
//
// GAPNET_ACCEPTANCE_RUNS overrides the number of resampled Madelon runs
// (default 20, the desk-scale setting; 100 for the full protocol).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "gapnet/clustering.hpp"
#include "gapnet/experiment.hpp"
#include "gapnet/gradcheck.hpp"
#include "gapnet/metrics.hpp"
#include "gapnet/model.hpp"
#include "gapnet/synth.hpp"
#include "../oracles.hpp"
#include "../shapes.hpp"

namespace fs = std::filesystem;
using namespace gapnet;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

char buf[512];

template <class... Args>
std::string fmt(const char* f, Args... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

GappedDataset preset_madelon(std::uint64_t seed) {
    return inject_gaps(generate_madelon(MadelonConfig::paper(seed)), GapPattern::paper());
}

std::size_t acceptance_runs() {
    if (const char* env = std::getenv("GAPNET_ACCEPTANCE_RUNS")) return std::stoul(env);
    return 20;
}

// --- 1 and 7: the Madelon benchmark -----------------------------------------

BenchmarkReport madelon_benchmark() {
    const GappedDataset ds = preset_madelon(0);
    ExperimentConfig cfg;
    cfg.train.epochs = 2000;
    cfg.train.dropout_rate = 0.5;
    cfg.runs = acceptance_runs();
    cfg.both_freeze_modes = false;
    return run_benchmark(ds, signature_clusters(ds), cfg);
}

Outcome criterion_madelon(const BenchmarkReport& rep) {
    Outcome o;
    const ModelSummary* g = rep.find(kGapNet);
    const ModelSummary* v = rep.find(kVanilla);
    const double diff = g->aggregate.auc_mean - v->aggregate.auc_mean;
    const double p = rep.pooled_delong ? rep.pooled_delong->p : 1.0;
    const double z = rep.pooled_delong ? rep.pooled_delong->z : 0.0;
    o.detail = fmt("%zu runs: GapNet AUC %.3f+-%.3f, vanilla %.3f+-%.3f, difference %.3f, DeLong z=%.2f p=%.2e",
                   rep.runs.size(), g->aggregate.auc_mean, g->aggregate.auc_std, v->aggregate.auc_mean,
                   v->aggregate.auc_std, diff, z, p);
    const std::string summary = o.detail;
    o.require(diff >= 0.10, "mean AUC difference below 0.10; " + summary);
    o.require(p < 0.01, "pooled DeLong p not below 0.01; " + summary);
    o.require(g->aggregate.auc_std <= v->aggregate.auc_std, "GapNet AUC std exceeds vanilla; " + summary);
    return o;
}

Outcome criterion_freezing(const BenchmarkReport& rep) {
    Outcome o;
    std::size_t held = 0;
    for (const auto& r : rep.runs) held += r.bodies_unchanged;
    o.detail = fmt("bodies bit-identical in %zu of %zu runs", held, rep.runs.size());
    o.require(held == rep.runs.size() && rep.freeze_contract_held, o.detail);
    return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome criterion_architecture() {
    Outcome o;
    RandomStream rng(1);
    const std::pair<std::size_t, std::size_t> shapes[] = {{40, 80}, {25, 50}, {15, 30}, {82, 164}, {5, 10}};
    for (auto [in, hidden] : shapes) {
        FeatureCluster c{"c", {}};
        for (std::size_t i = 0; i < in; ++i) c.features.push_back(i);
        for (const MlpNetwork& net : {build_subnet(c, 2, 0.5, rng), build_vanilla(in, 2, 0.5, rng)}) {
            std::vector<std::size_t> w{net.input_width()};
            for (const auto& l : net.layers()) w.push_back(l.fan_out());
            o.require(w == std::vector<std::size_t>{in, hidden, hidden, 1},
                      fmt("input width %zu built wrong hidden widths", in));
        }
    }
    o.detail = o.pass ? "40->80/80, 25->50/50, 15->30/30, 82->164/164, 5->10/10" : o.detail;
    return o;
}

// --- 3 ----------------------------------------------------------------------

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Matrix m(r, c);
    for (double& v : m.values()) v = n(rng);
    return m;
}

std::vector<int> random_labels(std::size_t n, std::uint64_t seed) {
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
    std::mt19937_64 rng(seed);
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

// Zero biases leave ReLU units exactly on the kink when a layer's input is
// all zero; small random biases keep the check at a differentiable point.
void offset_biases(std::vector<DenseLayer*> layers, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto* l : layers)
        for (double& b : l->biases) b = n(rng);
}

Outcome criterion_gradients() {
    Outcome o;
    constexpr double kStep = 1e-5;
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::size_t inputs : {40u, 25u, 15u, 82u, 5u, 4u, 1u}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            RandomStream rng(seed);
            MlpNetwork net = build_classifier(inputs, 2 * inputs, 0.0, rng);
            std::vector<DenseLayer*> layers;
            for (auto& l : net.layers()) layers.push_back(&l);
            offset_biases(layers, seed + 1000);
            const Matrix x = random_matrix(6, inputs, seed + 100);
            const auto y = random_labels(6, seed + 200);
            const auto analytic = flatten(backprop(net, forward(net, x, Mode::Infer), y).refs());
            const auto numeric = finite_diff_grad(net, x, y, kStep);
            const double err = max_relative_error(analytic, numeric);
            worst = std::max(worst, err);
            ++checks;
            o.require(err < 1e-4, fmt("MLP with %zu inputs, seed %llu: relative error %.2e", inputs,
                                      static_cast<unsigned long long>(seed), err));
        }
    }
    // fused two-stage model with trainable bodies (clusters of 25 and 15 inputs)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RandomStream rng(seed);
        std::vector<MlpClassifier> subnets;
        for (auto [begin, count] : {std::pair<std::size_t, std::size_t>{0, 25}, {25, 15}}) {
            FeatureCluster c{"c", {}};
            for (std::size_t i = 0; i < count; ++i) c.features.push_back(begin + i);
            subnets.push_back({c.name, c.features, build_subnet(c, 2, 0.0, rng)});
        }
        GapNetModel model = fuse(subnets, false, rng);
        std::vector<DenseLayer*> layers{&model.fusion()};
        for (auto& b : model.bodies())
            for (auto& l : b.body.layers()) layers.push_back(&l);
        offset_biases(layers, seed + 2000);
        const Matrix x = random_matrix(6, 40, seed + 300);
        const auto y = random_labels(6, seed + 400);
        const auto analytic = flatten(model.backprop(model.forward(x, Mode::Infer, nullptr), y).refs());
        const auto numeric = finite_diff_grad(model.parameters(), [&] { return bce_loss(model.predict(x), y); }, kStep);
        const double err = max_relative_error(analytic, numeric);
        worst = std::max(worst, err);
        ++checks;
        o.require(err < 1e-4, fmt("GapNet seed %llu: relative error %.2e", static_cast<unsigned long long>(seed), err));
    }
    if (o.pass) o.detail = fmt("%zu networks (7 MLP families + fused GapNet, 10 seeds), max relative error %.2e", checks, worst);
    return o;
}

// --- 4 and 5 ----------------------------------------------------------------

struct Instance {
    std::vector<double> a, b;
    std::vector<int> labels;
};

Instance random_instance(std::mt19937_64& rng, std::size_t max_n, std::size_t per_class) {
    std::uniform_int_distribution<std::size_t> size(2 * per_class, max_n);
    std::uniform_int_distribution<int> grid(0, 5);
    std::normal_distribution<double> noise;
    Instance in;
    const std::size_t n = size(rng);
    for (std::size_t i = 0; i < n; ++i)
        in.labels.push_back(i < per_class ? 0 : i < 2 * per_class ? 1 : static_cast<int>(rng() % 2));
    std::shuffle(in.labels.begin(), in.labels.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
        in.a.push_back(grid(rng) / 5.0 + 0.2 * in.labels[i]);  // coarse grid: plenty of ties
        in.b.push_back(rng() % 3 == 0 ? in.a.back() : noise(rng));
    }
    return in;
}

Outcome criterion_auc() {
    Outcome o;
    std::mt19937_64 rng(4);
    double worst_area = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Instance in = random_instance(rng, 12, 1);
        const double fast = auc(in.a, in.labels);
        o.require(fast == oracles::brute_auc(in.a, in.labels), fmt("instance %d: AUC differs from pairwise count", t));
        const double gap = std::abs(roc_curve(in.a, in.labels).area() - fast);
        worst_area = std::max(worst_area, gap);
        o.require(gap <= 1e-12, fmt("instance %d: trapezoidal area off by %.2e", t, gap));
    }
    if (o.pass) o.detail = fmt("1000 instances exact; max |trapezoid - AUC| = %.1e", worst_area);
    return o;
}

Outcome criterion_delong() {
    Outcome o;
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const Instance in = random_instance(rng, 12, 2);
        const DelongResult same = delong_test(in.a, in.a, in.labels);
        o.require(same.z == 0.0 && same.p == 1.0, fmt("instance %d: identical scores gave z=%g p=%g", t, same.z, same.p));
    }
    double worst_var = 0.0, worst_p = 0.0;
    int compared = 0;
    while (compared < 200) {
        const Instance in = random_instance(rng, 12, 2);
        const double var = oracles::brute_delong_variance(in.a, in.b, in.labels);
        if (!(var > 0.0)) continue;  // equal-AUC degenerate cases are covered above
        const DelongResult r = delong_test(in.a, in.b, in.labels);
        const double dv = std::abs(r.variance - var);
        const double phi = 0.5 * std::erfc(-std::abs(r.z) / std::sqrt(2.0));
        const double dp = std::abs(r.p - 2.0 * (1.0 - phi));
        worst_var = std::max(worst_var, dv);
        worst_p = std::max(worst_p, dp);
        o.require(dv <= 1e-10, fmt("instance %d: variance off by %.2e", compared, dv));
        o.require(dp <= 1e-12, fmt("instance %d: p off by %.2e", compared, dp));
        ++compared;
    }
    if (o.pass)
        o.detail = fmt("identical inputs z=0 p=1; 200 instances, max variance error %.1e, max p error %.1e", worst_var,
                       worst_p);
    return o;
}

// --- 6 ----------------------------------------------------------------------

Outcome criterion_split() {
    Outcome o;
    const GappedDataset madelon = preset_madelon(0);
    const GappedDataset covid = shapes::covid();
    const GappedDataset adni = shapes::adni();
    const ClusterPlan madelon_plan = signature_clusters(madelon);
    const ClusterPlan covid_plan = signature_clusters(covid);
    const ClusterPlan adni_plan = signature_clusters(adni);
    const struct {
        const GappedDataset* ds;
        const ClusterPlan* plan;
    } cases[] = {{&madelon, &madelon_plan}, {&covid, &covid_plan}, {&adni, &adni_plan}};
    std::mt19937_64 seeds(6);
    for (int t = 0; t < 1000; ++t) {
        const auto& c = cases[t % 3];
        const DataSplit s = split(*c.ds, 0.2, seeds());
        const std::set<std::size_t> test(s.test_rows.begin(), s.test_rows.end());
        const RowIndices complete = complete_rows(*c.ds);
        for (std::size_t r : s.test_rows)
            o.require(std::binary_search(complete.begin(), complete.end(), r), fmt("split %d: incomplete test row", t));
        auto clean = [&](const RowIndices& rows) {
            return std::none_of(rows.begin(), rows.end(), [&](std::size_t r) { return test.count(r) > 0; });
        };
        for (const auto& cl : c.plan->clusters)
            o.require(clean(stage1_training_rows(*c.ds, cl, s)), fmt("split %d: test row in a stage-I set", t));
        o.require(clean(stage2_training_rows(*c.ds, s)), fmt("split %d: test row in the stage-II set", t));
        o.require(clean(vanilla_training_rows(*c.ds, s)), fmt("split %d: test row in the vanilla set", t));
    }
    const DataSplit cs = split(covid, 0.2, 1), ms = split(madelon, 0.2, 1);
    o.require(cs.test_rows.size() == 100 && cs.train_rows.size() == 3826,
              fmt("Covid shape split %zu/%zu", cs.test_rows.size(), cs.train_rows.size()));
    o.require(ms.test_rows.size() == 20 && ms.train_rows.size() == 980,
              fmt("Madelon split %zu/%zu", ms.test_rows.size(), ms.train_rows.size()));
    if (o.pass) o.detail = "1000 splits clean; Covid shape 100/3826; Madelon 20/980";
    return o;
}

// --- 8 ----------------------------------------------------------------------

Outcome criterion_clustering() {
    Outcome o;
    const GappedDataset ds = preset_madelon(0);
    const ClusterPlan plan = signature_clusters(ds);
    FeatureIndices first(25), second(15);
    std::iota(first.begin(), first.end(), 0);
    std::iota(second.begin(), second.end(), 25);
    o.require(plan.clusters.size() == 2, fmt("%zu clusters instead of 2", plan.clusters.size()));
    if (plan.clusters.size() == 2) {
        o.require(plan.clusters[0].features == first && plan.clusters[1].features == second,
                  "clusters are not {x1..x25} and {x26..x40}");
        o.require(plan.complete_counts == std::vector<std::size_t>{550, 550}, "complete counts are not 550/550");
    }
    std::mt19937_64 rng(8);
    std::bernoulli_distribution bit(0.6);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t rows = 3 + t % 10, cols = 2 + t % 9;
        std::vector<std::vector<int>> patterns(4, std::vector<int>(rows));
        for (auto& p : patterns)
            for (auto& b : p) b = bit(rng);
        std::vector<std::pair<std::size_t, std::vector<int>>> groups;
        std::vector<std::vector<int>> by_col(cols);
        for (auto& c : by_col) c = patterns[pick(rng)];
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<int> row;
            for (std::size_t f = 0; f < cols; ++f) row.push_back(by_col[f][r]);
            groups.push_back({1, row});
        }
        const ClusterPlan p = signature_clusters(shapes::from_groups(cols, groups));
        std::vector<int> seen(cols, 0);
        for (const auto& c : p.clusters)
            for (std::size_t f : c.features) ++seen[f];
        for (std::size_t f : p.uncovered) ++seen[f];
        o.require(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }),
                  fmt("mask %d: features not partitioned", t));
        // members of a cluster share a presence column; different clusters differ
        for (std::size_t i = 0; i < p.clusters.size(); ++i) {
            for (std::size_t f : p.clusters[i].features)
                o.require(by_col[f] == by_col[p.clusters[i].features.front()], fmt("mask %d: mixed cluster", t));
            for (std::size_t j = i + 1; j < p.clusters.size(); ++j)
                o.require(by_col[p.clusters[i].features.front()] != by_col[p.clusters[j].features.front()],
                          fmt("mask %d: duplicate signature", t));
        }
    }
    if (o.pass) o.detail = "{x1..x25} and {x26..x40}, 550/550; partition held on 1000 random masks";
    return o;
}

// --- 9 ----------------------------------------------------------------------

Outcome criterion_importance() {
    Outcome o;
    // dead input: every weight leaving feature 3 is zero in a fused model
    RandomStream rng(9);
    std::vector<MlpClassifier> subnets;
    for (auto [begin, count] : {std::pair<std::size_t, std::size_t>{0, 5}, {5, 3}}) {
        FeatureCluster c{"c", {}};
        for (std::size_t i = 0; i < count; ++i) c.features.push_back(begin + i);
        subnets.push_back({c.name, c.features, build_subnet(c, 2, 0.5, rng)});
    }
    GapNetModel model = fuse(subnets, true, rng);
    auto& first = model.bodies()[0].body.layers()[0];
    for (std::size_t o2 = 0; o2 < first.fan_out(); ++o2) first.weights(3, o2) = 0.0;
    const Matrix x = random_matrix(60, 8, 10);
    std::vector<int> y;
    for (std::size_t i = 0; i < 60; ++i) y.push_back(x(i, 0) + x(i, 6) > 0.0);
    const Scorer scorer = [&](const Matrix& m) { return model.predict(m); };
    const FeatureIndices used = model.used_features();
    const ImportanceReport rep = importance_report(scorer, x, y, used, 25, 3);
    const double dead = std::abs(rep.features[3].mean_drop);
    o.require(dead <= 1e-12, fmt("dead input drop %.2e", dead));

    // 8-row single-feature threshold model against all 8! column orders
    const std::vector<double> x0{0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.6, 0.4};
    const std::vector<int> y8{0, 1, 0, 1, 1, 0, 1, 0};
    Matrix toy(8, 1);
    for (std::size_t i = 0; i < 8; ++i) toy(i, 0) = x0[i];
    const Scorer threshold = [](const Matrix& m) {
        std::vector<double> s;
        for (std::size_t i = 0; i < m.rows(); ++i) s.push_back(m(i, 0) >= 0.5 ? 1.0 : 0.0);
        return s;
    };
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> base_scores;
    for (double v : x0) base_scores.push_back(v >= 0.5 ? 1.0 : 0.0);
    const double base = oracles::brute_auc(base_scores, y8);
    double total = 0.0;
    std::size_t count = 0;
    do {
        std::vector<double> s;
        for (std::size_t i = 0; i < 8; ++i) s.push_back(x0[perm[i]] >= 0.5 ? 1.0 : 0.0);
        total += base - oracles::brute_auc(s, y8);
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double expected = total / static_cast<double>(count);
    std::vector<std::size_t> state(8);
    std::iota(state.begin(), state.end(), 0);
    const Permuter enumerate = [&](std::vector<std::size_t>& order) {
        order = state;
        std::next_permutation(state.begin(), state.end());
    };
    const PermutationResult r = permutation_importance(threshold, toy, y8, 0, count, enumerate);
    const double gap = std::abs(r.mean_drop - expected);
    o.require(gap <= 1e-10, fmt("exhaustive average %.12f vs %.12f", expected, r.mean_drop));
    if (o.pass) o.detail = fmt("dead input drop %.1e; 8-row toy drop %.6f matches all %zu orders (diff %.1e)", dead,
                               r.mean_drop, count, gap);
    return o;
}

// --- 10 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_reproducibility() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "gapnet_acceptance_repro";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto cli = [&](const std::string& args) {
        const std::string cmd = "cd '" + dir.string() + "' && '" GAPNET_CLI_PATH "' " + args + " > /dev/null";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    o.require(cli("synth --paper-madelon --seed 0 -o madelon.csv") == 0, "synth failed");
    const std::string bench = " benchmark --data madelon.csv --runs 6 --epochs 200 --seed 42";
    o.require(cli("--out-dir a" + bench + " --jobs 1") == 0, "first benchmark failed");
    o.require(cli("--out-dir b" + bench + " --jobs 1") == 0, "second benchmark failed");
    o.require(cli("--out-dir c" + bench + " --jobs 4") == 0, "benchmark with 4 jobs failed");
    if (!o.pass) return o;
    const auto hash_a = slurp(dir / "a" / "manifest.json");
    std::size_t compared = 0;
    for (const char* f : {"benchmark_report.json", "roc.csv", "histogram.csv", "run_aucs.csv"}) {
        const std::string ref = slurp(dir / "a" / f);
        o.require(!ref.empty(), std::string(f) + " missing");
        o.require(ref == slurp(dir / "b" / f), std::string(f) + " differs between identical invocations");
        o.require(ref == slurp(dir / "c" / f), std::string(f) + " differs between --jobs 1 and --jobs 4");
        ++compared;
    }
    if (o.pass) o.detail = fmt("%zu numeric reports byte-identical across 2 runs with --jobs 1 and 1 with --jobs 4", compared);
    fs::remove_all(dir);
    return o;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    };

    report(2, "architecture", criterion_architecture);
    report(3, "gradient check", criterion_gradients);
    report(4, "AUC oracle", criterion_auc);
    report(5, "DeLong", criterion_delong);
    report(6, "split and exclusion", criterion_split);
    report(8, "clustering", criterion_clustering);
    report(9, "permutation importance", criterion_importance);
    report(10, "reproducibility", criterion_reproducibility);

    std::optional<BenchmarkReport> bench;
    std::string bench_error;
    const auto start = std::chrono::steady_clock::now();
    try {
        bench = madelon_benchmark();
    } catch (const std::exception& e) {
        bench_error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("(Madelon benchmark: %zu runs in %.1fs)\n", acceptance_runs(), secs);
    auto from_bench = [&](const std::function<Outcome(const BenchmarkReport&)>& f) {
        return [&, f] {
            if (!bench) return Outcome{false, "benchmark failed: " + bench_error};
            return f(*bench);
        };
    };
    report(1, "Madelon reproduction", from_bench(criterion_madelon));
    report(7, "freezing contract", from_bench(criterion_freezing));

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
