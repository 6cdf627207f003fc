// gapnet: command-line front end.
//
//   gapnet synth      generate the simulated benchmark dataset (CSV)
//   gapnet clusters   list feature clusters of a dataset, or validate a plan file
//   gapnet train      train vanilla and/or GapNet on one split, save models
//   gapnet predict    score dataset rows with a saved model
//   gapnet benchmark  repeated resampling comparison of all models
//   gapnet importance permutation feature importance of a saved model
//
// Exit codes: 0 success, 2 validation error, 3 training/runtime error. Errors
// are printed to stderr as a single JSON object.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gapnet/clustering.hpp"
#include "gapnet/dataset.hpp"
#include "gapnet/error.hpp"
#include "gapnet/experiment.hpp"
#include "gapnet/metrics.hpp"
#include "gapnet/model.hpp"
#include "gapnet/report.hpp"
#include "gapnet/serialize.hpp"
#include "gapnet/synth.hpp"

namespace fs = std::filesystem;
using namespace gapnet;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct DataOptions {
    std::string path;
    std::string label_column = "label";
    std::string missing_token = "NA";

    CsvOptions csv() const { return {missing_token, label_column}; }
};

struct PlanOptions {
    std::string plan_path;
    std::size_t min_support = 0;  // 0 = no merging
};

struct TrainingOptions {
    ExperimentConfig cfg;
    bool paper_epochs = false;
    bool unfreeze = false;
    bool no_stratify = false;
    bool no_normalize = false;
    std::vector<std::string> hidden_overrides;  // "name=width"
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--data", d.path, "Dataset CSV")->required();
    cmd->add_option("--label-column", d.label_column, "Name of the label column")->capture_default_str();
    cmd->add_option("--missing-token", d.missing_token, "Token marking a missing cell")->capture_default_str();
}

void add_plan_options(CLI::App* cmd, PlanOptions& p) {
    cmd->add_option("--plan", p.plan_path, "Cluster plan file (overrides automatic detection)");
    cmd->add_option("--min-support", p.min_support,
                    "Greedily merge automatic clusters while each keeps at least this many complete rows");
}

void add_training_options(CLI::App* cmd, TrainingOptions& t) {
    auto& c = t.cfg;
    cmd->add_option("--epochs", c.train.epochs, "Training epochs for every stage")->capture_default_str();
    cmd->add_flag("--paper-epochs", t.paper_epochs, "2000 epochs, dropout 0.5 (simulated-data setting)");
    cmd->add_option("--learning-rate", c.train.adam.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--beta1", c.train.adam.beta1, "Adam beta1")->capture_default_str();
    cmd->add_option("--beta2", c.train.adam.beta2, "Adam beta2")->capture_default_str();
    cmd->add_option("--adam-epsilon", c.train.adam.epsilon, "Adam epsilon")->capture_default_str();
    cmd->add_option("--batch-size", c.train.batch_size, "Mini-batch size (0 = full batch)")->capture_default_str();
    cmd->add_option("--dropout", c.train.dropout_rate, "Dropout rate after the second hidden layer")
        ->capture_default_str();
    cmd->add_option("--hidden-multiplier", c.train.hidden_multiplier, "Hidden width = multiplier x input width")
        ->capture_default_str();
    cmd->add_option("--hidden-width", t.hidden_overrides, "Per-cluster hidden width override, NAME=WIDTH");
    cmd->add_flag("--unfreeze", t.unfreeze, "Fine-tune sub-network bodies in stage II");
    cmd->add_option("--test-fraction", c.test_fraction, "Fraction of complete rows held out")->capture_default_str();
    cmd->add_flag("--no-stratify", t.no_stratify, "Draw test rows without class stratification");
    cmd->add_flag("--no-normalize", t.no_normalize, "Skip z-score standardization");
    cmd->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
}

void finish_training_options(TrainingOptions& t) {
    if (t.paper_epochs) {
        t.cfg.train.epochs = 2000;
        t.cfg.train.dropout_rate = 0.5;
    }
    t.cfg.train.freeze_bodies = !t.unfreeze;
    t.cfg.stratified = !t.no_stratify;
    t.cfg.normalize = !t.no_normalize;
    for (const auto& o : t.hidden_overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ValidationError("--hidden-width expects NAME=WIDTH, got '" + o + "'");
        t.cfg.train.hidden_overrides[o.substr(0, eq)] = std::stoul(o.substr(eq + 1));
    }
}

ClusterPlan resolve_plan(const GappedDataset& ds, const PlanOptions& p) {
    if (!p.plan_path.empty()) return load_plan(p.plan_path, ds);
    ClusterPlan plan = signature_clusters(ds);
    if (p.min_support > 0) plan = merge_clusters(plan, ds, p.min_support);
    return plan;
}

void require_valid(const ClusterPlan& plan, const GappedDataset& ds) {
    const CoverageReport report = validate_plan(plan, ds);
    if (!report.valid()) throw ValidationError("cluster plan is invalid: " + to_json(report, plan, ds).dump());
}

fs::path output_path(const std::string& out_dir, const std::string& explicit_path, const std::string& name) {
    if (!explicit_path.empty()) return explicit_path;
    return fs::path(out_dir) / name;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Config snapshot plus input hashes; its hash ties every report to a manifest.
struct Manifest {
    std::string command;
    Json config;
    Json inputs = Json::object();
    std::vector<std::uint64_t> run_seeds;
    std::vector<std::string> artifacts;
    Json execution = Json::object();

    std::string config_hash() const {
        const Json keyed{{"command", command}, {"config", config}, {"inputs", inputs}};
        return hex64(fnv1a(keyed.dump()));
    }

    void add_input(const std::string& role, const std::string& path) {
        if (!path.empty()) inputs[role] = {{"file", fs::path(path).filename().string()}, {"fnv1a", file_hash(path)}};
    }

    Json stamp() const {
        return Json{{"library_version", GAPNET_VERSION}, {"config_hash", config_hash()}, {"manifest", "manifest.json"}};
    }

    void write(const fs::path& dir) const {
        Json j{{"library_version", GAPNET_VERSION},
               {"command", command},
               {"config_hash", config_hash()},
               {"config", config},
               {"inputs", inputs},
               {"run_seeds", run_seeds},
               {"artifacts", artifacts},
               {"execution", execution},
               {"created_at", timestamp()}};
        write_text(dir / "manifest.json", j.dump(2) + "\n");
    }
};

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoul(item));
        } else {
            const auto a = std::stoul(item.substr(0, dash)), b = std::stoul(item.substr(dash + 1));
            for (auto i = a; i <= b; ++i) out.push_back(i);
        }
    }
    return out;
}

// --- synth ------------------------------------------------------------------

struct SynthOptions {
    bool no_gaps = false;
    std::size_t samples = 1000;
    std::size_t features = 40;
    std::string informative, redundant, noise;
    double class_sep = 0.3;
    std::size_t clusters_per_class = 2;
    std::uint64_t seed = 0;
    std::vector<std::string> gaps;  // "ROWS:FEATURES", 1-based inclusive ranges
    std::string output;
};

GapBlock parse_gap(const std::string& spec) {
    const auto colon = spec.find(':');
    auto range = [&](const std::string& s) {
        const auto dash = s.find('-');
        if (dash == std::string::npos) throw ValidationError("--gap expects A-B:C-D, got '" + spec + "'");
        const std::size_t a = std::stoul(s.substr(0, dash)), b = std::stoul(s.substr(dash + 1));
        if (a < 1 || b < a) throw ValidationError("--gap range '" + s + "' is invalid");
        return std::pair{a - 1, b};
    };
    if (colon == std::string::npos) throw ValidationError("--gap expects A-B:C-D, got '" + spec + "'");
    const auto [r0, r1] = range(spec.substr(0, colon));
    const auto [f0, f1] = range(spec.substr(colon + 1));
    return GapBlock{r0, r1, f0, f1};
}

int cmd_synth(const SynthOptions& o, const std::string& out_dir) {
    // The reference preset is the starting point; explicit options override it.
    MadelonConfig cfg = MadelonConfig::paper(o.seed);
    cfg.n_samples = o.samples;
    cfg.n_features = o.features;
    cfg.class_separation = o.class_sep;
    cfg.clusters_per_class = o.clusters_per_class;
    auto zero_based = [](const std::string& list) {
        FeatureIndices out;
        for (std::size_t i : parse_index_list(list)) {
            if (i < 1) throw ValidationError("feature numbers are 1-based");
            out.push_back(i - 1);
        }
        return out;
    };
    if (!o.informative.empty() || !o.redundant.empty() || !o.noise.empty()) {
        cfg.informative = zero_based(o.informative);
        cfg.redundant = zero_based(o.redundant);
        cfg.noise = zero_based(o.noise);
    }
    GappedDataset ds = generate_madelon(cfg);
    if (!o.no_gaps) {
        GapPattern pattern;
        if (o.gaps.empty()) {
            pattern = GapPattern::paper();
        } else {
            for (const auto& g : o.gaps) pattern.blocks.push_back(parse_gap(g));
        }
        ds = inject_gaps(ds, pattern);
    }
    const fs::path path = output_path(out_dir, o.output, "madelon.csv");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_csv(ds, path);
    const RowIndices complete = complete_rows(ds);
    std::size_t positives = 0;
    for (int y : ds.labels()) positives += y == 1;
    Json summary{{"output", path.string()},
                 {"rows", ds.rows()},
                 {"features", ds.features()},
                 {"positives", positives},
                 {"missing_cells", ds.missing_count()},
                 {"complete_rows", complete.size()},
                 {"class_separation", cfg.class_separation},
                 {"clusters_per_class", cfg.clusters_per_class},
                 {"seed", cfg.seed}};
    if (!complete.empty()) summary["complete_row_range"] = {complete.front() + 1, complete.back() + 1};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// --- clusters ---------------------------------------------------------------

int cmd_clusters(const DataOptions& d, const PlanOptions& p, const std::string& output) {
    const GappedDataset ds = load_csv(d.path, d.csv());
    const ClusterPlan plan = resolve_plan(ds, p);
    const CoverageReport report = validate_plan(plan, ds);
    const Json j = to_json(report, plan, ds);
    if (!output.empty()) write_text(output, j.dump(2) + "\n");
    std::cout << j.dump(2) << '\n';
    if (!report.valid()) {
        std::cerr << Json{{"error", {{"code", kExitValidation}, {"kind", "validation"},
                                     {"message", "cluster plan is invalid"}}}}.dump()
                  << '\n';
        return kExitValidation;
    }
    return 0;
}

// --- train ------------------------------------------------------------------

int cmd_train(const DataOptions& d, const PlanOptions& p, TrainingOptions& t, const std::string& which,
              const std::string& out_dir) {
    finish_training_options(t);
    ExperimentConfig cfg = t.cfg;
    cfg.train_vanilla = which == "vanilla" || which == "both";
    cfg.train_gapnet = which == "gapnet" || which == "both";
    cfg.both_freeze_modes = false;
    cfg.validate();

    const GappedDataset ds = load_csv(d.path, d.csv());
    const ClusterPlan plan = resolve_plan(ds, p);
    if (cfg.train_gapnet) require_valid(plan, ds);

    const TrainedRun run = run_once(ds, plan, cfg, 0);
    const RunResult& r = run.result;

    Manifest manifest;
    manifest.command = "train";
    manifest.config = to_json(cfg);
    manifest.config["model"] = which;
    manifest.config["plan"] = format_plan(plan, ds);
    manifest.add_input("data", d.path);
    manifest.add_input("plan", p.plan_path);
    manifest.run_seeds = {r.seed};

    fs::create_directories(out_dir);
    Json models = Json::object();
    auto score_entry = [&](const std::string& name) {
        const ModelScores* ms = r.find(name);
        const double a = auc(ms->scores, r.test_labels);
        const ConfusionCounts c = confusion_at(ms->scores, r.test_labels, 0.5);
        return Json{{"auc", a}, {"confusion", to_json(c)}, {"metrics", to_json(metrics(c))}};
    };
    auto save = [&](const std::string& file, ModelFile mf) {
        save_model(mf, fs::path(out_dir) / file);
        manifest.artifacts.push_back(file);
    };
    if (run.vanilla) {
        models[kVanilla] = score_entry(kVanilla);
        models[kVanilla]["train_rows"] = r.vanilla_train_rows;
        models[kVanilla]["model_file"] = "vanilla.model.json";
        save("vanilla.model.json", ModelFile{ds.feature_names(), run.stats, *run.vanilla});
        write_text(fs::path(out_dir) / "vanilla_roc.csv", curve_csv(roc_curve(r.find(kVanilla)->scores, r.test_labels)));
    }
    if (run.gapnet) {
        Json stage1 = Json::object();
        for (std::size_t k = 0; k < run.subnets.size(); ++k) {
            const std::string name = cluster_model_name(run.subnets[k].name);
            stage1[name] = score_entry(name);
            stage1[name]["train_rows"] = r.stage1_train_rows[k];
        }
        Json g = score_entry(kGapNet);
        g["stage1"] = stage1;
        g["stage2_train_rows"] = r.stage2_train_rows;
        g["freeze_bodies"] = run.gapnet->freeze_bodies();
        g["bodies_unchanged"] = r.bodies_unchanged;
        g["model_file"] = "gapnet.model.json";
        models[kGapNet] = g;
        save("gapnet.model.json", ModelFile{ds.feature_names(), run.stats, *run.gapnet});
        write_text(fs::path(out_dir) / "gapnet_roc.csv", curve_csv(roc_curve(r.find(kGapNet)->scores, r.test_labels)));
    }
    Json test_rows = Json::array();
    for (std::size_t row : r.test_rows) test_rows.push_back(row + 1);
    Json report{{"stamp", manifest.stamp()},
                {"seed", r.seed},
                {"test_rows", test_rows},
                {"threshold", 0.5},
                {"models", models}};
    write_text(fs::path(out_dir) / "train_report.json", report.dump(2) + "\n");
    manifest.artifacts.push_back("train_report.json");
    manifest.write(out_dir);
    std::cout << report.dump(2) << '\n';
    return 0;
}

// --- predict ----------------------------------------------------------------

RowIndices rows_from_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report '" + path + "'");
    const Json j = Json::parse(in);
    RowIndices rows;
    for (const auto& r : j.at("test_rows")) rows.push_back(r.get<std::size_t>() - 1);
    return rows;
}

int cmd_predict(const DataOptions& d, const std::string& model_path, const std::string& rows_spec,
                const std::string& rows_report, const std::string& output) {
    const ModelFile mf = load_model(model_path);
    const GappedDataset ds = load_csv(d.path, d.csv());
    RowIndices rows;
    if (!rows_report.empty()) {
        rows = rows_from_report(rows_report);
    } else if (!rows_spec.empty()) {
        for (std::size_t r : parse_index_list(rows_spec)) {
            if (r < 1) throw ValidationError("row numbers are 1-based");
            rows.push_back(r - 1);
        }
    } else {
        rows = complete_rows_for(ds, mf.used_features());
    }
    const std::vector<double> scores = mf.predict(ds, rows);
    std::string csv = "row,score,label\n";
    char buf[64];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
        csv += std::to_string(rows[i] + 1) + "," + buf + "," + std::to_string(ds.label(rows[i])) + "\n";
    }
    if (!output.empty()) write_text(output, csv);
    const std::vector<int> labels = labels_for(ds, rows);
    Json j{{"rows", rows.size()}};
    try {
        j["auc"] = auc(scores, labels);
    } catch (const ValidationError&) {
        j["auc"] = nullptr;
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

// --- benchmark --------------------------------------------------------------

int cmd_benchmark(const DataOptions& d, const PlanOptions& p, TrainingOptions& t, const std::string& out_dir) {
    finish_training_options(t);
    const ExperimentConfig& cfg = t.cfg;
    cfg.validate();
    const GappedDataset ds = load_csv(d.path, d.csv());
    const ClusterPlan plan = resolve_plan(ds, p);
    require_valid(plan, ds);

    Manifest manifest;
    manifest.command = "benchmark";
    manifest.config = to_json(cfg);
    manifest.config["plan"] = format_plan(plan, ds);
    manifest.add_input("data", d.path);
    manifest.add_input("plan", p.plan_path);
    for (std::size_t i = 0; i < cfg.runs; ++i) manifest.run_seeds.push_back(run_seed(cfg.seed, i));
    manifest.execution = {{"jobs", cfg.jobs}};

    const auto start = std::chrono::steady_clock::now();
    const BenchmarkReport report = run_benchmark(ds, plan, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.execution["wall_seconds"] = seconds;

    Json j = to_json(report);
    j["stamp"] = manifest.stamp();
    const fs::path dir(out_dir);
    write_text(dir / "benchmark_report.json", j.dump(2) + "\n");
    write_text(dir / "roc.csv", roc_csv(report));
    write_text(dir / "histogram.csv", histogram_csv(report));
    write_text(dir / "run_aucs.csv", run_auc_csv(report));
    manifest.artifacts = {"benchmark_report.json", "roc.csv", "histogram.csv", "run_aucs.csv"};
    manifest.write(dir);

    Json summary = Json::object();
    for (const auto& m : report.models)
        summary[m.name] = {{"auc_mean", m.aggregate.auc_mean}, {"auc_std", m.aggregate.auc_std},
                           {"auc_median", m.aggregate.auc_summary.median}};
    Json out{{"runs", cfg.runs}, {"models", summary}, {"median_ranking", report.median_ranking}};
    if (report.pooled_delong) out["delong"] = {{"z", report.pooled_delong->z}, {"p", report.pooled_delong->p}};
    out["output_dir"] = dir.string();
    std::cout << out.dump(2) << '\n';
    return 0;
}

// --- importance -------------------------------------------------------------

int cmd_importance(const DataOptions& d, const std::string& model_path, std::size_t repeats, std::size_t top_k,
                   std::uint64_t seed, const std::string& rows_report, const std::string& output,
                   const std::string& out_dir) {
    if (repeats < 1) throw ValidationError("--repeats must be >= 1");
    const ModelFile mf = load_model(model_path);
    const GappedDataset raw = load_csv(d.path, d.csv());
    const GappedDataset ds = mf.prepare(raw);
    const FeatureIndices used = mf.used_features();
    const RowIndices rows = rows_report.empty() ? complete_rows_for(ds, used) : rows_from_report(rows_report);
    const Matrix inputs = gather_full_width(ds, rows, used);
    const std::vector<int> labels = labels_for(ds, rows);
    const Scorer scorer = [&](const Matrix& x) {
        return std::visit([&](const auto& m) { return m.predict(x); }, mf.model);
    };
    const ImportanceReport report = importance_report(scorer, inputs, labels, used, repeats, seed);

    Manifest manifest;
    manifest.command = "importance";
    manifest.config = {{"repeats", repeats}, {"top_k", top_k}, {"seed", seed}};
    manifest.add_input("data", d.path);
    manifest.add_input("model", model_path);
    manifest.add_input("rows", rows_report);

    Json j = to_json(report, ds.feature_names(), top_k);
    j["rows"] = rows.size();
    j["stamp"] = manifest.stamp();
    const fs::path path = output_path(out_dir, output, "importance.json");
    write_text(path, j.dump(2) + "\n");
    manifest.artifacts = {path.filename().string()};
    manifest.write(path.has_parent_path() ? path.parent_path() : fs::path("."));
    std::cout << j.dump(2) << '\n';
    return 0;
}

int fail(int code, const std::string& kind, const std::string& message) {
    std::cerr << Json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}}.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GapNet: neural-network training on highly incomplete tabular data"};
    app.set_config("--config", "", "TOML/INI file with option values (one section per subcommand)");
    app.require_subcommand(1);
    std::string out_dir = ".";
    app.add_option("--out-dir", out_dir, "Directory for outputs")->envname("GAPNET_OUTPUT_DIR")->capture_default_str();

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate the simulated Madelon-style dataset");
    synth_cmd->add_flag("--paper-madelon", "1000 x 40, 25/10/5 features at the reference positions (the default)");
    synth_cmd->add_flag("--no-gaps", synth.no_gaps, "Keep every cell present");
    synth_cmd->add_option("--samples", synth.samples, "Rows")->capture_default_str();
    synth_cmd->add_option("--features", synth.features, "Columns")->capture_default_str();
    synth_cmd->add_option("--informative", synth.informative, "1-based informative columns, e.g. 1,3-5");
    synth_cmd->add_option("--redundant", synth.redundant, "1-based redundant columns");
    synth_cmd->add_option("--noise", synth.noise, "1-based noise columns");
    synth_cmd->add_option("--class-sep", synth.class_sep, "Hypercube half-side")->capture_default_str();
    synth_cmd->add_option("--clusters-per-class", synth.clusters_per_class, "Gaussian clusters per class")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--gap", synth.gaps, "Missing block ROWS:FEATURES, 1-based inclusive (e.g. 1-450:1-25)");
    synth_cmd->add_option("--output,-o", synth.output, "Output CSV (default OUT_DIR/madelon.csv)");

    DataOptions cl_data;
    PlanOptions cl_plan;
    std::string cl_output;
    auto* clusters_cmd = app.add_subcommand("clusters", "Report feature clusters or validate a plan file");
    add_data_options(clusters_cmd, cl_data);
    add_plan_options(clusters_cmd, cl_plan);
    clusters_cmd->add_option("--output,-o", cl_output, "Also write the report to this file");

    DataOptions tr_data;
    PlanOptions tr_plan;
    TrainingOptions tr_opts;
    tr_opts.cfg.runs = 1;
    std::string tr_model = "both";
    auto* train_cmd = app.add_subcommand("train", "Train on one split and save models");
    add_data_options(train_cmd, tr_data);
    add_plan_options(train_cmd, tr_plan);
    add_training_options(train_cmd, tr_opts);
    train_cmd->add_option("--model", tr_model, "vanilla, gapnet or both")
        ->check(CLI::IsMember({"vanilla", "gapnet", "both"}))
        ->capture_default_str();

    DataOptions pr_data;
    std::string pr_model, pr_rows, pr_rows_report, pr_output;
    auto* predict_cmd = app.add_subcommand("predict", "Score rows with a saved model");
    add_data_options(predict_cmd, pr_data);
    predict_cmd->add_option("--model", pr_model, "Model file")->required();
    predict_cmd->add_option("--rows", pr_rows, "1-based rows, e.g. 451-470,500");
    predict_cmd->add_option("--rows-from", pr_rows_report, "Use the test rows recorded in a train report");
    predict_cmd->add_option("--output,-o", pr_output, "Write row,score,label CSV");

    DataOptions bm_data;
    PlanOptions bm_plan;
    TrainingOptions bm_opts;
    bool bm_single_mode = false;
    auto* bench_cmd = app.add_subcommand("benchmark", "Repeated resampling comparison");
    add_data_options(bench_cmd, bm_data);
    add_plan_options(bench_cmd, bm_plan);
    add_training_options(bench_cmd, bm_opts);
    bench_cmd->add_option("--runs", bm_opts.cfg.runs, "Resampled runs")->capture_default_str();
    bench_cmd->add_option("--jobs,-j", bm_opts.cfg.jobs, "Runs trained concurrently")->capture_default_str();
    bench_cmd->add_option("--bin-width", bm_opts.cfg.aggregate.bin_width, "AUC histogram bin width")
        ->capture_default_str();
    bench_cmd->add_flag("--single-freeze-mode", bm_single_mode, "Skip the GapNet variant with the other freeze setting");

    DataOptions im_data;
    std::string im_model, im_rows_report, im_output;
    std::size_t im_repeats = 10, im_top_k = 20;
    std::uint64_t im_seed = 0;
    auto* imp_cmd = app.add_subcommand("importance", "Permutation feature importance of a saved model");
    add_data_options(imp_cmd, im_data);
    imp_cmd->add_option("--model", im_model, "Model file")->required();
    imp_cmd->add_option("--repeats", im_repeats, "Permutations per feature")->capture_default_str();
    imp_cmd->add_option("--top-k", im_top_k, "Features listed in the summary")->capture_default_str();
    imp_cmd->add_option("--seed", im_seed, "Permutation seed")->capture_default_str();
    imp_cmd->add_option("--rows-from", im_rows_report, "Use the test rows recorded in a train report");
    imp_cmd->add_option("--output,-o", im_output, "Output JSON (default OUT_DIR/importance.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitValidation, "usage", e.what());
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, out_dir);
        if (*clusters_cmd) return cmd_clusters(cl_data, cl_plan, cl_output);
        if (*train_cmd) return cmd_train(tr_data, tr_plan, tr_opts, tr_model, out_dir);
        if (*predict_cmd) return cmd_predict(pr_data, pr_model, pr_rows, pr_rows_report, pr_output);
        if (*bench_cmd) {
            bm_opts.cfg.both_freeze_modes = !bm_single_mode;
            return cmd_benchmark(bm_data, bm_plan, bm_opts, out_dir);
        }
        if (*imp_cmd) return cmd_importance(im_data, im_model, im_repeats, im_top_k, im_seed, im_rows_report, im_output, out_dir);
    } catch (const ValidationError& e) {
        return fail(kExitValidation, "validation", e.what());
    } catch (const TrainingError& e) {
        return fail(kExitRuntime, "training", e.what());
    } catch (const std::exception& e) {
        return fail(kExitRuntime, "runtime", e.what());
    }
    return 0;
}
