#include "gapnet/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gapnet/error.hpp"

namespace gapnet {
namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a(ss.str()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << text;
}

Json to_json(const TrainConfig& cfg) {
    Json overrides = Json::object();
    for (const auto& [k, v] : cfg.hidden_overrides) overrides[k] = v;
    return Json{{"epochs", cfg.epochs},
                {"learning_rate", cfg.adam.learning_rate},
                {"beta1", cfg.adam.beta1},
                {"beta2", cfg.adam.beta2},
                {"adam_epsilon", cfg.adam.epsilon},
                {"batch_size", cfg.batch_size},
                {"dropout_rate", cfg.dropout_rate},
                {"hidden_multiplier", cfg.hidden_multiplier},
                {"hidden_overrides", overrides},
                {"freeze_bodies", cfg.freeze_bodies}};
}

Json to_json(const ExperimentConfig& cfg) {
    return Json{{"train", to_json(cfg.train)},
                {"test_fraction", cfg.test_fraction},
                {"stratified", cfg.stratified},
                {"normalize", cfg.normalize},
                {"train_vanilla", cfg.train_vanilla},
                {"train_gapnet", cfg.train_gapnet},
                {"both_freeze_modes", cfg.both_freeze_modes},
                {"seed", cfg.seed},
                {"runs", cfg.runs},
                {"grid_points", cfg.aggregate.grid_points},
                {"histogram_bin_width", cfg.aggregate.bin_width}};
}

Json to_json(const MetricReport& m) {
    return Json{{"sensitivity", optional_number(m.sensitivity)},
                {"specificity", optional_number(m.specificity)},
                {"accuracy", optional_number(m.accuracy)},
                {"precision", optional_number(m.precision)}};
}

Json to_json(const ConfusionCounts& c) { return Json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}; }

Json to_json(const DelongResult& d) {
    return Json{{"auc_a", d.auc_a},         {"auc_b", d.auc_b}, {"var_a", d.var_a}, {"var_b", d.var_b},
                {"covariance", d.covariance}, {"variance_of_difference", d.variance},
                {"z", d.z},                   {"p", d.p}};
}

Json to_json(const RunAggregate& a) {
    const auto& s = a.auc_summary;
    return Json{{"auc_mean", a.auc_mean},
                {"auc_std", a.auc_std},
                {"std_convention", "population"},
                {"auc_box", {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}}},
                {"aucs", a.aucs},
                {"roc", {{"fpr", a.fpr_grid}, {"tpr_mean", a.tpr_mean}, {"tpr_std", a.tpr_std}}},
                {"histogram",
                 {{"bin_width", a.histogram.bin_width},
                  {"lower_edges", a.histogram.lower_edges},
                  {"counts", a.histogram.counts}}}};
}

Json to_json(const CoverageReport& report, const ClusterPlan& plan, const GappedDataset& ds) {
    const auto& names = ds.feature_names();
    Json clusters = Json::array();
    for (std::size_t i = 0; i < plan.clusters.size(); ++i) {
        Json features = Json::array();
        for (std::size_t f : plan.clusters[i].features) features.push_back(names[f]);
        Json c{{"name", plan.clusters[i].name},
               {"features", features},
               {"size", plan.clusters[i].features.size()},
               {"complete_rows", report.complete_counts[i]}};
        if (!report.train_counts.empty()) c["train_rows"] = report.train_counts[i];
        clusters.push_back(c);
    }
    Json overlaps = Json::array();
    for (const auto& o : report.overlaps) overlaps.push_back({{"feature", names[o.feature]}, {"clusters", o.clusters}});
    Json uncovered = Json::array();
    for (std::size_t f : report.uncovered) uncovered.push_back(names[f]);
    return Json{{"valid", report.valid()},
                {"rows", ds.rows()},
                {"features", ds.features()},
                {"complete_rows", complete_rows(ds).size()},
                {"clusters", clusters},
                {"overlaps", overlaps},
                {"empty_clusters", report.empty_clusters},
                {"empty_support", report.empty_support},
                {"uncovered_features", uncovered}};
}

Json to_json(const ImportanceReport& report, const std::vector<std::string>& feature_names, std::size_t top_k) {
    std::vector<const FeatureImportance*> ranked;
    for (const auto& f : report.features) ranked.push_back(&f);
    std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) { return a->rank < b->rank; });
    Json all = Json::array();
    for (const auto* f : ranked) {
        all.push_back({{"rank", f->rank},
                       {"feature", feature_names[f->feature]},
                       {"mean_auc_drop", f->mean_drop},
                       {"std_auc_drop", f->std_drop},
                       {"constant_feature", f->constant_feature},
                       {"unused", f->unused}});
    }
    Json top = Json::array();
    for (std::size_t i = 0; i < std::min(top_k, all.size()); ++i) top.push_back(all[i]);
    return Json{{"baseline_auc", report.baseline_auc}, {"repeats", report.repeats}, {"top_k", top_k},
                {"top", top},                          {"features", all}};
}

Json to_json(const BenchmarkReport& report) {
    Json models = Json::array();
    for (const auto& m : report.models) {
        Json metrics{{"threshold", 0.5},
                     {"mean_over_runs", to_json(MetricReport{m.metrics.sensitivity, m.metrics.specificity,
                                                             m.metrics.accuracy, m.metrics.precision})},
                     {"runs_defined",
                      {{"sensitivity", m.metrics.runs_defined[0]},
                       {"specificity", m.metrics.runs_defined[1]},
                       {"accuracy", m.metrics.runs_defined[2]},
                       {"precision", m.metrics.runs_defined[3]}}},
                     {"pooled_counts", to_json(m.metrics.pooled)},
                     {"pooled", to_json(gapnet::metrics(m.metrics.pooled))}};
        models.push_back({{"name", m.name}, {"auc", to_json(m.aggregate)}, {"threshold_metrics", metrics}});
    }
    Json runs = Json::array();
    for (const auto& r : report.runs) {
        Json aucs = Json::object();
        for (const auto& m : r.models) aucs[m.name] = auc(m.scores, r.test_labels);
        Json test_rows = Json::array();
        for (std::size_t row : r.test_rows) test_rows.push_back(row + 1);
        runs.push_back({{"run", r.index},
                        {"seed", r.seed},
                        {"test_rows", test_rows},
                        {"train_rows",
                         {{"vanilla", r.vanilla_train_rows},
                          {"stage1", r.stage1_train_rows},
                          {"stage2", r.stage2_train_rows}}},
                        {"aucs", aucs},
                        {"bodies_unchanged", r.bodies_unchanged},
                        {"exclusion_ok", r.exclusion_ok}});
    }
    Json per_run = Json::array();
    for (const auto& d : report.per_run_delong) per_run.push_back(d ? to_json(*d) : Json(nullptr));
    return Json{{"config", to_json(report.config)},
                {"models", models},
                {"median_ranking", report.median_ranking},
                {"delong_gapnet_vs_vanilla",
                 {{"pooling", "concatenated test sets of all runs"},
                  {"pooled", report.pooled_delong ? to_json(*report.pooled_delong) : Json(nullptr)},
                  {"per_run", per_run}}},
                {"freeze_contract_held", report.freeze_contract_held},
                {"exclusion_held", report.exclusion_held},
                {"runs", runs}};
}

std::string roc_csv(const BenchmarkReport& report) {
    std::string out = "fpr";
    for (const auto& m : report.models) out += "," + m.name + "_tpr_mean," + m.name + "_tpr_std";
    out += '\n';
    if (report.models.empty()) return out;
    const auto& grid = report.models.front().aggregate.fpr_grid;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out += num(grid[k]);
        for (const auto& m : report.models) out += "," + num(m.aggregate.tpr_mean[k]) + "," + num(m.aggregate.tpr_std[k]);
        out += '\n';
    }
    return out;
}

std::string histogram_csv(const BenchmarkReport& report) {
    std::string out = "bin_lower,bin_upper";
    for (const auto& m : report.models) out += "," + m.name;
    out += '\n';
    if (report.models.empty()) return out;
    const auto& h = report.models.front().aggregate.histogram;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        out += num(h.lower_edges[b]) + "," + num(h.lower_edges[b] + h.bin_width);
        for (const auto& m : report.models) out += "," + std::to_string(m.aggregate.histogram.counts[b]);
        out += '\n';
    }
    return out;
}

std::string run_auc_csv(const BenchmarkReport& report) {
    std::string out = "run,seed";
    for (const auto& m : report.models) out += "," + m.name;
    out += '\n';
    for (std::size_t r = 0; r < report.runs.size(); ++r) {
        out += std::to_string(report.runs[r].index) + "," + std::to_string(report.runs[r].seed);
        for (const auto& m : report.models) out += "," + num(m.aggregate.aucs[r]);
        out += '\n';
    }
    return out;
}

std::string curve_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : curve.points) out += num(p.threshold) + "," + num(p.fpr) + "," + num(p.tpr) + "\n";
    return out;
}

}  // namespace gapnet
