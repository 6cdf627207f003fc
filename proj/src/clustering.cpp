#include "gapnet/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gapnet/error.hpp"

namespace gapnet {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

FeatureIndices merged(const FeatureIndices& a, const FeatureIndices& b) {
    FeatureIndices out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

std::string cluster_label(std::size_t index) {
    std::string out;
    ++index;
    while (index > 0) {
        --index;
        out.insert(out.begin(), static_cast<char>('A' + index % 26));
        index /= 26;
    }
    return out;
}

ClusterPlan make_plan(const GappedDataset& ds, std::vector<FeatureCluster> clusters) {
    ClusterPlan plan;
    std::vector<bool> covered(ds.features(), false);
    for (auto& c : clusters) {
        std::sort(c.features.begin(), c.features.end());
        c.features.erase(std::unique(c.features.begin(), c.features.end()), c.features.end());
        for (std::size_t f : c.features) {
            if (f >= ds.features()) throw ValidationError("cluster '" + c.name + "' has out-of-range feature");
            covered[f] = true;
        }
        plan.complete_counts.push_back(complete_rows_for(ds, c.features).size());
    }
    for (std::size_t f = 0; f < ds.features(); ++f)
        if (!covered[f]) plan.uncovered.push_back(f);
    plan.clusters = std::move(clusters);
    return plan;
}

ClusterPlan signature_clusters(const GappedDataset& ds) {
    // Signature -> features sharing it; ordered by first feature so output is deterministic.
    std::map<std::vector<bool>, FeatureIndices> groups;
    std::vector<std::vector<bool>> order;
    for (std::size_t f = 0; f < ds.features(); ++f) {
        std::vector<bool> sig(ds.rows());
        for (std::size_t r = 0; r < ds.rows(); ++r) sig[r] = ds.is_present(r, f);
        auto [it, inserted] = groups.try_emplace(sig);
        if (inserted) order.push_back(sig);
        it->second.push_back(f);
    }
    std::vector<FeatureCluster> clusters;
    FeatureIndices never_present;
    for (const auto& sig : order) {
        const auto& feats = groups.at(sig);
        if (std::none_of(sig.begin(), sig.end(), [](bool b) { return b; })) {
            never_present.insert(never_present.end(), feats.begin(), feats.end());
            continue;
        }
        clusters.push_back({cluster_label(clusters.size()), feats});
    }
    return make_plan(ds, std::move(clusters));
}

ClusterPlan merge_clusters(const ClusterPlan& plan, const GappedDataset& ds, std::size_t min_support) {
    if (min_support == 0) throw ValidationError("merge_clusters: min_support must be >= 1");
    std::vector<FeatureCluster> kept;
    std::vector<std::string> below;
    FeatureIndices dropped = plan.uncovered;
    for (std::size_t i = 0; i < plan.clusters.size(); ++i) {
        if (plan.complete_counts[i] >= min_support) {
            kept.push_back(plan.clusters[i]);
        } else {
            below.push_back(plan.clusters[i].name);
            dropped.insert(dropped.end(), plan.clusters[i].features.begin(), plan.clusters[i].features.end());
        }
    }
    if (kept.empty()) {
        std::string names;
        for (const auto& n : below) names += (names.empty() ? "" : ", ") + n;
        throw ValidationError("merge_clusters: min_support " + std::to_string(min_support) +
                              " exceeds the complete-row count of every cluster (" + names + ")");
    }
    auto by_first_feature = [](const FeatureCluster& a, const FeatureCluster& b) {
        return a.features.front() < b.features.front();
    };
    std::sort(kept.begin(), kept.end(), by_first_feature);

    while (kept.size() > 1) {
        std::size_t best_i = 0, best_j = 0, best_count = 0;
        bool found = false;
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (std::size_t j = i + 1; j < kept.size(); ++j) {
                const std::size_t count = complete_rows_for(ds, merged(kept[i].features, kept[j].features)).size();
                if (count >= min_support && (!found || count > best_count)) {
                    found = true;
                    best_count = count;
                    best_i = i;
                    best_j = j;
                }
            }
        if (!found) break;
        kept[best_i] = FeatureCluster{kept[best_i].name + "+" + kept[best_j].name,
                                      merged(kept[best_i].features, kept[best_j].features)};
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(best_j));
        std::sort(kept.begin(), kept.end(), by_first_feature);
    }
    ClusterPlan out = make_plan(ds, std::move(kept));
    return out;
}

CoverageReport validate_plan(const ClusterPlan& plan, const GappedDataset& ds, const DataSplit* split) {
    CoverageReport report;
    std::map<std::size_t, std::vector<std::string>> owners;
    for (const auto& c : plan.clusters) {
        if (c.features.empty()) report.empty_clusters.push_back(c.name);
        for (std::size_t f : c.features) owners[f].push_back(c.name);
    }
    for (const auto& [f, names] : owners)
        if (names.size() > 1) report.overlaps.push_back({f, names});
    for (std::size_t f = 0; f < ds.features(); ++f)
        if (!owners.contains(f)) report.uncovered.push_back(f);
    for (const auto& c : plan.clusters) {
        const RowIndices rows = complete_rows_for(ds, c.features);
        report.complete_counts.push_back(rows.size());
        if (rows.empty()) report.empty_support.push_back(c.name);
        if (split != nullptr) report.train_counts.push_back(without(rows, split->test_rows).size());
    }
    return report;
}

ClusterPlan parse_plan(const std::string& text, const GappedDataset& ds) {
    std::istringstream in(text);
    std::string line;
    std::vector<FeatureCluster> clusters;
    std::set<std::string> names;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("plan line " + std::to_string(line_no) + ": expected 'name = features'");
        FeatureCluster cluster{trim(line.substr(0, eq)), {}};
        if (cluster.name.empty()) throw ValidationError("plan line " + std::to_string(line_no) + ": empty name");
        if (!names.insert(cluster.name).second)
            throw ValidationError("plan: cluster '" + cluster.name + "' defined twice");
        std::istringstream list(line.substr(eq + 1));
        std::string item;
        while (std::getline(list, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const auto idx = ds.feature_index(item);
            if (!idx) throw ValidationError("plan: cluster '" + cluster.name + "' names unknown feature '" + item + "'");
            cluster.features.push_back(*idx);
        }
        clusters.push_back(std::move(cluster));
    }
    if (clusters.empty()) throw ValidationError("plan: no clusters defined");
    return make_plan(ds, std::move(clusters));
}

ClusterPlan load_plan(const std::filesystem::path& path, const GappedDataset& ds) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open plan file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_plan(ss.str(), ds);
}

std::string format_plan(const ClusterPlan& plan, const GappedDataset& ds) {
    std::string out;
    for (const auto& c : plan.clusters) {
        out += c.name + " =";
        for (std::size_t i = 0; i < c.features.size(); ++i)
            out += (i == 0 ? " " : ", ") + ds.feature_names()[c.features[i]];
        out += '\n';
    }
    return out;
}

}  // namespace gapnet
