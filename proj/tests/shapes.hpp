// Mask-only datasets with the row counts of the real cohorts.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gapnet/dataset.hpp"

namespace shapes {

// Builds a dataset from (row count, presence pattern) groups. Values are
// arbitrary finite numbers; labels alternate.
inline gapnet::GappedDataset from_groups(std::size_t features,
                                         const std::vector<std::pair<std::size_t, std::vector<int>>>& groups) {
    std::vector<std::string> names;
    for (std::size_t f = 0; f < features; ++f) names.push_back("f" + std::to_string(f + 1));
    std::vector<double> values;
    std::vector<std::uint8_t> present;
    std::vector<int> labels;
    std::size_t row = 0;
    for (const auto& [count, pattern] : groups) {
        for (std::size_t i = 0; i < count; ++i, ++row) {
            for (std::size_t f = 0; f < features; ++f) {
                present.push_back(static_cast<std::uint8_t>(pattern[f]));
                values.push_back(pattern[f] ? std::sin(static_cast<double>(row * features + f)) : NAN);
            }
            labels.push_back(static_cast<int>(row % 2));
        }
    }
    return gapnet::GappedDataset(names, values, present, labels);
}

// 3926 rows, 501 complete, two feature blocks.
inline gapnet::GappedDataset covid() {
    return from_groups(2, {{501, {1, 1}}, {2000, {1, 0}}, {1425, {0, 1}}});
}

// 1465 visits: 120 with all three modalities; MRI, amyloid-PET and FDG-PET
// present in 233, 1045 and 1258 visits.
inline gapnet::GappedDataset adni() {
    return from_groups(3, {{120, {1, 1, 1}}, {113, {1, 0, 0}}, {831, {0, 1, 1}}, {94, {0, 1, 0}}, {307, {0, 0, 1}}});
}

}  // namespace shapes
