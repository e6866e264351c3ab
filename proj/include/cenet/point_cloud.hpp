#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace cenet {

using Label = std::int32_t;

struct Point3 {
    float x = 0.f;
    float y = 0.f;
    float z = 0.f;
};

/// A single LiDAR sweep. `labels`, when present, has one train-class id per point.
struct PointCloud {
    std::vector<Point3> xyz;
    std::vector<float> remission;
    std::optional<std::vector<Label>> labels;

    std::size_t size() const { return xyz.size(); }
    bool empty() const { return xyz.empty(); }
    bool has_labels() const { return labels.has_value(); }

    // Drops points matching `drop` together with their remission and labels.
    template <typename Pred>
    std::size_t erase_if(Pred drop) {
        std::size_t out = 0;
        for (std::size_t i = 0; i < xyz.size(); ++i) {
            if (drop(i)) continue;
            xyz[out] = xyz[i];
            remission[out] = remission[i];
            if (labels) (*labels)[out] = (*labels)[i];
            ++out;
        }
        const std::size_t removed = xyz.size() - out;
        xyz.resize(out);
        remission.resize(out);
        if (labels) labels->resize(out);
        return removed;
    }
};

}  // namespace cenet
