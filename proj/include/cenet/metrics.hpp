#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cenet/point_cloud.hpp"

namespace cenet {

/// Rows are ground truth, columns are predictions. Elements whose ground
/// truth equals `ignore_id` are skipped.
class ConfusionMatrix {
public:
    ConfusionMatrix(int num_classes, Label ignore_id);

    void accumulate(std::span<const Label> pred, std::span<const Label> gt);
    // Associative and commutative; both matrices must share class count and ignore id.
    void merge(const ConfusionMatrix& other);

    int num_classes() const { return num_classes_; }
    Label ignore_id() const { return ignore_id_; }
    std::uint64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred]; }
    std::uint64_t total() const;
    std::span<const std::uint64_t> counts() const { return counts_; }

    bool operator==(const ConfusionMatrix&) const = default;

private:
    int num_classes_;
    Label ignore_id_;
    std::vector<std::uint64_t> counts_;
};

struct IouResult {
    std::vector<double> per_class;       // NaN where TP + FP + FN = 0
    std::vector<bool> included;
    std::optional<double> miou;          // empty when no class has support
};

/// IoU_c = TP / (TP + FP + FN); classes with a zero denominator are left out
/// of the mean.
IouResult iou(const ConfusionMatrix& cm);

}  // namespace cenet
