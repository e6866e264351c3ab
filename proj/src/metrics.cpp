#include "cenet/metrics.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "cenet/error.hpp"

namespace cenet {

ConfusionMatrix::ConfusionMatrix(int num_classes, Label ignore_id)
    : num_classes_(num_classes),
      ignore_id_(ignore_id),
      counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
    if (num_classes < 1) throw ConfigError("confusion matrix needs at least one class");
}

void ConfusionMatrix::accumulate(std::span<const Label> pred, std::span<const Label> gt) {
    if (pred.size() != gt.size())
        throw ConsistencyError("accumulate: " + std::to_string(pred.size()) + " predictions vs " +
                               std::to_string(gt.size()) + " ground-truth labels");
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] == ignore_id_) continue;
        if (gt[i] < 0 || gt[i] >= num_classes_ || pred[i] < 0 || pred[i] >= num_classes_)
            throw ConsistencyError("accumulate: label out of range at element " + std::to_string(i));
        ++counts_[static_cast<std::size_t>(gt[i]) * num_classes_ + pred[i]];
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.num_classes_ != num_classes_ || other.ignore_id_ != ignore_id_)
        throw ConsistencyError("merge: confusion matrices are incompatible");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

IouResult iou(const ConfusionMatrix& cm) {
    const int c = cm.num_classes();
    IouResult r;
    r.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
    r.included.assign(c, false);
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < c; ++k) {
        const std::uint64_t tp = cm.at(k, k);
        std::uint64_t row = 0, col = 0;
        for (int j = 0; j < c; ++j) {
            row += cm.at(k, j);
            col += cm.at(j, k);
        }
        const std::uint64_t denom = row + col - tp;  // TP + FN + FP
        if (denom == 0) continue;
        r.per_class[k] = static_cast<double>(tp) / static_cast<double>(denom);
        r.included[k] = true;
        sum += r.per_class[k];
        ++n;
    }
    if (n > 0) r.miou = sum / n;
    return r;
}

}  // namespace cenet
