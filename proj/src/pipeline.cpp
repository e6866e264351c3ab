#include "cenet/pipeline.hpp"

#include <cmath>

#include "cenet/augment.hpp"
#include "cenet/error.hpp"

namespace cenet {

Json NormStats::to_json() const { return {{"mean", mean}, {"std", std}}; }

NormStats NormStats::from_json(const Json& j) {
    NormStats s;
    s.mean = j.at("mean").get<std::array<double, 5>>();
    s.std = j.at("std").get<std::array<double, 5>>();
    return s;
}

DataPipeline::DataPipeline(ProjectionConfig projection, ClassConfig classes, NormStats stats,
                           AugmentationConfig augmentation)
    : projection_(projection),
      classes_(std::move(classes)),
      stats_(stats),
      augmentation_(augmentation) {
    projection_.validate();
}

torch::Tensor DataPipeline::to_input(const RangeImage& ri) const {
    const int64_t h = ri.height(), w = ri.width();
    auto channels = ri.channels();
    auto input = torch::from_blob(const_cast<float*>(channels.data()), {RangeImage::kChannels, h, w},
                                  torch::kFloat32)
                     .clone();
    auto mean = torch::tensor(std::vector<double>(stats_.mean.begin(), stats_.mean.end()), torch::kFloat32);
    auto std = torch::tensor(std::vector<double>(stats_.std.begin(), stats_.std.end()), torch::kFloat32);
    input = (input - mean.view({-1, 1, 1})) / std.view({-1, 1, 1});
    auto valid = ri.valid_mask();
    auto mask = torch::from_blob(const_cast<std::uint8_t*>(valid.data()), {1, h, w}, torch::kUInt8)
                    .to(torch::kFloat32);
    return input * mask;
}

Sample DataPipeline::from_cloud(const PointCloud& pc_in, bool augment_it, std::uint64_t sample_seed) const {
    const PointCloud pc = augment_it ? augment(pc_in, augmentation_, sample_seed) : pc_in;
    Sample s;
    s.range_image = spherical_project(pc, projection_, classes_.ignore_id);
    s.input = to_input(s.range_image);
    const int64_t h = projection_.height, w = projection_.width;
    if (const auto& li = s.range_image.label_image()) {
        s.target = torch::from_blob(const_cast<Label*>(li->data()), {h, w}, torch::kInt32).to(torch::kInt64);
        s.point_labels = *pc.labels;
    } else {
        s.target = torch::full({h, w}, static_cast<int64_t>(classes_.ignore_id), torch::kInt64);
    }
    return s;
}

Sample DataPipeline::load(const ScanEntry& entry, bool augment_it, std::uint64_t sample_seed,
                          bool with_labels) const {
    auto pc = load_scan(entry.scan);
    if (with_labels && std::filesystem::exists(entry.label))
        pc.labels = load_labels(entry.label, classes_, pc.size());
    auto s = from_cloud(pc, augment_it, sample_seed);
    s.entry = entry;
    return s;
}

NormStats compute_norm_stats(const std::vector<ScanEntry>& entries, const ProjectionConfig& projection,
                             int max_scans) {
    NormStats s;
    if (entries.empty() || max_scans < 1) return s;
    const std::size_t n = std::min<std::size_t>(entries.size(), static_cast<std::size_t>(max_scans));
    std::array<double, 5> sum{}, sum_sq{};
    double count = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& e = entries[k * entries.size() / n];
        const auto ri = spherical_project(load_scan(e.scan), projection);
        for (int r = 0; r < ri.height(); ++r)
            for (int c = 0; c < ri.width(); ++c) {
                if (!ri.valid(r, c)) continue;
                for (int ch = 0; ch < 5; ++ch) {
                    const double v = ri.channel(ch, r, c);
                    sum[ch] += v;
                    sum_sq[ch] += v * v;
                }
                count += 1.0;
            }
    }
    if (count == 0.0) return s;
    for (int ch = 0; ch < 5; ++ch) {
        s.mean[ch] = sum[ch] / count;
        const double var = std::max(0.0, sum_sq[ch] / count - s.mean[ch] * s.mean[ch]);
        s.std[ch] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    return s;
}

std::vector<std::uint64_t> count_classes(const std::vector<ScanEntry>& entries, const ClassConfig& classes) {
    std::vector<std::uint64_t> counts(classes.num_classes, 0);
    for (const auto& e : entries) {
        if (!std::filesystem::exists(e.label)) continue;
        for (Label l : load_labels(e.label, classes))
            if (l >= 0 && l < classes.num_classes) ++counts[l];
    }
    return counts;
}

}  // namespace cenet
