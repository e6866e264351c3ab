#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "cenet/experiment_config.hpp"
#include "cenet/lidar_io.hpp"
#include "cenet/projection.hpp"

namespace cenet {

/// Per-channel (x, y, z, d, r) statistics applied to valid pixels.
struct NormStats {
    std::array<double, 5> mean{0, 0, 0, 0, 0};
    std::array<double, 5> std{1, 1, 1, 1, 1};

    Json to_json() const;
    static NormStats from_json(const Json& j);
};

struct Sample {
    torch::Tensor input;   // (5, H, W) float, normalized, zero at invalid pixels
    torch::Tensor target;  // (H, W) int64 train ids, ignore id at invalid pixels
    RangeImage range_image;
    std::vector<Label> point_labels;  // empty when the scan has no label file
    ScanEntry entry;
};

/// Turns scan files into network-ready samples: load, optional augmentation,
/// projection, normalization. Pure function of its inputs and seed.
class DataPipeline {
public:
    DataPipeline(ProjectionConfig projection, ClassConfig classes, NormStats stats,
                 AugmentationConfig augmentation = AugmentationConfig::none());

    Sample load(const ScanEntry& entry, bool augment, std::uint64_t sample_seed, bool with_labels = true) const;
    Sample from_cloud(const PointCloud& pc, bool augment, std::uint64_t sample_seed) const;
    torch::Tensor to_input(const RangeImage& ri) const;

    const ProjectionConfig& projection() const { return projection_; }
    const ClassConfig& classes() const { return classes_; }
    const NormStats& stats() const { return stats_; }

private:
    ProjectionConfig projection_;
    ClassConfig classes_;
    NormStats stats_;
    AugmentationConfig augmentation_;
};

/// Mean and standard deviation of each channel over valid pixels of up to
/// `max_scans` evenly spaced entries.
NormStats compute_norm_stats(const std::vector<ScanEntry>& entries, const ProjectionConfig& projection,
                             int max_scans);

/// Point label histogram over the given scans (ignored labels skipped).
std::vector<std::uint64_t> count_classes(const std::vector<ScanEntry>& entries, const ClassConfig& classes);

}  // namespace cenet
