#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cenet/class_config.hpp"
#include "cenet/point_cloud.hpp"

namespace cenet {

/// Parameters of the synthetic ray-cast scenes. Labels are a deterministic
/// function of geometry: ground plane, a surrounding wall, and boxes whose
/// class is given by the azimuth sector of the box center.
struct ToySceneConfig {
    int beams = 64;
    int azimuth_samples = 720;
    double fov_up_deg = 3.0;
    double fov_down_deg = 25.0;
    double sensor_height = 1.73;
    double max_range = 80.0;
    double range_noise = 0.01;
    int boxes = 8;
};

/// One synthetic scan with labels (train ids of ClassConfig::toy(n_classes)).
PointCloud make_toy_scan(int n_classes, std::uint64_t seed, const ToySceneConfig& scene = {});

/// Writes `n_scans` scans and labels under <root>/sequences/<sequence>/ using
/// the SemanticKITTI layout. Scan i is seeded with mix(seed, first_index + i).
void make_toy_dataset(const std::filesystem::path& root, int n_scans, int n_classes,
                      std::uint64_t seed, const std::string& sequence = "00", int first_index = 0,
                      const ToySceneConfig& scene = {});

}  // namespace cenet
