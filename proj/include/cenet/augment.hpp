#pragma once

#include <cstdint>

#include "cenet/point_cloud.hpp"

namespace cenet {

struct AugmentationConfig {
    struct Rotation {
        bool enabled = true;
        double yaw_min = -3.14159265358979323846;
        double yaw_max = 3.14159265358979323846;
    } rotation;
    // Drop probability is drawn uniformly in [prob_min, prob_max] once per scan.
    struct Dropout {
        bool enabled = true;
        double prob_min = 0.0;
        double prob_max = 0.1;
    } dropout;
    struct Jitter {
        bool enabled = true;
        double sigma = 0.03;  // meters, per axis
        double clip = 0.1;
    } jitter;

    void validate() const;
    static AugmentationConfig none();
};

/// Random yaw rotation, point dropout and xyz jitter, in that order, all
/// drawn from one generator seeded with `sample_seed`.
PointCloud augment(const PointCloud& pc, const AugmentationConfig& cfg, std::uint64_t sample_seed);

}  // namespace cenet
