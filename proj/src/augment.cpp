#include "cenet/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cenet/error.hpp"
#include "cenet/rng.hpp"

namespace cenet {

void AugmentationConfig::validate() const {
    if (rotation.yaw_min > rotation.yaw_max) throw ConfigError("augmentation: yaw_min > yaw_max");
    if (dropout.prob_min < 0.0 || dropout.prob_max >= 1.0 || dropout.prob_min > dropout.prob_max)
        throw ConfigError("augmentation: dropout probabilities must satisfy 0 <= min <= max < 1");
    if (jitter.sigma < 0.0) throw ConfigError("augmentation: jitter sigma must be >= 0");
    if (jitter.clip < 0.0) throw ConfigError("augmentation: jitter clip must be >= 0");
}

AugmentationConfig AugmentationConfig::none() {
    AugmentationConfig cfg;
    cfg.rotation.enabled = false;
    cfg.dropout.enabled = false;
    cfg.jitter.enabled = false;
    return cfg;
}

PointCloud augment(const PointCloud& pc, const AugmentationConfig& cfg, std::uint64_t sample_seed) {
    cfg.validate();
    PointCloud out = pc;
    if (out.empty()) return out;
    Rng rng(sample_seed);

    if (cfg.rotation.enabled) {
        const double yaw = uniform(rng, cfg.rotation.yaw_min, cfg.rotation.yaw_max);
        const double c = std::cos(yaw), s = std::sin(yaw);
        for (auto& p : out.xyz) {
            const double x = p.x, y = p.y;
            p.x = static_cast<float>(c * x - s * y);
            p.y = static_cast<float>(s * x + c * y);
        }
    }

    if (cfg.dropout.enabled) {
        const double prob = uniform(rng, cfg.dropout.prob_min, cfg.dropout.prob_max);
        std::vector<char> drop(out.size());
        for (auto& d : drop) d = uniform01(rng) < prob;
        out.erase_if([&](std::size_t i) { return drop[i] != 0; });
    }

    if (cfg.jitter.enabled && cfg.jitter.sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.jitter.sigma);
        const double clip = cfg.jitter.clip;
        for (auto& p : out.xyz) {
            p.x = static_cast<float>(p.x + std::clamp(noise(rng), -clip, clip));
            p.y = static_cast<float>(p.y + std::clamp(noise(rng), -clip, clip));
            p.z = static_cast<float>(p.z + std::clamp(noise(rng), -clip, clip));
        }
    }
    return out;
}

}  // namespace cenet
