#include "cenet/toy_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "cenet/error.hpp"
#include "cenet/lidar_io.hpp"
#include "cenet/rng.hpp"

namespace cenet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNoHit = std::numeric_limits<double>::infinity();

struct Box {
    double cx, cy, yaw;
    double half_len, half_wid, height;
    Label label;
    std::uint32_t instance;
};

struct Ray {
    double dx, dy, dz;
};

double hit_box(const Ray& r, const Box& b, double ground_z) {
    // Ray in the box frame, origin at the sensor.
    const double c = std::cos(-b.yaw), s = std::sin(-b.yaw);
    const double ox = c * (-b.cx) - s * (-b.cy);
    const double oy = s * (-b.cx) + c * (-b.cy);
    const double dx = c * r.dx - s * r.dy;
    const double dy = s * r.dx + c * r.dy;
    const double lo[3] = {-b.half_len, -b.half_wid, ground_z};
    const double hi[3] = {b.half_len, b.half_wid, ground_z + b.height};
    const double o[3] = {ox, oy, 0.0};
    const double d[3] = {dx, dy, r.dz};
    double t0 = 0.0, t1 = kNoHit;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-12) {
            if (o[a] < lo[a] || o[a] > hi[a]) return kNoHit;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a];
        double tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return kNoHit;
    }
    return t0 > 1e-6 ? t0 : kNoHit;
}

}  // namespace

PointCloud make_toy_scan(int n_classes, std::uint64_t seed, const ToySceneConfig& scene) {
    if (n_classes < 2) throw ConfigError("toy dataset needs n_classes >= 2");
    Rng rng(seed);
    const double ground_z = -scene.sensor_height;
    const double wall_radius = uniform(rng, 18.0, 30.0);
    const double wall_top = uniform(rng, 3.0, 6.0);
    const Label wall_label = 1;
    const int sectors = std::max(1, n_classes - 2);

    std::vector<Box> boxes;
    for (int i = 0; i < scene.boxes; ++i) {
        // Object class comes from the azimuth sector of the box; keep boxes
        // well inside their sector so the rule is unambiguous per point.
        const int sector = i % sectors;
        const double width = 2.0 * kPi / sectors;
        const double az = -kPi + width * (sector + uniform(rng, 0.2, 0.8));
        const double range = uniform(rng, 6.0, 14.0);
        Box b{range * std::cos(az), range * std::sin(az), uniform(rng, -kPi, kPi),
              uniform(rng, 0.8, 1.6), uniform(rng, 0.6, 1.0), uniform(rng, 1.4, 2.4),
              n_classes == 2 ? Label{1} : static_cast<Label>(2 + sector),
              static_cast<std::uint32_t>(i + 1)};
        boxes.push_back(b);
    }

    std::normal_distribution<double> range_noise(0.0, scene.range_noise);
    const double fov_up = scene.fov_up_deg * kPi / 180.0;
    const double fov_down = scene.fov_down_deg * kPi / 180.0;
    const double az_offset = uniform(rng, 0.0, 2.0 * kPi / scene.azimuth_samples);

    PointCloud pc;
    pc.labels.emplace();
    for (int beam = 0; beam < scene.beams; ++beam) {
        // Beam centers sit inside the rows of a beams x W range image.
        const double el = fov_up - (beam + 0.5) * (fov_up + fov_down) / scene.beams;
        for (int a = 0; a < scene.azimuth_samples; ++a) {
            const double az = -kPi + az_offset + 2.0 * kPi * a / scene.azimuth_samples;
            const Ray ray{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};

            double best = kNoHit;
            Label label = 0;
            if (ray.dz < 0.0) {
                best = ground_z / ray.dz;
                label = 0;
            }
            const double t_wall = wall_radius / std::cos(el);
            if (t_wall < best && t_wall * ray.dz <= wall_top) {
                best = t_wall;
                label = wall_label;
            }
            for (const auto& b : boxes) {
                const double t = hit_box(ray, b, ground_z);
                if (t < best) {
                    best = t;
                    label = b.label;
                }
            }
            if (!std::isfinite(best) || best > scene.max_range) continue;
            const double t = best + range_noise(rng);
            pc.xyz.push_back({static_cast<float>(t * ray.dx), static_cast<float>(t * ray.dy),
                              static_cast<float>(t * ray.dz)});
            const double base = 0.25 + 0.5 * static_cast<double>(label) / n_classes;
            pc.remission.push_back(static_cast<float>(std::clamp(base + uniform(rng, -0.1, 0.1), 0.0, 1.0)));
            pc.labels->push_back(label);
        }
    }
    return pc;
}

void make_toy_dataset(const std::filesystem::path& root, int n_scans, int n_classes,
                      std::uint64_t seed, const std::string& sequence, int first_index,
                      const ToySceneConfig& scene) {
    if (n_classes < 2) throw ConfigError("toy dataset needs n_classes >= 2");
    const auto cfg = ClassConfig::toy(n_classes);
    const auto seq_dir = root / "sequences" / sequence;
    std::error_code ec;
    std::filesystem::create_directories(seq_dir / "velodyne", ec);
    std::filesystem::create_directories(seq_dir / "labels", ec);
    if (ec) throw IoError("cannot create '" + seq_dir.string() + "': " + ec.message());

    for (int i = 0; i < n_scans; ++i) {
        const int index = first_index + i;
        const auto pc = make_toy_scan(n_classes, mix_seed({seed, static_cast<std::uint64_t>(index)}), scene);
        char stem[16];
        std::snprintf(stem, sizeof(stem), "%06d", index);
        write_scan(seq_dir / "velodyne" / (std::string(stem) + ".bin"), pc);

        // Raw ids carry an instance id in the upper 16 bits, like the real data.
        std::vector<std::uint32_t> raw(pc.size());
        for (std::size_t p = 0; p < pc.size(); ++p) {
            const Label l = (*pc.labels)[p];
            const std::uint32_t instance = l >= 2 ? 1u : 0u;
            raw[p] = (instance << 16) | cfg.inverse_remap[l];
        }
        write_raw_labels(seq_dir / "labels" / (std::string(stem) + ".label"), raw);
    }
}

}  // namespace cenet
