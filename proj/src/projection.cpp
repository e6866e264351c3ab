#include "cenet/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cenet/error.hpp"

namespace cenet {

void ProjectionConfig::validate() const {
    if (height < 1 || width < 1) throw ConfigError("projection: height and width must be >= 1");
    if (!(fov_up + fov_down > 0.0)) throw ConfigError("projection: fov_up + fov_down must be > 0");
}

ImageCoord spherical_coords(const Point3& p, double d, const ProjectionConfig& cfg) {
    double yaw = std::atan2(static_cast<double>(p.y), static_cast<double>(p.x));
    // Behind the sensor both signs of zero map to the first column.
    if (yaw == -std::numbers::pi) yaw = std::numbers::pi;
    const double pitch = std::asin(std::clamp(static_cast<double>(p.z) / d, -1.0, 1.0));
    ImageCoord c;
    c.u = 0.5 * (1.0 - yaw / std::numbers::pi) * cfg.width;
    c.v = (1.0 - (pitch + cfg.fov_down) / cfg.fov()) * cfg.height;
    return c;
}

PixelIndex discretize(const ImageCoord& c, const ProjectionConfig& cfg) {
    const double u = std::clamp(std::floor(c.u), 0.0, static_cast<double>(cfg.width - 1));
    const double v = std::clamp(std::floor(c.v), 0.0, static_cast<double>(cfg.height - 1));
    return {static_cast<int>(v), static_cast<int>(u)};
}

RangeImage::RangeImage(int height, int width, std::size_t num_points)
    : height_(height),
      width_(width),
      channels_(static_cast<std::size_t>(kChannels) * height * width, 0.f),
      valid_(static_cast<std::size_t>(height) * width, 0),
      point_of_pixel_(static_cast<std::size_t>(height) * width, -1),
      pixel_of_point_(num_points),
      point_range_(num_points, 0.0) {}

std::size_t RangeImage::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

RangeImage spherical_project(const PointCloud& pc, const ProjectionConfig& cfg, Label ignore_id) {
    cfg.validate();
    const std::size_t n = pc.size();
    RangeImage ri(cfg.height, cfg.width, n);
    auto& range = ri.point_range_;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = pc.xyz[i].x, y = pc.xyz[i].y, z = pc.xyz[i].z;
        range[i] = std::sqrt(x * x + y * y + z * z);
        if (range[i] > 0.0) ri.pixel_of_point_[i] = discretize(spherical_coords(pc.xyz[i], range[i], cfg), cfg);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const PixelIndex px = ri.pixel_of_point_[i];
        if (!px.valid()) continue;
        auto& owner = ri.point_of_pixel_[ri.flat(px.row, px.col)];
        // Closest point wins; equal ranges keep the earlier (lower) index.
        if (owner < 0 || range[i] < range[static_cast<std::size_t>(owner)])
            owner = static_cast<std::int64_t>(i);
    }

    if (pc.labels) ri.label_image_.emplace(ri.num_pixels(), ignore_id);
    const std::size_t plane = ri.num_pixels();
    for (std::size_t f = 0; f < plane; ++f) {
        const std::int64_t owner = ri.point_of_pixel_[f];
        if (owner < 0) continue;
        const auto i = static_cast<std::size_t>(owner);
        ri.valid_[f] = 1;
        ri.channels_[RangeImage::X * plane + f] = pc.xyz[i].x;
        ri.channels_[RangeImage::Y * plane + f] = pc.xyz[i].y;
        ri.channels_[RangeImage::Z * plane + f] = pc.xyz[i].z;
        ri.channels_[RangeImage::Range * plane + f] = static_cast<float>(range[i]);
        ri.channels_[RangeImage::Remission * plane + f] = pc.remission[i];
        if (ri.label_image_) (*ri.label_image_)[f] = (*pc.labels)[i];
    }
    return ri;
}

std::vector<Label> unproject_labels(std::span<const Label> image_labels, const RangeImage& ri,
                                    Label fill) {
    if (image_labels.size() != ri.num_pixels())
        throw ConsistencyError("unproject: label image has " + std::to_string(image_labels.size()) +
                               " pixels, range image has " + std::to_string(ri.num_pixels()));
    std::vector<Label> out(ri.num_points(), fill);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const PixelIndex px = ri.pixel_of_point(i);
        if (px.valid()) out[i] = image_labels[ri.flat(px.row, px.col)];
    }
    return out;
}

}  // namespace cenet
