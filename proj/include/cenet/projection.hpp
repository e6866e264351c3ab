#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cenet/point_cloud.hpp"

namespace cenet {

struct ProjectionConfig {
    int height = 64;
    int width = 2048;
    double fov_up = 3.0 * 3.14159265358979323846 / 180.0;    // radians above the horizon
    double fov_down = 25.0 * 3.14159265358979323846 / 180.0;  // radians below the horizon

    void validate() const;
    double fov() const { return fov_up + fov_down; }
};

struct PixelIndex {
    int row = -1;  // v
    int col = -1;  // u
    bool valid() const { return row >= 0; }
};

/// Continuous (pre-floor) image coordinates of a point with range `d > 0`.
struct ImageCoord {
    double u = 0.0;
    double v = 0.0;
};

ImageCoord spherical_coords(const Point3& p, double d, const ProjectionConfig& cfg);
PixelIndex discretize(const ImageCoord& c, const ProjectionConfig& cfg);

/// (5, H, W) range image with projection bookkeeping. Channel order is
/// x, y, z, d, r; invalid pixels are zero and flagged in `valid`.
class RangeImage {
public:
    static constexpr int kChannels = 5;
    enum Channel { X = 0, Y = 1, Z = 2, Range = 3, Remission = 4 };

    RangeImage() = default;
    RangeImage(int height, int width, std::size_t num_points);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t num_pixels() const { return static_cast<std::size_t>(height_) * width_; }
    std::size_t num_points() const { return pixel_of_point_.size(); }

    std::size_t flat(int row, int col) const { return static_cast<std::size_t>(row) * width_ + col; }

    float channel(int c, int row, int col) const { return channels_[c * num_pixels() + flat(row, col)]; }
    float& channel(int c, int row, int col) { return channels_[c * num_pixels() + flat(row, col)]; }
    bool valid(int row, int col) const { return valid_[flat(row, col)] != 0; }
    std::int64_t point_of_pixel(int row, int col) const { return point_of_pixel_[flat(row, col)]; }
    PixelIndex pixel_of_point(std::size_t i) const { return pixel_of_point_[i]; }
    double point_range(std::size_t i) const { return point_range_[i]; }

    // Channel-major (C, H, W) buffer, ready to wrap as a tensor.
    std::span<const float> channels() const { return channels_; }
    std::span<const std::uint8_t> valid_mask() const { return valid_; }
    std::span<const std::int64_t> point_of_pixel() const { return point_of_pixel_; }
    std::span<const PixelIndex> pixel_of_point() const { return pixel_of_point_; }
    std::size_t valid_count() const;

    // Row-major (H, W) labels of the winning points; ignore id elsewhere.
    const std::optional<std::vector<Label>>& label_image() const { return label_image_; }

private:
    friend RangeImage spherical_project(const PointCloud&, const ProjectionConfig&, Label);

    int height_ = 0;
    int width_ = 0;
    std::vector<float> channels_;
    std::vector<std::uint8_t> valid_;
    std::vector<std::int64_t> point_of_pixel_;
    std::vector<PixelIndex> pixel_of_point_;
    std::vector<double> point_range_;
    std::optional<std::vector<Label>> label_image_;
};

/// Spherical projection. Each pixel keeps the closest point (ties: lower
/// index). Points with zero range are not projected and keep an invalid
/// PixelIndex. `ignore_id` fills empty pixels of the label image.
RangeImage spherical_project(const PointCloud& pc, const ProjectionConfig& cfg,
                             Label ignore_id = 255);

/// Gives every point the label of its own pixel. Unprojected points get `fill`.
std::vector<Label> unproject_labels(std::span<const Label> image_labels, const RangeImage& ri,
                                    Label fill = 0);

}  // namespace cenet
