#pragma once

#include <span>
#include <vector>

#include "cenet/projection.hpp"

namespace cenet {

struct KnnConfig {
    int k = 5;
    int window = 5;             // odd side length of the pixel search window
    double range_cutoff = 1.0;  // meters
    double gaussian_sigma = 1.0;

    void validate() const;
};

/// Re-labels every projected point by a range-gated vote over the pixels in
/// a window around its own pixel: the k valid neighbors closest in range
/// (|d_pixel - d_point| <= range_cutoff, ties by row-major pixel order) vote
/// with weight exp(-dd^2 / 2 sigma^2); the heaviest label wins, ties go to
/// the smaller label. Points without survivors keep their own pixel label.
/// The window does not wrap around the image edges.
std::vector<Label> knn_postprocess(const RangeImage& ri, std::span<const Label> image_labels,
                                   const KnnConfig& cfg, Label fill = 0);

}  // namespace cenet
