#include "cenet/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cenet/error.hpp"

namespace cenet {

void KnnConfig::validate() const {
    if (k < 1) throw ConfigError("knn: k must be >= 1");
    if (window < 1 || window % 2 == 0) throw ConfigError("knn: window must be odd and >= 1");
    if (!(range_cutoff > 0.0)) throw ConfigError("knn: range_cutoff must be > 0");
    if (!(gaussian_sigma > 0.0)) throw ConfigError("knn: gaussian_sigma must be > 0");
}

std::vector<Label> knn_postprocess(const RangeImage& ri, std::span<const Label> image_labels,
                                   const KnnConfig& cfg, Label fill) {
    cfg.validate();
    if (image_labels.size() != ri.num_pixels())
        throw ConsistencyError("knn: label image size does not match the range image");

    const int half = cfg.window / 2;
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma);
    std::vector<Label> out(ri.num_points(), fill);

    struct Candidate {
        double dist;
        std::size_t pixel;
    };
    std::vector<Candidate> cand;
    cand.reserve(static_cast<std::size_t>(cfg.window) * cfg.window);
    std::map<Label, double> votes;

    for (std::size_t i = 0; i < out.size(); ++i) {
        const PixelIndex px = ri.pixel_of_point(i);
        if (!px.valid()) continue;
        const double d = ri.point_range(i);

        cand.clear();
        const int r0 = std::max(0, px.row - half), r1 = std::min(ri.height() - 1, px.row + half);
        const int c0 = std::max(0, px.col - half), c1 = std::min(ri.width() - 1, px.col + half);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                if (!ri.valid(r, c)) continue;
                const double dist = std::abs(static_cast<double>(ri.channel(RangeImage::Range, r, c)) - d);
                if (dist > cfg.range_cutoff) continue;
                cand.push_back({dist, ri.flat(r, c)});
            }
        }
        if (cand.empty()) {
            out[i] = image_labels[ri.flat(px.row, px.col)];
            continue;
        }
        const std::size_t keep = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(cfg.k));
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                          [](const Candidate& a, const Candidate& b) {
                              return a.dist < b.dist || (a.dist == b.dist && a.pixel < b.pixel);
                          });
        votes.clear();
        for (std::size_t j = 0; j < keep; ++j)
            votes[image_labels[cand[j].pixel]] += std::exp(-cand[j].dist * cand[j].dist * inv_two_sigma2);
        Label best = votes.begin()->first;
        double best_w = votes.begin()->second;
        for (const auto& [label, w] : votes)
            if (w > best_w) best = label, best_w = w;
        out[i] = best;
    }
    return out;
}

}  // namespace cenet
