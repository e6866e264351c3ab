#include <doctest.h>

#include "cenet/error.hpp"
#include "cenet/knn.hpp"
#include "cenet/metrics.hpp"
#include "oracles.hpp"

using namespace cenet;

namespace {

struct Case {
    PointCloud pc;
    RangeImage ri;
    std::vector<Label> image_labels;
};

Case random_case(oracle::Gen& g, int h, int w, int classes) {
    Case c;
    c.pc = oracle::random_cloud(g, static_cast<std::size_t>(g.integer(1, 3 * h * w)), classes);
    ProjectionConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.fov_up = 0.35;
    cfg.fov_down = 0.7;
    c.ri = spherical_project(c.pc, cfg);
    c.image_labels.resize(c.ri.num_pixels());
    for (auto& l : c.image_labels) l = g.integer(0, classes - 1);
    return c;
}

std::vector<Label> brute_force(const Case& c, const KnnConfig& k, Label fill) {
    const auto& ri = c.ri;
    std::vector<char> valid(ri.num_pixels());
    std::vector<double> prange(ri.num_pixels());
    for (int r = 0; r < ri.height(); ++r)
        for (int col = 0; col < ri.width(); ++col) {
            valid[ri.flat(r, col)] = ri.valid(r, col);
            prange[ri.flat(r, col)] = ri.channel(RangeImage::Range, r, col);
        }
    std::vector<oracle::Pixel> ppix;
    std::vector<double> prng;
    for (std::size_t i = 0; i < c.pc.size(); ++i) {
        ppix.push_back(oracle::project_point(c.pc.xyz[i], ri.height(), ri.width(), 0.35, 0.7));
        prng.push_back(oracle::point_range(c.pc.xyz[i]));
    }
    return oracle::knn_vote(ri.height(), ri.width(), valid, prange, c.image_labels, ppix, prng, k.k, k.window,
                            k.range_cutoff, k.gaussian_sigma, fill);
}

}  // namespace

TEST_CASE("KNN matches the exhaustive vote") {
    oracle::Gen g(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto c = random_case(g, 16, 16, g.integer(2, 5));
        KnnConfig k;
        k.k = g.integer(1, 9);
        k.window = 2 * g.integer(0, 3) + 1;
        k.range_cutoff = g.real(0.1, 20.0);
        k.gaussian_sigma = g.real(0.2, 3.0);
        CHECK(knn_postprocess(c.ri, c.image_labels, k, -1) == brute_force(c, k, -1));
    }
}

TEST_CASE("k = 1 with a 1x1 window reproduces plain unprojection") {
    oracle::Gen g(78);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = random_case(g, 8, 24, 4);
        KnnConfig k;
        k.k = 1;
        k.window = 1;
        k.range_cutoff = g.real(0.01, 5.0);
        CHECK(knn_postprocess(c.ri, c.image_labels, k, 9) == unproject_labels(c.image_labels, c.ri, 9));
    }
}

TEST_CASE("a point far from every neighbor keeps its own pixel label") {
    ProjectionConfig cfg;
    cfg.height = 4;
    cfg.width = 8;
    PointCloud pc;
    pc.xyz = {{10.f, 0.f, 0.f}, {40.f, 0.1f, 0.f}};
    pc.remission = {0.f, 0.f};
    const auto ri = spherical_project(pc, cfg);
    std::vector<Label> img(ri.num_pixels(), 0);
    img[ri.flat(ri.pixel_of_point(0).row, ri.pixel_of_point(0).col)] = 2;
    KnnConfig k;
    const auto out = knn_postprocess(ri, img, k);
    CHECK(out[0] == 2);
}

TEST_CASE("distance ties keep lower pixel indices, weight ties the smaller label") {
    // Width 4: +y lands in column 1, -x in column 0, +x in column 2; ranges are exact.
    ProjectionConfig cfg;
    cfg.height = 1;
    cfg.width = 4;
    cfg.fov_up = 0.1;
    cfg.fov_down = 0.1;
    PointCloud pc;
    pc.xyz = {{0.f, 10.f, 0.f}, {0.f, 9.5f, 0.f}, {-10.5f, 0.f, 0.f}, {10.5f, 0.f, 0.f}};
    pc.remission = std::vector<float>(4, 0.f);
    const auto ri = spherical_project(pc, cfg);
    REQUIRE(ri.pixel_of_point(0).col == 1);
    REQUIRE(ri.point_of_pixel(0, 1) == 1);
    REQUIRE(ri.pixel_of_point(2).col == 0);
    REQUIRE(ri.pixel_of_point(3).col == 2);
    const std::vector<Label> img{3, 5, 2, 0};
    KnnConfig k;
    k.window = 3;
    k.range_cutoff = 1.0;
    // Point 0 sees three candidates all 0.5 m away.
    k.k = 3;
    CHECK(knn_postprocess(ri, img, k)[0] == 2);
    k.k = 2;
    CHECK(knn_postprocess(ri, img, k)[0] == 3);
    // Point 1 owns its pixel: weight 1 beats two neighbors at 1 m.
    k.k = 3;
    CHECK(knn_postprocess(ri, img, k)[1] == 5);
}

TEST_CASE("bijective projection with range-separated classes leaves mIoU unchanged") {
    oracle::Gen g(79);
    for (int trial = 0; trial < 10; ++trial) {
        const int h = 16, w = 16, classes = 3;
        ProjectionConfig cfg;
        cfg.height = h;
        cfg.width = w;
        cfg.fov_up = 0.2;
        cfg.fov_down = 0.2;
        PointCloud pc;
        std::vector<Label> gt;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const Label l = g.integer(0, classes - 1);
                const double d = 10.0 + 5.0 * l + g.real(0.0, 0.2);
                const double yaw = std::numbers::pi * (1.0 - (c + 0.5) * 2.0 / w);
                const double pitch = 0.2 - (r + 0.5) * 0.4 / h;
                pc.xyz.push_back({static_cast<float>(d * std::cos(pitch) * std::cos(yaw)),
                                  static_cast<float>(d * std::cos(pitch) * std::sin(yaw)),
                                  static_cast<float>(d * std::sin(pitch))});
                pc.remission.push_back(0.f);
                gt.push_back(l);
            }
        pc.labels = gt;
        const auto ri = spherical_project(pc, cfg);
        REQUIRE(ri.valid_count() == pc.size());
        const auto& img = *ri.label_image();
        ConfusionMatrix plain(classes, 255), knn(classes, 255);
        plain.accumulate(unproject_labels(img, ri), gt);
        knn.accumulate(knn_postprocess(ri, img, KnnConfig{}), gt);
        CHECK(iou(plain).miou == iou(knn).miou);
        CHECK(plain == knn);
    }
}

TEST_CASE("KNN input validation") {
    RangeImage ri = spherical_project(PointCloud{}, ProjectionConfig{});
    KnnConfig k;
    k.window = 4;
    CHECK_THROWS_AS(knn_postprocess(ri, std::vector<Label>(ri.num_pixels()), k), ConfigError);
    CHECK_THROWS_AS(knn_postprocess(ri, std::vector<Label>(3), KnnConfig{}), ConsistencyError);
}
