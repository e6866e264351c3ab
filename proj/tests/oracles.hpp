// Independent reference implementations and random generators shared by the
// unit and acceptance tests. Written for clarity, not speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "cenet/point_cloud.hpp"

namespace oracle {

using cenet::Label;

// ---- generators -----------------------------------------------------------

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))]; }
};

/// Random sweep with the awkward cases mixed in: exact duplicates (occlusion
/// ties), points at the origin, yaw exactly +-pi, points outside the vertical
/// field of view and far/near ranges.
inline cenet::PointCloud random_cloud(Gen& g, std::size_t n, int num_classes = 4) {
    cenet::PointCloud pc;
    pc.labels.emplace();
    for (std::size_t i = 0; i < n; ++i) {
        cenet::Point3 p;
        const int kind = g.integer(0, 19);
        if (kind == 0 && i > 0) {
            p = pc.xyz[static_cast<std::size_t>(g.integer(0, static_cast<int>(i) - 1))];
        } else if (kind == 1) {
            p = {0.f, 0.f, 0.f};
        } else if (kind == 2) {
            p = {static_cast<float>(-g.real(0.5, 40.0)), g.coin() ? 0.0f : -0.0f, static_cast<float>(g.real(-3, 1))};
        } else {
            const double d = kind == 3 ? g.real(0.01, 0.5) : g.real(0.5, 90.0);
            const double yaw = g.real(-std::numbers::pi, std::numbers::pi);
            const double pitch = g.real(-0.7, 0.35);  // wider than typical fields of view
            p = {static_cast<float>(d * std::cos(pitch) * std::cos(yaw)),
                 static_cast<float>(d * std::cos(pitch) * std::sin(yaw)), static_cast<float>(d * std::sin(pitch))};
        }
        pc.xyz.push_back(p);
        pc.remission.push_back(static_cast<float>(g.real(0.0, 1.0)));
        pc.labels->push_back(g.integer(0, num_classes - 1));
    }
    return pc;
}

// ---- projection -----------------------------------------------------------

struct Pixel {
    int row = -1, col = -1;
};

struct UV {
    double u = 0.0, v = 0.0;
    bool valid = false;
};

/// Continuous image coordinates of one point, in double: u from yaw, v from
/// pitch. Yaw of -pi is folded onto +pi.
inline UV spherical_uv(const cenet::Point3& p, int height, int width, double fov_up, double fov_down) {
    const double x = p.x, y = p.y, z = p.z;
    const double d = std::sqrt(x * x + y * y + z * z);
    if (!(d > 0.0)) return {};
    double yaw = std::atan2(y, x);
    if (yaw == -std::numbers::pi) yaw = std::numbers::pi;
    double s = z / d;
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    const double pitch = std::asin(s);
    return {0.5 * (1.0 - yaw / std::numbers::pi) * width, (1.0 - (pitch + fov_down) / (fov_up + fov_down)) * height,
            true};
}

/// Pixel of one point: continuous coordinates floored and clamped into the image.
inline Pixel project_point(const cenet::Point3& p, int height, int width, double fov_up, double fov_down) {
    const UV uv = spherical_uv(p, height, width, fov_up, fov_down);
    if (!uv.valid) return {};
    const double u = uv.u, v = uv.v;
    int col = static_cast<int>(std::floor(u));
    int row = static_cast<int>(std::floor(v));
    col = std::min(std::max(col, 0), width - 1);
    row = std::min(std::max(row, 0), height - 1);
    return {row, col};
}

inline double point_range(const cenet::Point3& p) {
    const double x = p.x, y = p.y, z = p.z;
    return std::sqrt(x * x + y * y + z * z);
}

/// Owner of every pixel by exhaustive search over the points mapped to it:
/// smallest range, then smallest index. -1 where nothing lands.
inline std::vector<std::int64_t> pixel_owners(const cenet::PointCloud& pc, int height, int width, double fov_up,
                                              double fov_down) {
    std::map<std::pair<int, int>, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < pc.size(); ++i) {
        const Pixel px = project_point(pc.xyz[i], height, width, fov_up, fov_down);
        if (px.row >= 0) buckets[{px.row, px.col}].push_back(i);
    }
    std::vector<std::int64_t> owner(static_cast<std::size_t>(height) * width, -1);
    for (const auto& [rc, idx] : buckets) {
        std::size_t best = idx.front();
        for (std::size_t i : idx) {
            const double di = point_range(pc.xyz[i]), db = point_range(pc.xyz[best]);
            if (di < db || (di == db && i < best)) best = i;
        }
        owner[static_cast<std::size_t>(rc.first) * width + rc.second] = static_cast<std::int64_t>(best);
    }
    return owner;
}

// ---- KNN ------------------------------------------------------------------

/// Exhaustive KNN vote: scans the whole image and keeps pixels inside the
/// (non-wrapping) window by coordinate test.
inline std::vector<Label> knn_vote(int height, int width, const std::vector<char>& valid,
                                   const std::vector<double>& pixel_range, const std::vector<Label>& image_labels,
                                   const std::vector<Pixel>& point_pixel, const std::vector<double>& point_range_v,
                                   int k, int window, double cutoff, double sigma, Label fill) {
    std::vector<Label> out(point_pixel.size(), fill);
    const int half = window / 2;
    for (std::size_t i = 0; i < point_pixel.size(); ++i) {
        const Pixel px = point_pixel[i];
        if (px.row < 0) continue;
        struct C {
            double dist;
            int flat;
        };
        std::vector<C> all;
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) {
                if (std::abs(r - px.row) > half || std::abs(c - px.col) > half) continue;
                const int f = r * width + c;
                if (!valid[f]) continue;
                const double dist = std::abs(pixel_range[f] - point_range_v[i]);
                if (dist <= cutoff) all.push_back({dist, f});
            }
        if (all.empty()) {
            out[i] = image_labels[static_cast<std::size_t>(px.row) * width + px.col];
            continue;
        }
        std::stable_sort(all.begin(), all.end(), [](const C& a, const C& b) { return a.dist < b.dist; });
        all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k)));
        std::map<Label, double> w;
        for (const auto& cnd : all) w[image_labels[cnd.flat]] += std::exp(-cnd.dist * cnd.dist / (2 * sigma * sigma));
        Label best = -1;
        double bw = -1.0;
        for (const auto& [l, v] : w)
            if (v > bw) best = l, bw = v;
        out[i] = best;
    }
    return out;
}

// ---- metrics --------------------------------------------------------------

struct Tally {
    std::vector<double> iou;  // NaN when excluded
    double miou = std::numeric_limits<double>::quiet_NaN();
};

/// Per-class TP/FP/FN by direct counting over element pairs.
inline Tally tally_iou(const std::vector<Label>& pred, const std::vector<Label>& gt, int num_classes, Label ignore) {
    Tally t;
    double sum = 0.0;
    int n = 0;
    for (int c = 0; c < num_classes; ++c) {
        std::uint64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gt.size(); ++i) {
            if (gt[i] == ignore) continue;
            if (pred[i] == c && gt[i] == c) ++tp;
            else if (pred[i] == c) ++fp;
            else if (gt[i] == c) ++fn;
        }
        if (tp + fp + fn == 0) {
            t.iou.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        t.iou.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp + fn));
        sum += t.iou.back();
        ++n;
    }
    if (n > 0) t.miou = sum / n;
    return t;
}

// ---- losses (all on a single image, row-major, C x H x W logits) ----------

struct Image {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;  // c * h * w
    double& at(int k, int r, int col) { return v[(static_cast<std::size_t>(k) * h + r) * w + col]; }
    double at(int k, int r, int col) const { return v[(static_cast<std::size_t>(k) * h + r) * w + col]; }
};

inline Image softmax(const Image& logits) {
    Image p = logits;
    for (int r = 0; r < logits.h; ++r)
        for (int col = 0; col < logits.w; ++col) {
            double m = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < logits.c; ++k) m = std::max(m, logits.at(k, r, col));
            double s = 0.0;
            for (int k = 0; k < logits.c; ++k) s += std::exp(logits.at(k, r, col) - m);
            for (int k = 0; k < logits.c; ++k) p.at(k, r, col) = std::exp(logits.at(k, r, col) - m) / s;
        }
    return p;
}

/// Mean over non-ignored pixels of w_t * -log softmax_t.
inline double wce(const Image& logits, const std::vector<Label>& target, const std::vector<double>& weights,
                  Label ignore) {
    const Image p = softmax(logits);
    double sum = 0.0;
    int count = 0;
    for (int r = 0; r < logits.h; ++r)
        for (int col = 0; col < logits.w; ++col) {
            const Label t = target[static_cast<std::size_t>(r) * logits.w + col];
            if (t == ignore) continue;
            sum += weights[t] * -std::log(p.at(t, r, col));
            ++count;
        }
    return count ? sum / count : 0.0;
}

/// Jaccard loss of a mispredicted set given as a bit mask over `fg` pixels.
inline double jaccard_loss(std::uint64_t mispredicted, const std::vector<int>& fg) {
    std::size_t fg_not_m = 0, fg_or_m = 0;
    for (std::size_t i = 0; i < fg.size(); ++i) {
        const bool m = (mispredicted >> i) & 1u;
        if (fg[i] && !m) ++fg_not_m;
        if (fg[i] || m) ++fg_or_m;
    }
    return fg_or_m == 0 ? 0.0 : 1.0 - static_cast<double>(fg_not_m) / static_cast<double>(fg_or_m);
}

/// Lovasz extension evaluated as the level-set integral
///   int_0^1 Delta({i : err_i >= t}) dt
/// with Delta looked up in a table enumerating every subset of pixels.
inline double lovasz_extension(const std::vector<double>& err, const std::vector<int>& fg) {
    const std::size_t p = err.size();
    std::vector<double> table(std::size_t{1} << p);
    for (std::uint64_t s = 0; s < table.size(); ++s) table[s] = jaccard_loss(s, fg);
    std::vector<double> levels(err.begin(), err.end());
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double total = 0.0;
    for (std::size_t j = 1; j < levels.size(); ++j) {
        std::uint64_t set = 0;
        for (std::size_t i = 0; i < p; ++i)
            if (err[i] >= levels[j]) set |= std::uint64_t{1} << i;
        total += (levels[j] - levels[j - 1]) * table[set];
    }
    return total;
}

/// Multi-class Lovasz-Softmax by subset enumeration; classes absent from the
/// (non-ignored) target are skipped. Only usable for a handful of pixels.
inline double lovasz_softmax(const Image& probs, const std::vector<Label>& target, Label ignore) {
    double sum = 0.0;
    int present = 0;
    for (int k = 0; k < probs.c; ++k) {
        std::vector<double> err;
        std::vector<int> fg;
        for (int r = 0; r < probs.h; ++r)
            for (int col = 0; col < probs.w; ++col) {
                const Label t = target[static_cast<std::size_t>(r) * probs.w + col];
                if (t == ignore) continue;
                fg.push_back(t == k);
                err.push_back(std::abs((t == k ? 1.0 : 0.0) - probs.at(k, r, col)));
            }
        if (std::count(fg.begin(), fg.end(), 1) == 0) continue;
        sum += lovasz_extension(err, fg);
        ++present;
    }
    return present ? sum / present : 0.0;
}

/// Sliding-window maximum of (1 - y) minus (1 - y); the window is clipped at
/// the image border.
inline Image boundary(const Image& y, int theta0) {
    Image b = y;
    const int half = theta0 / 2;
    for (int k = 0; k < y.c; ++k)
        for (int r = 0; r < y.h; ++r)
            for (int col = 0; col < y.w; ++col) {
                double m = -std::numeric_limits<double>::infinity();
                for (int dr = -half; dr <= half; ++dr)
                    for (int dc = -half; dc <= half; ++dc) {
                        const int rr = r + dr, cc = col + dc;
                        if (rr < 0 || rr >= y.h || cc < 0 || cc >= y.w) continue;
                        m = std::max(m, 1.0 - y.at(k, rr, cc));
                    }
                b.at(k, r, col) = m - (1.0 - y.at(k, r, col));
            }
    return b;
}

/// 1 - BF1 averaged over classes whose target boundary map is non-empty.
/// Ignored pixels are zero in the one-hot target and removed from both maps.
inline double boundary_loss(const Image& probs, const std::vector<Label>& target, int theta0, Label ignore) {
    Image onehot{probs.c, probs.h, probs.w, std::vector<double>(probs.v.size(), 0.0)};
    for (int r = 0; r < probs.h; ++r)
        for (int col = 0; col < probs.w; ++col) {
            const Label t = target[static_cast<std::size_t>(r) * probs.w + col];
            if (t != ignore) onehot.at(t, r, col) = 1.0;
        }
    const Image pb = boundary(probs, theta0), gb = boundary(onehot, theta0);
    const double eps = 1e-7;
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < probs.c; ++k) {
        double inter = 0.0, ps = 0.0, gs = 0.0;
        for (int r = 0; r < probs.h; ++r)
            for (int col = 0; col < probs.w; ++col) {
                if (target[static_cast<std::size_t>(r) * probs.w + col] == ignore) continue;
                inter += pb.at(k, r, col) * gb.at(k, r, col);
                ps += pb.at(k, r, col);
                gs += gb.at(k, r, col);
            }
        if (!(gs > 0.0)) continue;
        const double prec = inter / (ps + eps), rec = inter / (gs + eps);
        sum += 1.0 - 2.0 * prec * rec / (prec + rec + eps);
        ++n;
    }
    return n ? sum / n : 0.0;
}

}  // namespace oracle
