#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cenet/point_cloud.hpp"

namespace cenet {

inline constexpr Label kDefaultIgnoreId = 255;

enum class UnknownLabelPolicy { MapToIgnore, Error };

/// Class definition of a dataset: raw label ids are remapped to dense
/// train ids 0..C-1, everything else goes to `ignore_id`.
struct ClassConfig {
    std::string dataset;
    int num_classes = 0;
    std::vector<std::string> class_names;           // size C
    std::map<std::uint32_t, Label> remap;           // raw -> train id or ignore_id
    std::vector<std::uint32_t> inverse_remap;       // train id -> raw
    std::vector<double> frequencies;                // size C, sums to 1
    Label ignore_id = kDefaultIgnoreId;
    UnknownLabelPolicy unknown_policy = UnknownLabelPolicy::MapToIgnore;

    // Throws ConfigError when an invariant does not hold.
    void validate() const;

    // Throws DataError for unknown raw ids under UnknownLabelPolicy::Error.
    Label to_train(std::uint32_t raw) const;
    std::uint32_t to_raw(Label train) const;

    /// Inverse-log frequency weights w_c = 1 / log(1.02 + f_c).
    std::vector<double> class_weights(double epsilon = 0.02) const;

    // Replaces `frequencies` with normalized counts; classes never seen keep a
    // tiny floor so weights stay finite.
    void set_frequencies_from_counts(const std::vector<std::uint64_t>& counts);

    static ClassConfig semantic_kitti();
    static ClassConfig semantic_poss();
    // Raw ids of the synthetic scenes: 0 = unlabeled, train id t <-> raw t + 1.
    static ClassConfig toy(int num_classes);
    static ClassConfig by_name(const std::string& kind, int toy_classes = 4);
};

}  // namespace cenet
