#include "cenet/class_config.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "cenet/error.hpp"

namespace cenet {

namespace {

struct RawClass {
    std::uint32_t raw;
    int train;  // -1 = ignored
    double content;
};

// Published SemanticKITTI learning map and per-raw-id point fractions.
const std::vector<RawClass>& kitti_table() {
    static const std::vector<RawClass> table = {
        {0, -1, 0.018889854628292943},   {1, -1, 0.0002937197336781505},
        {10, 0, 0.040818519255974316},   {11, 1, 0.00016609538710764618},
        {13, 4, 2.7879693665067774e-05}, {15, 2, 0.00039838616015114444},
        {16, 4, 0.0},                    {18, 3, 0.0020633612104619787},
        {20, 4, 0.0016218197275284021},  {30, 5, 0.00017698551338515307},
        {31, 6, 1.1065903904919655e-04}, {32, 7, 5.532951952459828e-05},
        {40, 8, 0.1987493871255525},     {44, 9, 0.014717169549888214},
        {48, 10, 0.14392298360372},      {49, 11, 0.0039048553037472045},
        {50, 12, 0.1326861944777486},    {51, 13, 0.0723592229456223},
        {52, -1, 0.002395131480328884},  {60, 8, 4.7084144280367186e-05},
        {70, 14, 0.26681502148037506},   {71, 15, 0.006035012012626033},
        {72, 16, 0.07814222006271769},   {80, 17, 0.002855498193863172},
        {81, 18, 0.0006155958086189918}, {99, -1, 0.009923127583046915},
        {252, 0, 0.001789309418528068},  {253, 6, 0.00012709999297008662},
        {254, 5, 0.00016059776092534436}, {255, 7, 3.745553104802113e-05},
        {256, 4, 0.0},                   {257, 4, 0.00011351574470342043},
        {258, 3, 0.00010157861367183268}, {259, 4, 4.3840131989471124e-05},
    };
    return table;
}

ClassConfig from_table(std::string dataset, std::vector<std::string> names,
                       const std::vector<RawClass>& table,
                       std::vector<std::uint32_t> inverse) {
    ClassConfig cfg;
    cfg.dataset = std::move(dataset);
    cfg.num_classes = static_cast<int>(names.size());
    cfg.class_names = std::move(names);
    cfg.inverse_remap = std::move(inverse);
    std::vector<double> freq(cfg.num_classes, 0.0);
    for (const auto& r : table) {
        cfg.remap[r.raw] = r.train < 0 ? cfg.ignore_id : r.train;
        if (r.train >= 0) freq[r.train] += r.content;
    }
    const double total = std::accumulate(freq.begin(), freq.end(), 0.0);
    for (auto& f : freq) f = total > 0 ? f / total : 1.0 / cfg.num_classes;
    cfg.frequencies = std::move(freq);
    return cfg;
}

}  // namespace

void ClassConfig::validate() const {
    if (num_classes < 2) throw ConfigError("class config: num_classes must be >= 2");
    if (static_cast<int>(class_names.size()) != num_classes)
        throw ConfigError("class config: class_names size differs from num_classes");
    if (static_cast<int>(inverse_remap.size()) != num_classes)
        throw ConfigError("class config: inverse_remap size differs from num_classes");
    if (ignore_id >= 0 && ignore_id < num_classes)
        throw ConfigError("class config: ignore_id collides with a train id");
    for (const auto& [raw, train] : remap) {
        if (train != ignore_id && (train < 0 || train >= num_classes))
            throw ConfigError("class config: remap of raw id " + std::to_string(raw) +
                              " is out of range");
    }
    for (int t = 0; t < num_classes; ++t) {
        auto it = remap.find(inverse_remap[t]);
        if (it == remap.end() || it->second != t)
            throw ConfigError("class config: inverse_remap of train id " + std::to_string(t) +
                              " does not round-trip");
    }
    if (static_cast<int>(frequencies.size()) != num_classes)
        throw ConfigError("class config: frequencies size differs from num_classes");
    double sum = 0.0;
    for (double f : frequencies) {
        if (!(f >= 0.0)) throw ConfigError("class config: negative class frequency");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ConfigError("class config: frequencies must sum to 1");
}

Label ClassConfig::to_train(std::uint32_t raw) const {
    auto it = remap.find(raw);
    if (it != remap.end()) return it->second;
    if (unknown_policy == UnknownLabelPolicy::Error)
        throw DataError("unknown raw label id " + std::to_string(raw));
    return ignore_id;
}

std::uint32_t ClassConfig::to_raw(Label train) const {
    if (train < 0 || train >= num_classes) {
        // Ignored pixels go back to the first raw id mapped to ignore (usually 0).
        for (const auto& [raw, t] : remap)
            if (t == ignore_id) return raw;
        return 0;
    }
    return inverse_remap[train];
}

std::vector<double> ClassConfig::class_weights(double epsilon) const {
    std::vector<double> w(num_classes);
    for (int c = 0; c < num_classes; ++c) w[c] = 1.0 / std::log(1.0 + epsilon + frequencies[c]);
    return w;
}

void ClassConfig::set_frequencies_from_counts(const std::vector<std::uint64_t>& counts) {
    if (static_cast<int>(counts.size()) != num_classes)
        throw ConsistencyError("class counts size differs from num_classes");
    std::vector<double> f(num_classes);
    double total = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        f[c] = static_cast<double>(counts[c]) + 1e-3;
        total += f[c];
    }
    for (auto& v : f) v /= total;
    frequencies = std::move(f);
}

ClassConfig ClassConfig::semantic_kitti() {
    return from_table("semantic_kitti",
                      {"car", "bicycle", "motorcycle", "truck", "other-vehicle", "person",
                       "bicyclist", "motorcyclist", "road", "parking", "sidewalk",
                       "other-ground", "building", "fence", "vegetation", "trunk", "terrain",
                       "pole", "traffic-sign"},
                      kitti_table(),
                      {10, 11, 15, 18, 20, 30, 31, 32, 40, 44, 48, 49, 50, 51, 70, 71, 72, 80, 81});
}

ClassConfig ClassConfig::semantic_poss() {
    // Point fractions are not bundled; frequencies start uniform and are
    // normally recomputed from the training split.
    const std::vector<RawClass> table = {
        {0, -1, 0.0}, {4, 0, 1.0},  {5, 0, 1.0},   {6, 1, 1.0},   {7, 2, 1.0},   {8, 3, 1.0},
        {9, 4, 1.0},  {10, 5, 1.0}, {11, 5, 0.0},  {12, 5, 0.0},  {13, 6, 1.0},  {14, 7, 1.0},
        {15, 8, 1.0}, {16, 9, 1.0}, {17, 10, 1.0}, {21, 11, 1.0}, {22, 12, 1.0},
    };
    return from_table("semantic_poss",
                      {"person", "rider", "car", "trunk", "plants", "traffic-sign", "pole",
                       "trashcan", "building", "cone-stone", "fence", "bike", "ground"},
                      table, {4, 6, 7, 8, 9, 10, 13, 14, 15, 16, 17, 21, 22});
}

ClassConfig ClassConfig::toy(int num_classes) {
    if (num_classes < 2) throw ConfigError("toy class config needs at least 2 classes");
    std::vector<std::string> names;
    std::vector<RawClass> table{{0, -1, 0.0}};
    std::vector<std::uint32_t> inverse;
    for (int c = 0; c < num_classes; ++c) {
        if (c == 0) names.emplace_back("ground");
        else if (c == 1) names.emplace_back("wall");
        else names.push_back("object-" + std::to_string(c - 2));
        table.push_back({static_cast<std::uint32_t>(c + 1), c, 1.0});
        inverse.push_back(static_cast<std::uint32_t>(c + 1));
    }
    return from_table("toy", std::move(names), table, std::move(inverse));
}

ClassConfig ClassConfig::by_name(const std::string& kind, int toy_classes) {
    if (kind == "semantic_kitti" || kind == "kitti") return semantic_kitti();
    if (kind == "semantic_poss" || kind == "poss") return semantic_poss();
    if (kind == "toy") return toy(toy_classes);
    throw ConfigError("unknown dataset kind '" + kind + "'");
}

}  // namespace cenet
