#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cenet/augment.hpp"
#include "cenet/class_config.hpp"
#include "cenet/knn.hpp"
#include "cenet/lidar_io.hpp"
#include "cenet/losses.hpp"
#include "cenet/model.hpp"
#include "cenet/projection.hpp"

namespace cenet {

using Json = nlohmann::json;

struct DatasetBlock {
    std::string root = "data";
    DatasetKind kind = DatasetKind::SemanticKitti;
    int toy_classes = 4;
    std::optional<std::vector<std::string>> train_sequences, val_sequences, test_sequences;
    std::string frequencies = "builtin";  // builtin | auto (count the training split)
    UnknownLabelPolicy unknown_labels = UnknownLabelPolicy::MapToIgnore;
};

struct ProjectionBlock {
    int height = 64;
    int width = 2048;
    double fov_up_deg = 3.0;
    double fov_down_deg = 25.0;
    std::string normalization = "auto";  // auto | fixed | none
    std::vector<double> means{0, 0, 0, 0, 0};
    std::vector<double> stds{1, 1, 1, 1, 1};
    int stats_max_scans = 200;

    ProjectionConfig projection() const;
};

struct LossBlock {
    double alpha = 1.0, beta = 1.5, gamma = 1.0, lambda_aux = 1.0;
    int theta0 = 3;
    double class_weight_epsilon = 0.02;
    std::optional<std::vector<double>> class_weights;  // overrides frequency weights
};

enum class ScheduleKind { Cosine, Cyclic };

struct OptimizerBlock {
    double momentum = 0.9;
    double weight_decay = 1e-4;
    ScheduleKind schedule = ScheduleKind::Cosine;
    double lr_max = 1e-2;  // initial LR for cosine, peak for cyclic
    double lr_min = 0.0;
    int epochs = 100;
    int cycles = 1;
};

struct RuntimeBlock {
    std::uint64_t seed = 1;
    int batch_size = 8;
    int workers = 1;
    std::string device = "cpu";
    bool allow_device_downgrade = true;
    std::string checkpoint_dir = "runs/default";
    int log_interval = 10;
    std::optional<double> early_stop_miou;  // stop once val image-space mIoU reaches it
    std::optional<int> max_train_scans;
    std::optional<int> max_eval_scans;
};

struct ExperimentConfig {
    DatasetBlock dataset;
    ProjectionBlock projection;
    AugmentationConfig augmentation;
    ModelConfig model;
    LossBlock loss;
    KnnConfig knn;
    OptimizerBlock optimizer;
    RuntimeBlock runtime;

    void validate() const;

    ClassConfig class_config() const;
    SplitSpec splits() const;
    LossConfig loss_config(const ClassConfig& classes) const;

    Json to_json() const;
    // Canonical one-line JSON, embedded in checkpoints and metrics records.
    std::string echo() const { return to_json().dump(); }

    /// Overlays `j` on `base`; unknown keys raise ConfigError.
    static ExperimentConfig from_json(const Json& j, ExperimentConfig base);
    static ExperimentConfig from_json(const Json& j);
    static ExperimentConfig preset(const std::string& name);  // kitti | poss | toy

    /// Reads a config file; a top-level "preset" key selects the starting
    /// point. DATASET_ROOT, when set, overrides dataset.root.
    static ExperimentConfig load(const std::filesystem::path& path);

    // Sets one dotted key (e.g. "model.input_kernel") from a JSON value.
    void set(const std::string& dotted_key, const Json& value);
};

/// Flattened differences "key: a -> b" between two JSON documents.
std::vector<std::string> json_diff(const Json& a, const Json& b, const std::string& prefix = "");

struct ConfigKeyDoc {
    std::string key;
    std::string description;
};
const std::vector<ConfigKeyDoc>& config_key_docs();
/// Markdown reference of every key with its default value.
std::string config_reference_markdown();

}  // namespace cenet
