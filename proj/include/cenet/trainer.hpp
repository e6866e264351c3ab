#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cenet/checkpoint.hpp"
#include "cenet/experiment_config.hpp"
#include "cenet/metrics.hpp"
#include "cenet/model.hpp"
#include "cenet/pipeline.hpp"

namespace cenet {

namespace fs = std::filesystem;

/// Image-space (pixels vs. the projected label image) and point-space
/// (unprojected, optionally KNN-cleaned, vs. point labels) results.
struct MetricsRecord {
    std::string split;
    std::size_t scans = 0;
    bool knn = false;
    ConfusionMatrix image_cm;
    ConfusionMatrix point_cm;
    IouResult image_iou;
    IouResult point_iou;

    MetricsRecord(int num_classes, Label ignore_id);
    void finalize();
    double image_miou() const { return image_iou.miou.value_or(0.0); }
    double point_miou() const { return point_iou.miou.value_or(0.0); }
    Json to_json(const ClassConfig& classes, const std::string& config_echo) const;
};

struct EvalOptions {
    std::string split = "val";
    bool knn = false;
    std::optional<fs::path> predictions_out;  // writes <out>/sequences/SS/predictions/*.label
};

/// Runs the model over the given scans in eval mode.
MetricsRecord evaluate_split(CENet& model, const DataPipeline& pipeline, const std::vector<ScanEntry>& entries,
                             const KnnConfig* knn, const std::string& split_name,
                             const std::optional<fs::path>& predictions_out = std::nullopt);

/// Loads `checkpoint`, checks it against `cfg` and evaluates a split.
MetricsRecord evaluate(const ExperimentConfig& cfg, const fs::path& checkpoint, const EvalOptions& opt);

/// Point-space metrics of previously written prediction files.
MetricsRecord evaluate_predictions(const ExperimentConfig& cfg, const fs::path& predictions_root,
                                   const std::string& split);

struct TrainOptions {
    std::optional<fs::path> resume;
    std::optional<int> stop_after_epochs;  // simulate an interruption
    std::ostream* log = nullptr;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    std::int64_t global_step = 0;
    double lr_last = 0.0;
    double mean_total_loss = 0.0;
    std::optional<double> val_image_miou;
    std::optional<double> val_point_miou;
};

struct TrainResult {
    fs::path last_checkpoint;
    fs::path best_checkpoint;
    fs::path loss_log;
    fs::path metrics_log;
    std::vector<EpochRecord> history;
    int epochs_completed = 0;
    bool early_stopped = false;
    std::int64_t train_params = 0;
    std::int64_t inference_params = 0;
};

TrainResult train(const ExperimentConfig& cfg, const TrainOptions& opt = {});

/// Learning rate the trainer uses at a given global step.
double scheduled_lr(const ExperimentConfig& cfg, std::int64_t steps_per_epoch, std::int64_t global_step);
std::int64_t steps_per_epoch(const ExperimentConfig& cfg, std::size_t train_scans);

/// Everything needed to run a trained model.
struct LoadedModel {
    CheckpointMeta meta;
    ExperimentConfig config;  // from the checkpoint
    CENet model{nullptr};
    DataPipeline pipeline;
};
LoadedModel load_for_inference(const ExperimentConfig& cfg, const fs::path& checkpoint);

struct InferResult {
    std::vector<fs::path> written;
    std::vector<std::string> skipped;  // "path: reason"
    std::vector<double> wall_ms;
};

/// projection -> forward -> unprojection (-> KNN) -> <out_dir>/<stem>.label
InferResult infer(const ExperimentConfig& cfg, const fs::path& checkpoint, const std::vector<fs::path>& scans,
                  const fs::path& out_dir, bool knn, std::ostream* log = nullptr);

struct AblationDelta {
    std::string name;
    Json set = Json::object();  // dotted key -> value
};

struct AblationPlan {
    std::vector<AblationDelta> deltas;

    static AblationPlan from_json(const Json& j);
    static AblationPlan load(const fs::path& path);
    void validate(const ExperimentConfig& base) const;
};

struct AblationRow {
    std::string name;
    bool failed = false;
    std::string error;
    double miou = 0.0;  // validation, image space
    std::int64_t train_params = 0;
    std::int64_t inference_params = 0;
    double latency_ms = 0.0;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    std::string table() const;
};

AblationTable run_ablation(const AblationPlan& plan, const ExperimentConfig& base, std::ostream* log = nullptr);

}  // namespace cenet
