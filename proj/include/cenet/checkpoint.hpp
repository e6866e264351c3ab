#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "cenet/experiment_config.hpp"
#include "cenet/model.hpp"
#include "cenet/pipeline.hpp"

namespace cenet {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
    int version = kCheckpointVersion;
    std::string config_echo;
    int epoch = 0;  // completed epochs
    std::int64_t global_step = 0;
    double best_miou = -1.0;
    NormStats stats;
    std::vector<double> frequencies;

    ExperimentConfig config() const;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta, CENet& model,
                     torch::optim::Optimizer* optimizer = nullptr);

/// Reads the header only; rejects files of another format or version.
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path);

/// Loads weights (and optimizer state when given) into already-built objects.
CheckpointMeta load_checkpoint(const std::filesystem::path& path, CENet& model,
                               torch::optim::Optimizer* optimizer = nullptr);

}  // namespace cenet
