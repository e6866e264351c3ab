#pragma once

#include <string>
#include <vector>

#include <torch/torch.h>

#include "cenet/model.hpp"

namespace cenet {

struct BenchmarkRow {
    int height = 0;
    int width = 0;
    int kernel = 0;
    int warmup_iters = 0;
    int timed_iters = 0;
    double mean_latency_ms = 0.0;  // median of per-group means
    double latency_std_ms = 0.0;
    double fps = 0.0;              // 1000 / mean_latency_ms
    std::int64_t inference_params = 0;
};

struct BenchmarkReport {
    std::string device;
    std::string note;
    std::vector<BenchmarkRow> rows;

    /// Table with Kernel Size, Input Resolution, Model Latency(ms) and FPS columns.
    std::string table() const;
};

struct BenchmarkOptions {
    int height = 64;
    std::vector<int> widths{512, 1024, 2048};
    std::vector<int> kernels{1, 3};
    int warmup_iters = 5;
    int timed_iters = 20;
    int group_size = 5;
    std::string device = "cpu";
    bool allow_downgrade = true;
    std::uint64_t seed = 0;
};

/// Resolves a device string; a missing accelerator raises EnvironmentError
/// unless `allow_downgrade` is set, in which case the host CPU is used.
torch::Device resolve_device(const std::string& name, bool allow_downgrade, std::string* note = nullptr);

/// Times eval-mode forward passes only (no projection, no post-processing)
/// for every kernel x width combination of `base`.
BenchmarkReport benchmark_forward(const ModelConfig& base, const BenchmarkOptions& opt);

}  // namespace cenet
