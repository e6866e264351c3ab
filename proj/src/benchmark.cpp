#include "cenet/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cenet/error.hpp"

namespace cenet {

torch::Device resolve_device(const std::string& name, bool allow_downgrade, std::string* note) {
    if (name == "cpu") return torch::kCPU;
    if (name.rfind("cuda", 0) == 0) {
        if (torch::cuda::is_available()) return torch::Device(name);
        if (!allow_downgrade) throw EnvironmentError("device '" + name + "' is not available");
        if (note) *note = "device '" + name + "' unavailable, fell back to cpu";
        return torch::kCPU;
    }
    throw ConfigError("unknown device '" + name + "'");
}

namespace {

void synchronize(const torch::Device& device) {
    if (device.is_cuda()) torch::cuda::synchronize();
}

}  // namespace

BenchmarkReport benchmark_forward(const ModelConfig& base, const BenchmarkOptions& opt) {
    if (opt.warmup_iters < 5 || opt.timed_iters < 20)
        throw ConfigError("benchmark: need at least 5 warmup and 20 timed iterations");
    if (opt.group_size < 1) throw ConfigError("benchmark: group_size must be >= 1");

    BenchmarkReport report;
    const auto device = resolve_device(opt.device, opt.allow_downgrade, &report.note);
    report.device = device.str();
    torch::NoGradGuard no_grad;

    for (int kernel : opt.kernels) {
        ModelConfig cfg = base;
        cfg.input_kernel = kernel;
        torch::manual_seed(opt.seed);
        auto model = build_model(cfg);
        model->to(device);
        model->eval();
        for (int width : opt.widths) {
            auto input = torch::randn({1, cfg.in_channels, opt.height, width}).to(device);
            for (int i = 0; i < opt.warmup_iters; ++i) model->forward(input);
            synchronize(device);

            std::vector<double> ms;
            ms.reserve(opt.timed_iters);
            for (int i = 0; i < opt.timed_iters; ++i) {
                synchronize(device);
                const auto t0 = std::chrono::steady_clock::now();
                auto out = model->forward(input);
                synchronize(device);
                const auto t1 = std::chrono::steady_clock::now();
                ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }

            std::vector<double> group_means;
            for (std::size_t g = 0; g < ms.size(); g += opt.group_size) {
                const auto end = std::min(ms.size(), g + opt.group_size);
                group_means.push_back(std::accumulate(ms.begin() + g, ms.begin() + end, 0.0) /
                                      static_cast<double>(end - g));
            }
            std::sort(group_means.begin(), group_means.end());
            const std::size_t n = group_means.size();
            const double median = n % 2 ? group_means[n / 2] : 0.5 * (group_means[n / 2 - 1] + group_means[n / 2]);
            const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
            double var = 0.0;
            for (double v : ms) var += (v - mean) * (v - mean);

            BenchmarkRow row;
            row.height = opt.height;
            row.width = width;
            row.kernel = kernel;
            row.warmup_iters = opt.warmup_iters;
            row.timed_iters = opt.timed_iters;
            row.mean_latency_ms = median;
            row.latency_std_ms = std::sqrt(var / ms.size());
            row.fps = 1000.0 / median;
            row.inference_params = count_parameters(*model, ParamScope::Inference);
            report.rows.push_back(row);
        }
    }
    return report;
}

std::string BenchmarkReport::table() const {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "device: %s (forward pass only)%s%s\n", device.c_str(),
                  note.empty() ? "" : "; ", note.c_str());
    out += line;
    out += "| Kernel Size | Input Resolution | Model Latency(ms) | FPS | Latency std(ms) | Params(M) |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "| %dx%d | %d x %d | %.3f | %.1f | %.3f | %.3f |\n", r.kernel, r.kernel,
                      r.height, r.width, r.mean_latency_ms, r.fps, r.latency_std_ms, r.inference_params / 1e6);
        out += line;
    }
    return out;
}

}  // namespace cenet
