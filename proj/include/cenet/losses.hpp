#pragma once

#include <string>
#include <vector>

#include <torch/torch.h>

#include "cenet/model.hpp"

namespace cenet {

struct LossConfig {
    double alpha = 1.0;       // weighted cross-entropy
    double beta = 1.5;        // Lovasz-Softmax
    double gamma = 1.0;       // boundary
    double lambda_aux = 1.0;  // auxiliary heads
    int theta0 = 3;           // boundary pooling window
    std::vector<double> class_weights;  // empty = all ones
    std::int64_t ignore_id = 255;

    void validate(int num_classes) const;
};

/// A scalar loss term; `degenerate` marks the documented empty cases
/// (every pixel ignored, no present class, no class with boundaries).
struct LossTerm {
    torch::Tensor value;
    bool degenerate = false;
};

// Logits (B, C, H, W) or (C, H, W); targets (B, H, W) or (H, W), int64.
LossTerm weighted_cross_entropy(const torch::Tensor& logits, const torch::Tensor& target,
                                const LossConfig& cfg);
LossTerm lovasz_softmax(const torch::Tensor& probs, const torch::Tensor& target, const LossConfig& cfg);

/// Discrete gradient of the Jaccard loss along a sorted ground-truth vector.
torch::Tensor lovasz_grad(const torch::Tensor& gt_sorted);

/// maxpool(1 - y, theta0, stride 1, same size) - (1 - y), per channel.
torch::Tensor boundary_map(const torch::Tensor& y, int theta0);

/// 1 - BF1 per class with boundaries, averaged. `valid` (B,H,W) or (H,W)
/// masks pixels out of both boundary maps; pass an undefined tensor for none.
LossTerm boundary_loss(const torch::Tensor& pred_probs, const torch::Tensor& target_onehot,
                       const LossConfig& cfg, const torch::Tensor& valid = {});

/// alpha * wce + beta * lovasz + gamma * boundary.
template <typename T>
T combine_main(const LossConfig& cfg, const T& wce, const T& lovasz, const T& boundary) {
    return cfg.alpha * wce + cfg.beta * lovasz + cfg.gamma * boundary;
}

struct MainLoss {
    torch::Tensor wce, lovasz, boundary, main;
    bool degenerate = false;
};

/// alpha * WCE + beta * Lovasz + gamma * boundary, one softmax shared by the
/// last two terms.
MainLoss main_loss(const torch::Tensor& logits, const torch::Tensor& target, const LossConfig& cfg);

/// Nearest-neighbor label downsampling: keeps target[.., i*stride, j*stride].
torch::Tensor downsample_labels(const torch::Tensor& target, int stride);

struct LossBreakdown {
    double wce = 0.0;
    double lovasz = 0.0;
    double boundary = 0.0;
    double main = 0.0;
    std::vector<double> aux_terms;
    double total = 0.0;
    torch::Tensor total_tensor;  // differentiable

    // Flat record: step,wce,lovasz,boundary,main,aux_1,aux_2,aux_3,total.
    static std::string csv_header();
    std::string csv_row(std::int64_t step) const;
};

/// main + lambda * sum of aux terms, each aux term being the same weighted
/// combination against the plan-specific target.
LossBreakdown total_loss(const SegmentationOutput& out, const torch::Tensor& target,
                         const LossConfig& cfg, AuxMode aux_mode);

}  // namespace cenet
