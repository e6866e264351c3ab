#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace cenet {

enum class Activation { ReLU, SiLU, Hardswish };
enum class AuxMode { None, PlanA, PlanB };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);
AuxMode parse_aux_mode(const std::string& s);
std::string to_string(AuxMode m);

struct ModelConfig {
    int in_channels = 5;
    int num_classes = 20;
    Activation activation = Activation::ReLU;
    int input_kernel = 3;  // kernel of the input module and the head conv blocks
    std::vector<int> stem_channels{64, 128, 128};
    std::vector<int> stage_channels{128, 128, 128, 128};
    std::vector<int> stage_blocks{3, 4, 6, 3};
    std::vector<int> stage_strides{1, 2, 4, 8};  // cumulative output strides
    std::vector<int> head_channels{256, 128};
    AuxMode aux_mode = AuxMode::None;
    std::vector<int> aux_stages{2, 3, 4};  // 1-based stage numbers

    void validate() const;
    int max_stride() const { return stage_strides.back(); }
    int decoder_channels() const;
    bool operator==(const ModelConfig&) const = default;
};

struct SegmentationOutput {
    torch::Tensor main_logits;            // (B, C, H, W)
    std::vector<torch::Tensor> aux_logits;
    std::vector<int> aux_strides;         // output stride of each aux entry's source stage
    bool aux_upsampled = false;           // plan B: aux maps already at full resolution
};

/// Bilinear resize of (F, h, w) or (B, F, h, w) to (H, W), corners aligned.
/// Returns the input itself when the size already matches.
torch::Tensor bilinear_upsample(const torch::Tensor& feat, int64_t height, int64_t width);

torch::Tensor activate(const torch::Tensor& x, Activation a);

class ConvBnActImpl : public torch::nn::Module {
public:
    ConvBnActImpl(int in, int out, int kernel, int stride, Activation act);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Conv2d conv_{nullptr};
    torch::nn::BatchNorm2d bn_{nullptr};
    Activation act_;
};
TORCH_MODULE(ConvBnAct);

/// Two 3x3 conv + BN layers with an identity (or 1x1 projection) shortcut.
class BasicBlockImpl : public torch::nn::Module {
public:
    BasicBlockImpl(int in, int out, int stride, Activation act);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
    torch::nn::BatchNorm2d bn1_{nullptr}, bn2_{nullptr};
    torch::nn::Sequential downsample_{nullptr};
    Activation act_;
};
TORCH_MODULE(BasicBlock);

/// Input module, four residual stages, parameter-free interpolation decoder
/// and classification head. Auxiliary heads are registered under
/// "aux_heads" and only run in training mode.
class CENetImpl : public torch::nn::Module {
public:
    explicit CENetImpl(ModelConfig cfg);

    SegmentationOutput forward(torch::Tensor input);
    const ModelConfig& config() const { return cfg_; }

private:
    ModelConfig cfg_;
    torch::nn::Sequential stem_{nullptr};
    std::vector<torch::nn::Sequential> stages_;
    ConvBnAct head1_{nullptr}, head2_{nullptr};
    torch::nn::Conv2d classifier_{nullptr};
    torch::nn::ModuleList aux_heads_{nullptr};
};
TORCH_MODULE(CENet);

CENet build_model(const ModelConfig& cfg);

enum class ParamScope { Train, Inference };

/// Trainable parameter count; inference scope excludes auxiliary heads.
std::int64_t count_parameters(const torch::nn::Module& model, ParamScope scope);
bool is_aux_parameter(const std::string& name);

/// Copies parameters and buffers with matching names and shapes from `src`
/// into `dst`; returns how many tensors were copied.
std::size_t copy_matching_state(torch::nn::Module& dst, const torch::nn::Module& src);

}  // namespace cenet
