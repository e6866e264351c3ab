#include "cenet/model.hpp"

#include <numeric>

#include "cenet/error.hpp"

namespace cenet {

namespace F = torch::nn::functional;

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "silu") return Activation::SiLU;
    if (s == "hardswish") return Activation::Hardswish;
    throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::SiLU: return "silu";
        case Activation::Hardswish: return "hardswish";
    }
    return "?";
}

AuxMode parse_aux_mode(const std::string& s) {
    if (s == "none") return AuxMode::None;
    if (s == "plan_a") return AuxMode::PlanA;
    if (s == "plan_b") return AuxMode::PlanB;
    throw ConfigError("unknown aux_mode '" + s + "'");
}

std::string to_string(AuxMode m) {
    switch (m) {
        case AuxMode::None: return "none";
        case AuxMode::PlanA: return "plan_a";
        case AuxMode::PlanB: return "plan_b";
    }
    return "?";
}

void ModelConfig::validate() const {
    if (in_channels < 1) throw ConfigError("model: in_channels must be >= 1");
    if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
    if (input_kernel != 1 && input_kernel != 3) throw ConfigError("model: input_kernel must be 1 or 3");
    if (stem_channels.empty()) throw ConfigError("model: stem_channels must not be empty");
    if (stage_channels.size() != 4 || stage_blocks.size() != 4 || stage_strides.size() != 4)
        throw ConfigError("model: stage_channels, stage_blocks and stage_strides need 4 entries");
    if (head_channels.size() != 2) throw ConfigError("model: head_channels needs 2 entries");
    int prev = 1;
    for (std::size_t i = 0; i < 4; ++i) {
        if (stage_blocks[i] < 1) throw ConfigError("model: every stage needs at least one block");
        const int s = stage_strides[i];
        if (s < prev || s % prev != 0)
            throw ConfigError("model: stage_strides must be nondecreasing multiples of each other");
        prev = s;
    }
    for (int c : stem_channels) if (c < 1) throw ConfigError("model: channel widths must be >= 1");
    for (int c : stage_channels) if (c < 1) throw ConfigError("model: channel widths must be >= 1");
    for (int c : head_channels) if (c < 1) throw ConfigError("model: channel widths must be >= 1");
    for (int s : aux_stages)
        if (s < 2 || s > 4) throw ConfigError("model: aux_stages must be a subset of {2, 3, 4}");
    for (std::size_t i = 1; i < aux_stages.size(); ++i)
        if (aux_stages[i] <= aux_stages[i - 1]) throw ConfigError("model: aux_stages must be increasing");
}

int ModelConfig::decoder_channels() const {
    return stem_channels.back() + std::accumulate(stage_channels.begin(), stage_channels.end(), 0);
}

torch::Tensor bilinear_upsample(const torch::Tensor& feat, int64_t height, int64_t width) {
    const bool batched = feat.dim() == 4;
    if (!batched && feat.dim() != 3) throw ConsistencyError("bilinear_upsample expects (F,h,w) or (B,F,h,w)");
    if (feat.size(-2) == height && feat.size(-1) == width) return feat;
    auto x = batched ? feat : feat.unsqueeze(0);
    x = F::interpolate(x, F::InterpolateFuncOptions()
                              .size(std::vector<int64_t>{height, width})
                              .mode(torch::kBilinear)
                              .align_corners(true));
    return batched ? x : x.squeeze(0);
}

torch::Tensor activate(const torch::Tensor& x, Activation a) {
    switch (a) {
        case Activation::ReLU: return torch::relu(x);
        case Activation::SiLU: return torch::silu(x);
        case Activation::Hardswish: return torch::hardswish(x);
    }
    return x;
}

ConvBnActImpl::ConvBnActImpl(int in, int out, int kernel, int stride, Activation act)
    : conv_(torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2).bias(false)),
      bn_(out),
      act_(act) {
    register_module("conv", conv_);
    register_module("bn", bn_);
}

torch::Tensor ConvBnActImpl::forward(const torch::Tensor& x) {
    return activate(bn_(conv_(x)), act_);
}

BasicBlockImpl::BasicBlockImpl(int in, int out, int stride, Activation act)
    : conv1_(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1).bias(false)),
      conv2_(torch::nn::Conv2dOptions(out, out, 3).stride(1).padding(1).bias(false)),
      bn1_(out),
      bn2_(out),
      act_(act) {
    register_module("conv1", conv1_);
    register_module("bn1", bn1_);
    register_module("conv2", conv2_);
    register_module("bn2", bn2_);
    if (stride != 1 || in != out) {
        downsample_ = torch::nn::Sequential(
            torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 1).stride(stride).bias(false)),
            torch::nn::BatchNorm2d(out));
        register_module("downsample", downsample_);
    }
}

torch::Tensor BasicBlockImpl::forward(const torch::Tensor& x) {
    auto out = activate(bn1_(conv1_(x)), act_);
    out = bn2_(conv2_(out));
    auto shortcut = downsample_ ? downsample_->forward(x) : x;
    return activate(out + shortcut, act_);
}

CENetImpl::CENetImpl(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const int k = cfg_.input_kernel;

    stem_ = torch::nn::Sequential();
    int in = cfg_.in_channels;
    for (int width : cfg_.stem_channels) {
        stem_->push_back(ConvBnAct(in, width, k, 1, cfg_.activation));
        in = width;
    }
    register_module("stem", stem_);

    int prev_stride = 1;
    for (std::size_t s = 0; s < 4; ++s) {
        torch::nn::Sequential stage;
        const int stride = cfg_.stage_strides[s] / prev_stride;
        for (int b = 0; b < cfg_.stage_blocks[s]; ++b) {
            stage->push_back(BasicBlock(in, cfg_.stage_channels[s], b == 0 ? stride : 1, cfg_.activation));
            in = cfg_.stage_channels[s];
        }
        prev_stride = cfg_.stage_strides[s];
        stages_.push_back(register_module("stage" + std::to_string(s + 1), stage));
    }

    head1_ = register_module("head1", ConvBnAct(cfg_.decoder_channels(), cfg_.head_channels[0], k, 1, cfg_.activation));
    head2_ = register_module("head2", ConvBnAct(cfg_.head_channels[0], cfg_.head_channels[1], k, 1, cfg_.activation));
    classifier_ = register_module(
        "classifier", torch::nn::Conv2d(torch::nn::Conv2dOptions(cfg_.head_channels[1], cfg_.num_classes, 1)));

    // Created last so the main path draws the same initial weights for every aux_mode.
    if (cfg_.aux_mode != AuxMode::None) {
        aux_heads_ = torch::nn::ModuleList();
        for (int stage : cfg_.aux_stages)
            aux_heads_->push_back(torch::nn::Conv2d(
                torch::nn::Conv2dOptions(cfg_.stage_channels[stage - 1], cfg_.num_classes, 1)));
        register_module("aux_heads", aux_heads_);
    }
}

SegmentationOutput CENetImpl::forward(torch::Tensor input) {
    const bool batched = input.dim() == 4;
    if (!batched) input = input.unsqueeze(0);
    if (input.dim() != 4 || input.size(1) != cfg_.in_channels)
        throw ConsistencyError("forward: expected (B, " + std::to_string(cfg_.in_channels) + ", H, W) input");
    const int64_t h = input.size(2), w = input.size(3);
    if (h % cfg_.max_stride() != 0 || w % cfg_.max_stride() != 0)
        throw ConsistencyError("forward: input " + std::to_string(h) + "x" + std::to_string(w) +
                               " is not divisible by the maximum stride " + std::to_string(cfg_.max_stride()));

    auto x = stem_->forward(input);
    std::vector<torch::Tensor> feats{x};
    std::vector<torch::Tensor> stage_out;
    for (auto& stage : stages_) {
        x = stage->forward(x);
        stage_out.push_back(x);
        feats.push_back(bilinear_upsample(x, h, w));
    }
    auto fused = torch::cat(feats, 1);
    SegmentationOutput out;
    out.main_logits = classifier_(head2_(head1_(fused)));

    if (is_training() && cfg_.aux_mode != AuxMode::None) {
        out.aux_upsampled = cfg_.aux_mode == AuxMode::PlanB;
        for (std::size_t i = 0; i < cfg_.aux_stages.size(); ++i) {
            const int stage = cfg_.aux_stages[i];
            auto head = aux_heads_->ptr<torch::nn::Conv2dImpl>(i);
            const auto& src = cfg_.aux_mode == AuxMode::PlanB ? feats[stage] : stage_out[stage - 1];
            out.aux_logits.push_back(head->forward(src));
            out.aux_strides.push_back(cfg_.stage_strides[stage - 1]);
        }
    }
    if (!batched) {
        out.main_logits = out.main_logits.squeeze(0);
        for (auto& a : out.aux_logits) a = a.squeeze(0);
    }
    return out;
}

CENet build_model(const ModelConfig& cfg) { return CENet(cfg); }

bool is_aux_parameter(const std::string& name) { return name.rfind("aux_heads", 0) == 0; }

std::int64_t count_parameters(const torch::nn::Module& model, ParamScope scope) {
    std::int64_t n = 0;
    for (const auto& item : model.named_parameters(true)) {
        if (!item.value().requires_grad()) continue;
        if (scope == ParamScope::Inference && is_aux_parameter(item.key())) continue;
        n += item.value().numel();
    }
    return n;
}

std::size_t copy_matching_state(torch::nn::Module& dst, const torch::nn::Module& src) {
    torch::NoGradGuard guard;
    std::size_t copied = 0;
    auto src_params = src.named_parameters(true);
    auto src_buffers = src.named_buffers(true);
    for (auto& item : dst.named_parameters(true)) {
        if (const auto* s = src_params.find(item.key()); s && s->sizes() == item.value().sizes()) {
            item.value().copy_(*s);
            ++copied;
        }
    }
    for (auto& item : dst.named_buffers(true)) {
        if (const auto* s = src_buffers.find(item.key()); s && s->sizes() == item.value().sizes()) {
            item.value().copy_(*s);
            ++copied;
        }
    }
    return copied;
}

}  // namespace cenet
