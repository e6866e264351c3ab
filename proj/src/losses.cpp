#include "cenet/losses.hpp"

#include <sstream>

#include "cenet/error.hpp"

namespace cenet {

namespace F = torch::nn::functional;

namespace {

constexpr double kEps = 1e-7;

torch::Tensor as_batch(const torch::Tensor& t, int64_t image_dims) {
    return t.dim() == image_dims ? t.unsqueeze(0) : t;
}

torch::Tensor class_weight_tensor(const LossConfig& cfg, int64_t num_classes, const torch::Tensor& like) {
    if (cfg.class_weights.empty()) return torch::ones({num_classes}, like.options());
    if (static_cast<int64_t>(cfg.class_weights.size()) != num_classes)
        throw ConsistencyError("loss: class_weights size differs from the logit channel count");
    return torch::tensor(cfg.class_weights, torch::dtype(torch::kFloat64)).to(like.options());
}

}  // namespace

void LossConfig::validate(int num_classes) const {
    if (alpha < 0 || beta < 0 || gamma < 0 || lambda_aux < 0)
        throw ConfigError("loss: alpha, beta, gamma and lambda_aux must be >= 0");
    if (theta0 < 1 || theta0 % 2 == 0) throw ConfigError("loss: theta0 must be odd and >= 1");
    if (!class_weights.empty()) {
        if (static_cast<int>(class_weights.size()) != num_classes)
            throw ConfigError("loss: class_weights needs one entry per class");
        for (double w : class_weights)
            if (!(w > 0)) throw ConfigError("loss: class weights must be > 0");
    }
}

LossTerm weighted_cross_entropy(const torch::Tensor& logits_in, const torch::Tensor& target_in,
                                const LossConfig& cfg) {
    const auto logits = as_batch(logits_in, 3);
    const auto target = as_batch(target_in, 2);
    const auto valid = target != cfg.ignore_id;
    const auto safe = torch::where(valid, target, torch::zeros_like(target));
    const auto logp = torch::log_softmax(logits, 1).gather(1, safe.unsqueeze(1)).squeeze(1);
    const auto w = class_weight_tensor(cfg, logits.size(1), logits).index({safe});
    const auto mask = valid.to(logits.scalar_type());
    const auto count = mask.sum();
    if (count.item<double>() == 0.0) return {(logits * 0).sum(), true};
    return {-(w * logp * mask).sum() / count, false};
}

torch::Tensor lovasz_grad(const torch::Tensor& gt_sorted) {
    const auto gts = gt_sorted.sum();
    const auto intersection = gts - gt_sorted.cumsum(0);
    const auto union_ = gts + (1 - gt_sorted).cumsum(0);
    auto jaccard = 1.0 - intersection / union_;
    const int64_t p = gt_sorted.size(0);
    if (p > 1) {
        jaccard = torch::cat({jaccard.slice(0, 0, 1),
                              jaccard.slice(0, 1, p) - jaccard.slice(0, 0, p - 1)});
    }
    return jaccard;
}

LossTerm lovasz_softmax(const torch::Tensor& probs_in, const torch::Tensor& target_in, const LossConfig& cfg) {
    const auto probs = as_batch(probs_in, 3);
    const auto target = as_batch(target_in, 2);
    const int64_t c = probs.size(1);
    const auto flat_probs = probs.permute({0, 2, 3, 1}).reshape({-1, c});
    const auto flat_target = target.reshape({-1});
    const auto keep = (flat_target != cfg.ignore_id).nonzero().squeeze(1);
    const auto p = flat_probs.index_select(0, keep);
    const auto t = flat_target.index_select(0, keep);

    std::vector<torch::Tensor> losses;
    for (int64_t k = 0; k < c; ++k) {
        const auto fg = (t == k).to(p.scalar_type());
        if (fg.sum().item<double>() == 0.0) continue;
        const auto errors = (fg - p.select(1, k)).abs();
        auto [sorted, perm] = torch::sort(errors, /*dim=*/0, /*descending=*/true);
        losses.push_back(torch::dot(sorted, lovasz_grad(fg.index_select(0, perm))));
    }
    if (losses.empty()) return {(probs * 0).sum(), true};
    return {torch::stack(losses).mean(), false};
}

torch::Tensor boundary_map(const torch::Tensor& y_in, int theta0) {
    const auto y = as_batch(y_in, 3);
    const auto inv = 1 - y;
    const auto pooled = F::max_pool2d(inv, F::MaxPool2dFuncOptions(theta0).stride(1).padding(theta0 / 2));
    auto b = pooled - inv;
    return y_in.dim() == 3 ? b.squeeze(0) : b;
}

LossTerm boundary_loss(const torch::Tensor& pred_in, const torch::Tensor& onehot_in, const LossConfig& cfg,
                       const torch::Tensor& valid_in) {
    const auto pred = as_batch(pred_in, 3);
    const auto onehot = as_batch(onehot_in, 3);
    if (pred.sizes() != onehot.sizes()) throw ConsistencyError("boundary_loss: shape mismatch");
    auto pd_b = boundary_map(pred, cfg.theta0);
    auto gt_b = boundary_map(onehot, cfg.theta0);
    if (valid_in.defined()) {
        const auto m = as_batch(valid_in, 2).unsqueeze(1).to(pred.scalar_type());
        pd_b = pd_b * m;
        gt_b = gt_b * m;
    }
    const std::vector<int64_t> dims{0, 2, 3};
    const auto inter = (pd_b * gt_b).sum(dims);
    const auto pd_sum = pd_b.sum(dims);
    const auto gt_sum = gt_b.sum(dims);
    const auto precision = inter / (pd_sum + kEps);
    const auto recall = inter / (gt_sum + kEps);
    const auto bf1 = 2 * precision * recall / (precision + recall + kEps);
    const auto has_boundary = (gt_sum > 0).nonzero().squeeze(1);
    if (has_boundary.numel() == 0) return {(pred * 0).sum(), true};
    return {(1 - bf1.index_select(0, has_boundary)).mean(), false};
}

MainLoss main_loss(const torch::Tensor& logits_in, const torch::Tensor& target_in, const LossConfig& cfg) {
    const auto logits = as_batch(logits_in, 3);
    const auto target = as_batch(target_in, 2);
    if (logits.size(0) != target.size(0) || logits.size(2) != target.size(1) || logits.size(3) != target.size(2))
        throw ConsistencyError("main_loss: logits and target shapes differ");
    const int64_t c = logits.size(1);
    const auto probs = torch::softmax(logits, 1);
    const auto valid = target != cfg.ignore_id;
    const auto safe = torch::where(valid, target, torch::zeros_like(target));
    const auto onehot = F::one_hot(safe, c).permute({0, 3, 1, 2}).to(logits.scalar_type()) *
                        valid.unsqueeze(1).to(logits.scalar_type());

    MainLoss out;
    auto wce = weighted_cross_entropy(logits, target, cfg);
    auto ls = lovasz_softmax(probs, target, cfg);
    auto bd = boundary_loss(probs, onehot, cfg, valid);
    out.wce = wce.value;
    out.lovasz = ls.value;
    out.boundary = bd.value;
    out.main = combine_main(cfg, out.wce, out.lovasz, out.boundary);
    out.degenerate = wce.degenerate || ls.degenerate || bd.degenerate;
    return out;
}

torch::Tensor downsample_labels(const torch::Tensor& target, int stride) {
    if (stride == 1) return target;
    using torch::indexing::Slice;
    return target.index({"...", Slice(0, torch::indexing::None, stride), Slice(0, torch::indexing::None, stride)});
}

std::string LossBreakdown::csv_header() { return "step,wce,lovasz,boundary,main,aux_1,aux_2,aux_3,total"; }

std::string LossBreakdown::csv_row(std::int64_t step) const {
    std::ostringstream os;
    os.precision(10);
    os << step << ',' << wce << ',' << lovasz << ',' << boundary << ',' << main;
    for (std::size_t i = 0; i < 3; ++i) {
        os << ',';
        if (i < aux_terms.size()) os << aux_terms[i];
    }
    os << ',' << total;
    return os.str();
}

LossBreakdown total_loss(const SegmentationOutput& out, const torch::Tensor& target, const LossConfig& cfg,
                         AuxMode aux_mode) {
    const auto m = main_loss(out.main_logits, target, cfg);
    LossBreakdown b;
    b.wce = m.wce.item<double>();
    b.lovasz = m.lovasz.item<double>();
    b.boundary = m.boundary.item<double>();
    b.main = m.main.item<double>();

    torch::Tensor total = m.main;
    if (aux_mode != AuxMode::None && !out.aux_logits.empty()) {
        if (out.aux_strides.size() != out.aux_logits.size())
            throw ConsistencyError("total_loss: aux logits and strides differ in count");
        torch::Tensor aux_sum;
        for (std::size_t i = 0; i < out.aux_logits.size(); ++i) {
            const auto aux_target =
                aux_mode == AuxMode::PlanA ? downsample_labels(target, out.aux_strides[i]) : target;
            const auto term = main_loss(out.aux_logits[i], aux_target, cfg).main;
            b.aux_terms.push_back(term.item<double>());
            aux_sum = aux_sum.defined() ? aux_sum + term : term;
        }
        total = total + cfg.lambda_aux * aux_sum;
    }
    b.total_tensor = total;
    b.total = total.item<double>();
    return b;
}

}  // namespace cenet
