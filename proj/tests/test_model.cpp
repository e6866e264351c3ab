#include "doctest_torch.hpp"

#include <cmath>
#include <set>

#include "cenet/error.hpp"
#include "cenet/model.hpp"
#include "oracles.hpp"

using namespace cenet;

namespace {

std::int64_t conv_bn(std::int64_t in, std::int64_t out, std::int64_t k) { return k * k * in * out + 2 * out; }

/// Closed-form trainable parameter count.
std::int64_t formula(const ModelConfig& m, bool with_aux) {
    std::int64_t n = 0, in = m.in_channels;
    for (int w : m.stem_channels) n += conv_bn(in, w, m.input_kernel), in = w;
    int prev_stride = 1;
    for (int s = 0; s < 4; ++s) {
        const int stride = m.stage_strides[s] / prev_stride;
        prev_stride = m.stage_strides[s];
        for (int b = 0; b < m.stage_blocks[s]; ++b) {
            const std::int64_t out = m.stage_channels[s];
            n += conv_bn(in, out, 3) + conv_bn(out, out, 3);
            if ((b == 0 && stride != 1) || in != out) n += conv_bn(in, out, 1);
            in = out;
        }
    }
    n += conv_bn(m.decoder_channels(), m.head_channels[0], m.input_kernel);
    n += conv_bn(m.head_channels[0], m.head_channels[1], m.input_kernel);
    n += static_cast<std::int64_t>(m.head_channels[1]) * m.num_classes + m.num_classes;
    if (with_aux)
        for (int s : m.aux_stages) n += static_cast<std::int64_t>(m.stage_channels[s - 1]) * m.num_classes + m.num_classes;
    return n;
}

ModelConfig tiny(AuxMode aux = AuxMode::None) {
    ModelConfig m;
    m.num_classes = 3;
    m.stem_channels = {4, 6};
    m.stage_channels = {6, 8, 8, 10};
    m.stage_blocks = {1, 2, 1, 1};
    m.head_channels = {8, 6};
    m.aux_mode = aux;
    return m;
}

}  // namespace

TEST_CASE("parameter counts follow the closed form") {
    oracle::Gen g(10);
    for (int trial = 0; trial < 12; ++trial) {
        ModelConfig m;
        m.in_channels = g.integer(1, 6);
        m.num_classes = g.integer(2, 9);
        m.input_kernel = g.coin() ? 1 : 3;
        m.stem_channels.assign(static_cast<std::size_t>(g.integer(1, 3)), 0);
        for (auto& c : m.stem_channels) c = g.integer(2, 12);
        for (auto& c : m.stage_channels) c = g.integer(2, 12);
        for (auto& b : m.stage_blocks) b = g.integer(1, 2);
        m.stage_strides = g.coin() ? std::vector<int>{1, 2, 4, 8} : std::vector<int>{1, 1, 2, 2};
        m.head_channels = {g.integer(2, 12), g.integer(2, 12)};
        m.aux_mode = g.pick(std::vector<AuxMode>{AuxMode::None, AuxMode::PlanA, AuxMode::PlanB});
        m.aux_stages = g.coin() ? std::vector<int>{2, 3, 4} : std::vector<int>{3};
        const auto model = build_model(m);
        const bool aux = m.aux_mode != AuxMode::None;
        CHECK(count_parameters(*model, ParamScope::Train) == formula(m, aux));
        CHECK(count_parameters(*model, ParamScope::Inference) == formula(m, false));
    }
}

TEST_CASE("full-size network: 6.774M parameters, 6.782M with auxiliary heads") {
    ModelConfig m;  // defaults: 128-wide stages, (3, 4, 6, 3) blocks
    m.num_classes = 20;
    CHECK(formula(m, false) == 6774228);
    CHECK(formula(m, true) == 6781968);
    CHECK(std::round(formula(m, false) / 1e3) / 1e3 == 6.774);
    CHECK(std::round(formula(m, true) / 1e3) / 1e3 == 6.782);
    m.aux_mode = AuxMode::PlanB;
    const auto model = build_model(m);
    CHECK(count_parameters(*model, ParamScope::Train) == 6781968);
    CHECK(count_parameters(*model, ParamScope::Inference) == 6774228);
}

TEST_CASE("auxiliary parameters are exactly the aux_heads subtree") {
    const auto with = build_model(tiny(AuxMode::PlanB));
    const auto without = build_model(tiny(AuxMode::None));
    std::set<std::string> names_without;
    for (const auto& p : without->named_parameters()) names_without.insert(p.key());
    for (const auto& p : with->named_parameters()) {
        CHECK(is_aux_parameter(p.key()) == (names_without.count(p.key()) == 0));
    }
    const auto diff = count_parameters(*with, ParamScope::Train) - count_parameters(*without, ParamScope::Train);
    const auto& m = with->config();
    std::int64_t aux = 0;
    for (int s : m.aux_stages) aux += static_cast<std::int64_t>(m.stage_channels[s - 1]) * m.num_classes + m.num_classes;
    CHECK(diff == aux);
    CHECK(count_parameters(*with, ParamScope::Inference) == count_parameters(*without, ParamScope::Inference));
}

TEST_CASE("output shapes per supervision plan") {
    torch::manual_seed(0);
    const auto x = torch::randn({2, 5, 16, 32});
    for (AuxMode mode : {AuxMode::None, AuxMode::PlanA, AuxMode::PlanB}) {
        auto model = build_model(tiny(mode));
        model->train();
        const auto out = model->forward(x);
        CHECK(out.main_logits.sizes() == torch::IntArrayRef({2, 3, 16, 32}));
        if (mode == AuxMode::None) {
            CHECK(out.aux_logits.empty());
            continue;
        }
        REQUIRE(out.aux_logits.size() == 3);
        CHECK(out.aux_strides == std::vector<int>{2, 4, 8});
        for (std::size_t i = 0; i < 3; ++i) {
            const int s = mode == AuxMode::PlanA ? out.aux_strides[i] : 1;
            CHECK(out.aux_logits[i].sizes() == torch::IntArrayRef({2, 3, 16 / s, 32 / s}));
        }
        model->eval();
        CHECK(model->forward(x).aux_logits.empty());
    }
}

TEST_CASE("eval-mode main logits do not depend on the aux mode") {
    torch::manual_seed(3);
    const auto x = torch::randn({1, 5, 16, 16});
    auto base = build_model(tiny(AuxMode::PlanB));
    // A few training steps so batch-norm statistics are not at their defaults.
    base->train();
    for (int i = 0; i < 3; ++i) base->forward(torch::randn({2, 5, 16, 16}));
    base->eval();
    const auto ref = base->forward(x).main_logits;
    for (AuxMode mode : {AuxMode::None, AuxMode::PlanA}) {
        auto other = build_model(tiny(mode));
        copy_matching_state(*other, *base);
        other->eval();
        CHECK(torch::equal(other->forward(x).main_logits, ref));
    }
}

TEST_CASE("the same seed gives the same main-path weights for every aux mode") {
    std::vector<CENet> models;
    for (AuxMode mode : {AuxMode::None, AuxMode::PlanA, AuxMode::PlanB}) {
        torch::manual_seed(17);
        models.push_back(build_model(tiny(mode)));
    }
    const auto ref = models[0]->named_parameters();
    for (std::size_t m = 1; m < models.size(); ++m)
        for (const auto& p : models[m]->named_parameters()) {
            if (is_aux_parameter(p.key())) continue;
            CHECK(torch::equal(p.value(), ref[p.key()]));
        }
}

TEST_CASE("bilinear upsampling with aligned corners matches the scalar formula") {
    torch::manual_seed(5);
    const auto feat = torch::randn({2, 3, 4}, torch::kFloat64);
    const int H = 7, W = 10;
    const auto up = bilinear_upsample(feat, H, W);
    REQUIRE(up.sizes() == torch::IntArrayRef({2, H, W}));
    auto f = feat.accessor<double, 3>();
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
                const double y = i * (3.0 - 1) / (H - 1), x = j * (4.0 - 1) / (W - 1);
                const int y0 = std::min(static_cast<int>(y), 1), x0 = std::min(static_cast<int>(x), 2);
                const double dy = y - y0, dx = x - x0;
                const double want = (1 - dy) * ((1 - dx) * f[c][y0][x0] + dx * f[c][y0][x0 + 1]) +
                                    dy * ((1 - dx) * f[c][y0 + 1][x0] + dx * f[c][y0 + 1][x0 + 1]);
                CHECK(up[c][i][j].item<double>() == doctest::Approx(want).epsilon(1e-12));
            }
    CHECK(bilinear_upsample(feat, 3, 4).data_ptr() == feat.data_ptr());
}

TEST_CASE("inputs must be divisible by the largest stride") {
    auto model = build_model(tiny());
    CHECK_THROWS_AS(model->forward(torch::zeros({1, 5, 12, 16})), ConsistencyError);
    CHECK_THROWS_AS(model->forward(torch::zeros({1, 4, 16, 16})), ConsistencyError);
    CHECK(model->forward(torch::zeros({5, 8, 16})).main_logits.sizes() == torch::IntArrayRef({3, 8, 16}));
}

TEST_CASE("model config validation") {
    ModelConfig m;
    m.input_kernel = 5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = {};
    m.stage_strides = {1, 2, 3, 8};
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = {};
    m.aux_stages = {1, 2};
    CHECK_THROWS_AS(m.validate(), ConfigError);
    CHECK_THROWS_AS(parse_activation("gelu"), ConfigError);
    CHECK(parse_aux_mode(to_string(AuxMode::PlanA)) == AuxMode::PlanA);
}
