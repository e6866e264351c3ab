#include "doctest_torch.hpp"

#include <cstdlib>
#include <fstream>

#include "cenet/error.hpp"
#include "cenet/experiment_config.hpp"
#include "cenet/trainer.hpp"
#include "test_util.hpp"

using namespace cenet;

namespace {

void flatten(const Json& j, const std::string& prefix, std::vector<std::string>& out) {
    if (j.is_object() && !j.empty()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
        return;
    }
    out.push_back(prefix);
}

}  // namespace

TEST_CASE("presets are valid and carry their dataset geometry") {
    for (const char* name : {"kitti", "poss", "toy"}) {
        INFO(name);
        const auto cfg = ExperimentConfig::preset(name);
        CHECK_NOTHROW(cfg.validate());
    }
    const auto kitti = ExperimentConfig::preset("kitti");
    CHECK(kitti.projection.height == 64);
    CHECK(kitti.projection.width == 2048);
    CHECK(kitti.model.num_classes == 19);
    CHECK(kitti.optimizer.schedule == ScheduleKind::Cosine);
    const auto poss = ExperimentConfig::preset("poss");
    CHECK(poss.projection.height == 40);
    CHECK(poss.projection.width == 1800);
    CHECK(poss.model.num_classes == 13);
    CHECK(poss.optimizer.schedule == ScheduleKind::Cyclic);
    CHECK(poss.optimizer.cycles == 3);
    const auto toy = ExperimentConfig::preset("toy");
    CHECK(toy.projection.width == 512);
    CHECK(toy.model.aux_mode == AuxMode::PlanB);
    CHECK(toy.loss.lambda_aux == 1.0);
    CHECK_THROWS_AS(ExperimentConfig::preset("nuscenes"), ConfigError);
}

TEST_CASE("JSON round trip is lossless") {
    for (const char* name : {"kitti", "poss", "toy"}) {
        auto cfg = ExperimentConfig::preset(name);
        cfg.runtime.early_stop_miou = 0.5;
        cfg.loss.class_weights = std::vector<double>(static_cast<std::size_t>(cfg.model.num_classes), 2.0);
        const auto back = ExperimentConfig::from_json(cfg.to_json(), ExperimentConfig{});
        CHECK(back.echo() == cfg.echo());
        CHECK(back.model == cfg.model);
    }
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"modle", Json::object()}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"model", {{"kernel", 3}}}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"augmentation", {{"rotation", {{"on", true}}}}}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"model", {{"input_kernel", "three"}}}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"model", {{"aux_mode", "plan_c"}}}}), ConfigError);
    CHECK_NOTHROW(ExperimentConfig::from_json(Json{{"preset", "toy"}, {"model", {{"input_kernel", 1}}}}));
}

TEST_CASE("overlays start from the named preset") {
    const auto cfg = ExperimentConfig::from_json(Json{{"preset", "poss"}, {"optimizer", {{"lr_max", 0.5}}}});
    CHECK(cfg.projection.height == 40);
    CHECK(cfg.optimizer.lr_max == 0.5);
    CHECK(cfg.optimizer.cycles == 3);
}

TEST_CASE("dotted keys") {
    auto cfg = ExperimentConfig::preset("toy");
    cfg.set("model.input_kernel", 1);
    CHECK(cfg.model.input_kernel == 1);
    cfg.set("model.aux_mode", "none");
    CHECK(cfg.model.aux_mode == AuxMode::None);
    cfg.set("runtime.early_stop_miou", 0.9);
    CHECK(cfg.runtime.early_stop_miou == 0.9);
    CHECK_THROWS_AS(cfg.set("model.kernel", 1), ConfigError);
    CHECK_THROWS_AS(cfg.set("model.input_kernel.x", 1), ConfigError);
}

TEST_CASE("cross-field validation") {
    auto cfg = ExperimentConfig::preset("toy");
    cfg.model.num_classes = 5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig::preset("toy");
    cfg.projection.width = 500;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig::preset("poss");
    cfg.optimizer.epochs = 100;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig::preset("kitti");
    cfg.runtime.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig::preset("kitti");
    cfg.dataset.val_sequences = std::vector<std::string>{"00"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config files and the dataset root override") {
    testutil::TempDir dir("cfg");
    const auto path = dir / "c.json";
    std::ofstream(path) << R"({
        // comments are allowed
        "preset": "toy",
        "dataset": {"root": "/somewhere"},
        "optimizer": {"epochs": 4}
    })";
    ::unsetenv("DATASET_ROOT");
    auto cfg = ExperimentConfig::load(path);
    CHECK(cfg.dataset.root == "/somewhere");
    CHECK(cfg.optimizer.epochs == 4);
    ::setenv("DATASET_ROOT", "/elsewhere", 1);
    CHECK(ExperimentConfig::load(path).dataset.root == "/elsewhere");
    ::unsetenv("DATASET_ROOT");
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(ExperimentConfig::load(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load(dir / "missing.json"), ConfigError);
}

TEST_CASE("json_diff names every changed leaf") {
    auto a = ExperimentConfig::preset("toy"), b = a;
    b.model.input_kernel = 1;
    b.optimizer.lr_max = 0.5;
    const auto d = json_diff(a.to_json(), b.to_json());
    REQUIRE(d.size() == 2);
    CHECK(d[0].rfind("model.input_kernel", 0) == 0);
    CHECK(d[1].rfind("optimizer.lr_max", 0) == 0);
    CHECK(json_diff(a.to_json(), a.to_json()).empty());
}

TEST_CASE("the key reference documents every key") {
    std::vector<std::string> keys;
    flatten(ExperimentConfig{}.to_json(), "", keys);
    const auto& docs = config_key_docs();
    const auto md = config_reference_markdown();
    for (const auto& k : keys) {
        INFO(k);
        CHECK(std::any_of(docs.begin(), docs.end(), [&](const ConfigKeyDoc& d) { return d.key == k; }));
        CHECK(md.find("`" + k + "`") != std::string::npos);
    }
}

TEST_CASE("shipped configs and ablation plans load and validate") {
    const fs::path dir = CENET_CONFIG_DIR;
    int configs = 0, plans = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        std::ifstream in(e.path());
        const auto j = Json::parse(in);
        CAPTURE(e.path().string());
        if (j.contains("deltas")) {
            const auto plan = AblationPlan::load(e.path());
            CHECK(!plan.deltas.empty());
            const auto base = ExperimentConfig::load(dir / (e.path().stem() == "lambda_sweep" ? "toy.json" : "kitti_64x512.json"));
            CHECK_NOTHROW(plan.validate(base));
            ++plans;
        } else {
            CHECK_NOTHROW(ExperimentConfig::load(e.path()).validate());
            ++configs;
        }
    }
    CHECK(configs == 4);
    CHECK(plans == 2);
}
