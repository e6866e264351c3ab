#pragma once

#include "cenet/experiment_config.hpp"
#include "cenet/toy_dataset.hpp"
#include "test_util.hpp"

namespace fixtures {

/// Small synthetic dataset (train 00, val 01, test 02) and a matching
/// configuration that trains in seconds.
inline cenet::ExperimentConfig tiny_toy(const testutil::TempDir& dir, int train = 6, int val = 3, int test = 2) {
    cenet::ToySceneConfig scene;
    scene.beams = 16;
    scene.azimuth_samples = 256;
    cenet::make_toy_dataset(dir.path() / "data", train, 4, 5, "00", 0, scene);
    cenet::make_toy_dataset(dir.path() / "data", val, 4, 5, "01", train, scene);
    cenet::make_toy_dataset(dir.path() / "data", test, 4, 5, "02", train + val, scene);

    auto cfg = cenet::ExperimentConfig::preset("toy");
    cfg.dataset.root = (dir.path() / "data").string();
    cfg.projection.height = 16;
    cfg.projection.width = 64;
    cfg.model.stem_channels = {4};
    cfg.model.stage_channels = {4, 4, 4, 4};
    cfg.model.head_channels = {8, 8};
    cfg.optimizer.epochs = 2;
    cfg.runtime.batch_size = 2;
    cfg.runtime.log_interval = 1;
    cfg.runtime.checkpoint_dir = (dir.path() / "run").string();
    cfg.validate();
    return cfg;
}

}  // namespace fixtures
