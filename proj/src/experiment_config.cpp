#include "cenet/experiment_config.hpp"

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "cenet/error.hpp"

namespace cenet {

namespace {

// Reads keys of one JSON object and rejects anything it was not asked for.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const Json::exception& e) {
            throw ConfigError("config: bad value for '" + path_ + key + "': " + e.what());
        }
    }

    template <typename T>
    void get(const std::string& key, std::optional<T>& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        T value{};
        try {
            value = j_.at(key).get<T>();
        } catch (const Json::exception& e) {
            throw ConfigError("config: bad value for '" + path_ + key + "': " + e.what());
        }
        out = std::move(value);
    }

    template <typename Enum, typename Parse>
    void get_enum(const std::string& key, Enum& out, Parse parse) {
        std::string s;
        if (!j_.contains(key)) return;
        get(key, s);
        out = parse(s);
    }

    ObjectReader child(const std::string& key) {
        used_.insert(key);
        return ObjectReader(j_.at(key), path_ + key + ".");
    }
    bool has(const std::string& key) const { return j_.contains(key); }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError("config: unknown key '" + path_ + k + "'");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Json optional_json(const auto& opt) { return opt ? Json(*opt) : Json(nullptr); }

std::string schedule_name(ScheduleKind k) { return k == ScheduleKind::Cosine ? "cosine" : "cyclic"; }

ScheduleKind parse_schedule(const std::string& s) {
    if (s == "cosine") return ScheduleKind::Cosine;
    if (s == "cyclic") return ScheduleKind::Cyclic;
    throw ConfigError("unknown optimizer.schedule '" + s + "'");
}

UnknownLabelPolicy parse_policy(const std::string& s) {
    if (s == "ignore") return UnknownLabelPolicy::MapToIgnore;
    if (s == "error") return UnknownLabelPolicy::Error;
    throw ConfigError("unknown dataset.unknown_labels '" + s + "' (ignore | error)");
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

ProjectionConfig ProjectionBlock::projection() const {
    ProjectionConfig p;
    p.height = height;
    p.width = width;
    p.fov_up = fov_up_deg * kDeg;
    p.fov_down = fov_down_deg * kDeg;
    return p;
}

void ExperimentConfig::validate() const {
    const auto classes = class_config();
    classes.validate();
    splits().validate();
    if (dataset.frequencies != "builtin" && dataset.frequencies != "auto")
        throw ConfigError("config: dataset.frequencies must be 'builtin' or 'auto'");
    projection.projection().validate();
    if (projection.normalization != "auto" && projection.normalization != "fixed" &&
        projection.normalization != "none")
        throw ConfigError("config: projection.normalization must be auto, fixed or none");
    if (projection.means.size() != 5 || projection.stds.size() != 5)
        throw ConfigError("config: projection.means and projection.stds need 5 entries");
    for (double s : projection.stds)
        if (!(s > 0)) throw ConfigError("config: projection.stds must be > 0");
    augmentation.validate();
    model.validate();
    if (model.in_channels != 5) throw ConfigError("config: model.in_channels must be 5 for range images");
    if (model.num_classes != classes.num_classes)
        throw ConfigError("config: model.num_classes (" + std::to_string(model.num_classes) +
                          ") differs from the dataset's class count (" + std::to_string(classes.num_classes) + ")");
    if (projection.height % model.max_stride() != 0 || projection.width % model.max_stride() != 0)
        throw ConfigError("config: projection size must be divisible by the model's maximum stride");
    loss_config(classes).validate(classes.num_classes);
    knn.validate();
    if (optimizer.momentum < 0 || optimizer.weight_decay < 0)
        throw ConfigError("config: optimizer momentum and weight_decay must be >= 0");
    if (!(optimizer.lr_max > 0) || optimizer.lr_min < 0 || optimizer.lr_min > optimizer.lr_max)
        throw ConfigError("config: need 0 <= lr_min <= lr_max and lr_max > 0");
    if (optimizer.epochs < 1 || optimizer.cycles < 1 || optimizer.epochs % optimizer.cycles != 0)
        throw ConfigError("config: epochs must be a positive multiple of cycles");
    if (optimizer.schedule == ScheduleKind::Cosine && optimizer.cycles != 1)
        throw ConfigError("config: cosine schedule uses exactly one cycle; use 'cyclic' for restarts");
    if (runtime.batch_size < 1 || runtime.workers < 1 || runtime.log_interval < 1)
        throw ConfigError("config: batch_size, workers and log_interval must be >= 1");
}

ClassConfig ExperimentConfig::class_config() const {
    auto c = ClassConfig::by_name(to_string(dataset.kind), dataset.toy_classes);
    c.unknown_policy = dataset.unknown_labels;
    return c;
}

SplitSpec ExperimentConfig::splits() const {
    auto s = SplitSpec::defaults(dataset.kind);
    if (dataset.train_sequences) s.train_sequences = *dataset.train_sequences;
    if (dataset.val_sequences) s.val_sequences = *dataset.val_sequences;
    if (dataset.test_sequences) s.test_sequences = *dataset.test_sequences;
    return s;
}

LossConfig ExperimentConfig::loss_config(const ClassConfig& classes) const {
    LossConfig l;
    l.alpha = loss.alpha;
    l.beta = loss.beta;
    l.gamma = loss.gamma;
    l.lambda_aux = loss.lambda_aux;
    l.theta0 = loss.theta0;
    l.ignore_id = classes.ignore_id;
    l.class_weights = loss.class_weights ? *loss.class_weights : classes.class_weights(loss.class_weight_epsilon);
    return l;
}

Json ExperimentConfig::to_json() const {
    Json j;
    j["dataset"] = {{"root", dataset.root},
                    {"kind", to_string(dataset.kind)},
                    {"toy_classes", dataset.toy_classes},
                    {"train_sequences", optional_json(dataset.train_sequences)},
                    {"val_sequences", optional_json(dataset.val_sequences)},
                    {"test_sequences", optional_json(dataset.test_sequences)},
                    {"frequencies", dataset.frequencies},
                    {"unknown_labels", dataset.unknown_labels == UnknownLabelPolicy::Error ? "error" : "ignore"}};
    j["projection"] = {{"height", projection.height},          {"width", projection.width},
                       {"fov_up_deg", projection.fov_up_deg},  {"fov_down_deg", projection.fov_down_deg},
                       {"normalization", projection.normalization}, {"means", projection.means},
                       {"stds", projection.stds},              {"stats_max_scans", projection.stats_max_scans}};
    const auto& a = augmentation;
    j["augmentation"] = {
        {"rotation", {{"enabled", a.rotation.enabled}, {"yaw_min", a.rotation.yaw_min}, {"yaw_max", a.rotation.yaw_max}}},
        {"dropout", {{"enabled", a.dropout.enabled}, {"prob_min", a.dropout.prob_min}, {"prob_max", a.dropout.prob_max}}},
        {"jitter", {{"enabled", a.jitter.enabled}, {"sigma", a.jitter.sigma}, {"clip", a.jitter.clip}}}};
    j["model"] = {{"in_channels", model.in_channels},     {"num_classes", model.num_classes},
                  {"activation", to_string(model.activation)}, {"input_kernel", model.input_kernel},
                  {"stem_channels", model.stem_channels}, {"stage_channels", model.stage_channels},
                  {"stage_blocks", model.stage_blocks},   {"stage_strides", model.stage_strides},
                  {"head_channels", model.head_channels}, {"aux_mode", to_string(model.aux_mode)},
                  {"aux_stages", model.aux_stages}};
    j["loss"] = {{"alpha", loss.alpha},   {"beta", loss.beta},     {"gamma", loss.gamma},
                 {"lambda_aux", loss.lambda_aux}, {"theta0", loss.theta0},
                 {"class_weight_epsilon", loss.class_weight_epsilon},
                 {"class_weights", optional_json(loss.class_weights)}};
    j["knn"] = {{"k", knn.k}, {"window", knn.window}, {"range_cutoff", knn.range_cutoff},
                {"gaussian_sigma", knn.gaussian_sigma}};
    j["optimizer"] = {{"kind", "sgd"},
                      {"momentum", optimizer.momentum},
                      {"weight_decay", optimizer.weight_decay},
                      {"schedule", schedule_name(optimizer.schedule)},
                      {"lr_max", optimizer.lr_max},
                      {"lr_min", optimizer.lr_min},
                      {"epochs", optimizer.epochs},
                      {"cycles", optimizer.cycles}};
    j["runtime"] = {{"seed", runtime.seed},
                    {"batch_size", runtime.batch_size},
                    {"workers", runtime.workers},
                    {"device", runtime.device},
                    {"allow_device_downgrade", runtime.allow_device_downgrade},
                    {"checkpoint_dir", runtime.checkpoint_dir},
                    {"log_interval", runtime.log_interval},
                    {"early_stop_miou", optional_json(runtime.early_stop_miou)},
                    {"max_train_scans", optional_json(runtime.max_train_scans)},
                    {"max_eval_scans", optional_json(runtime.max_eval_scans)}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j, ExperimentConfig c) {
    ObjectReader top(j, "");
    std::string preset_name;
    top.get("preset", preset_name);  // consumed by load()
    if (top.has("dataset")) {
        auto r = top.child("dataset");
        r.get("root", c.dataset.root);
        r.get_enum("kind", c.dataset.kind, parse_dataset_kind);
        r.get("toy_classes", c.dataset.toy_classes);
        r.get("train_sequences", c.dataset.train_sequences);
        r.get("val_sequences", c.dataset.val_sequences);
        r.get("test_sequences", c.dataset.test_sequences);
        r.get("frequencies", c.dataset.frequencies);
        r.get_enum("unknown_labels", c.dataset.unknown_labels, parse_policy);
        r.finish();
    }
    if (top.has("projection")) {
        auto r = top.child("projection");
        r.get("height", c.projection.height);
        r.get("width", c.projection.width);
        r.get("fov_up_deg", c.projection.fov_up_deg);
        r.get("fov_down_deg", c.projection.fov_down_deg);
        r.get("normalization", c.projection.normalization);
        r.get("means", c.projection.means);
        r.get("stds", c.projection.stds);
        r.get("stats_max_scans", c.projection.stats_max_scans);
        r.finish();
    }
    if (top.has("augmentation")) {
        auto r = top.child("augmentation");
        auto& a = c.augmentation;
        if (r.has("rotation")) {
            auto s = r.child("rotation");
            s.get("enabled", a.rotation.enabled);
            s.get("yaw_min", a.rotation.yaw_min);
            s.get("yaw_max", a.rotation.yaw_max);
            s.finish();
        }
        if (r.has("dropout")) {
            auto s = r.child("dropout");
            s.get("enabled", a.dropout.enabled);
            s.get("prob_min", a.dropout.prob_min);
            s.get("prob_max", a.dropout.prob_max);
            s.finish();
        }
        if (r.has("jitter")) {
            auto s = r.child("jitter");
            s.get("enabled", a.jitter.enabled);
            s.get("sigma", a.jitter.sigma);
            s.get("clip", a.jitter.clip);
            s.finish();
        }
        r.finish();
    }
    if (top.has("model")) {
        auto r = top.child("model");
        auto& m = c.model;
        r.get("in_channels", m.in_channels);
        r.get("num_classes", m.num_classes);
        r.get_enum("activation", m.activation, parse_activation);
        r.get("input_kernel", m.input_kernel);
        r.get("stem_channels", m.stem_channels);
        r.get("stage_channels", m.stage_channels);
        r.get("stage_blocks", m.stage_blocks);
        r.get("stage_strides", m.stage_strides);
        r.get("head_channels", m.head_channels);
        r.get_enum("aux_mode", m.aux_mode, parse_aux_mode);
        r.get("aux_stages", m.aux_stages);
        r.finish();
    }
    if (top.has("loss")) {
        auto r = top.child("loss");
        r.get("alpha", c.loss.alpha);
        r.get("beta", c.loss.beta);
        r.get("gamma", c.loss.gamma);
        r.get("lambda_aux", c.loss.lambda_aux);
        r.get("theta0", c.loss.theta0);
        r.get("class_weight_epsilon", c.loss.class_weight_epsilon);
        r.get("class_weights", c.loss.class_weights);
        r.finish();
    }
    if (top.has("knn")) {
        auto r = top.child("knn");
        r.get("k", c.knn.k);
        r.get("window", c.knn.window);
        r.get("range_cutoff", c.knn.range_cutoff);
        r.get("gaussian_sigma", c.knn.gaussian_sigma);
        r.finish();
    }
    if (top.has("optimizer")) {
        auto r = top.child("optimizer");
        std::string kind = "sgd";
        r.get("kind", kind);
        if (kind != "sgd") throw ConfigError("config: optimizer.kind must be 'sgd'");
        r.get("momentum", c.optimizer.momentum);
        r.get("weight_decay", c.optimizer.weight_decay);
        r.get_enum("schedule", c.optimizer.schedule, parse_schedule);
        r.get("lr_max", c.optimizer.lr_max);
        r.get("lr_min", c.optimizer.lr_min);
        r.get("epochs", c.optimizer.epochs);
        r.get("cycles", c.optimizer.cycles);
        r.finish();
    }
    if (top.has("runtime")) {
        auto r = top.child("runtime");
        r.get("seed", c.runtime.seed);
        r.get("batch_size", c.runtime.batch_size);
        r.get("workers", c.runtime.workers);
        r.get("device", c.runtime.device);
        r.get("allow_device_downgrade", c.runtime.allow_device_downgrade);
        r.get("checkpoint_dir", c.runtime.checkpoint_dir);
        r.get("log_interval", c.runtime.log_interval);
        r.get("early_stop_miou", c.runtime.early_stop_miou);
        r.get("max_train_scans", c.runtime.max_train_scans);
        r.get("max_eval_scans", c.runtime.max_eval_scans);
        r.finish();
    }
    top.finish();
    return c;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    std::string name = "kitti";
    if (j.contains("preset")) name = j.at("preset").get<std::string>();
    return from_json(j, preset(name));
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "kitti" || name == "semantic_kitti") {
        c.dataset.kind = DatasetKind::SemanticKitti;
        c.dataset.root = "data/semantic_kitti";
        c.model.num_classes = 19;
        c.model.activation = Activation::Hardswish;
        c.model.aux_mode = AuxMode::PlanB;
        c.runtime.checkpoint_dir = "runs/kitti";
        return c;
    }
    if (name == "poss" || name == "semantic_poss") {
        c.dataset.kind = DatasetKind::SemanticPoss;
        c.dataset.root = "data/semantic_poss";
        c.dataset.frequencies = "auto";
        c.projection.height = 40;
        c.projection.width = 1800;
        c.projection.fov_up_deg = 7.0;
        c.projection.fov_down_deg = 16.0;
        c.model.num_classes = 13;
        c.model.activation = Activation::Hardswish;
        c.model.aux_mode = AuxMode::PlanB;
        c.optimizer.schedule = ScheduleKind::Cyclic;
        c.optimizer.lr_max = 1e-3;
        c.optimizer.lr_min = 1e-5;
        c.optimizer.epochs = 135;
        c.optimizer.cycles = 3;
        c.runtime.checkpoint_dir = "runs/poss";
        return c;
    }
    if (name == "toy") {
        c.dataset.kind = DatasetKind::Toy;
        c.dataset.root = "data/toy";
        c.dataset.toy_classes = 4;
        c.dataset.frequencies = "auto";
        c.projection.width = 512;
        c.model.num_classes = 4;
        c.model.activation = Activation::Hardswish;
        c.model.stem_channels = {8, 8, 8};
        c.model.stage_channels = {8, 16, 16, 16};
        c.model.stage_blocks = {1, 1, 1, 1};
        c.model.head_channels = {16, 16};
        c.model.aux_mode = AuxMode::PlanB;
        c.optimizer.lr_max = 2e-2;
        c.optimizer.lr_min = 1e-4;
        c.optimizer.epochs = 30;
        c.runtime.checkpoint_dir = "runs/toy";
        c.runtime.batch_size = 4;
        c.projection.stats_max_scans = 50;
        c.runtime.log_interval = 5;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "' (kitti | poss | toy)");
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const Json::exception& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    auto cfg = from_json(j);
    if (const char* root = std::getenv("DATASET_ROOT"); root && *root) cfg.dataset.root = root;
    cfg.validate();
    return cfg;
}

void ExperimentConfig::set(const std::string& dotted_key, const Json& value) {
    Json j = to_json();
    Json* node = &j;
    std::stringstream ss(dotted_key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ConfigError("empty config key");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i]))
            throw ConfigError("config key '" + dotted_key + "' does not exist");
        node = &(*node)[parts[i]];
    }
    *node = value;
    *this = from_json(j, ExperimentConfig{});
}

std::vector<std::string> json_diff(const Json& a, const Json& b, const std::string& prefix) {
    std::vector<std::string> out;
    if (a.is_object() && b.is_object()) {
        std::set<std::string> keys;
        for (const auto& [k, v] : a.items()) keys.insert(k);
        for (const auto& [k, v] : b.items()) keys.insert(k);
        for (const auto& k : keys) {
            const auto key = prefix.empty() ? k : prefix + "." + k;
            if (!a.contains(k)) out.push_back(key + ": <missing> -> " + b.at(k).dump());
            else if (!b.contains(k)) out.push_back(key + ": " + a.at(k).dump() + " -> <missing>");
            else {
                auto sub = json_diff(a.at(k), b.at(k), key);
                out.insert(out.end(), sub.begin(), sub.end());
            }
        }
    } else if (a != b) {
        out.push_back(prefix + ": " + a.dump() + " -> " + b.dump());
    }
    return out;
}

const std::vector<ConfigKeyDoc>& config_key_docs() {
    static const std::vector<ConfigKeyDoc> docs = {
        {"dataset.root", "Dataset root holding sequences/<SS>/velodyne and labels. DATASET_ROOT overrides it."},
        {"dataset.kind", "semantic_kitti, semantic_poss or toy."},
        {"dataset.toy_classes", "Class count of the synthetic toy scenes."},
        {"dataset.train_sequences", "Training sequence ids; null keeps the dataset default."},
        {"dataset.val_sequences", "Validation sequence ids; null keeps the dataset default."},
        {"dataset.test_sequences", "Test sequence ids; null keeps the dataset default."},
        {"dataset.frequencies", "builtin: bundled class frequencies; auto: count the training split."},
        {"dataset.unknown_labels", "ignore maps unknown raw ids to the ignore id; error rejects them."},
        {"projection.height", "Range image rows H."},
        {"projection.width", "Range image columns W."},
        {"projection.fov_up_deg", "Vertical field of view above the horizon, degrees."},
        {"projection.fov_down_deg", "Vertical field of view below the horizon, degrees (positive)."},
        {"projection.normalization", "auto: per-channel mean/std from the training split; fixed: use means/stds; none."},
        {"projection.means", "Channel means (x, y, z, d, r) for fixed normalization."},
        {"projection.stds", "Channel standard deviations (x, y, z, d, r) for fixed normalization."},
        {"projection.stats_max_scans", "Training scans sampled when computing auto normalization statistics."},
        {"augmentation.rotation.enabled", "Random yaw rotation about the z axis."},
        {"augmentation.rotation.yaw_min", "Lower yaw bound, radians."},
        {"augmentation.rotation.yaw_max", "Upper yaw bound, radians."},
        {"augmentation.dropout.enabled", "Random point dropout."},
        {"augmentation.dropout.prob_min", "Lower bound of the per-scan drop probability."},
        {"augmentation.dropout.prob_max", "Upper bound of the per-scan drop probability (< 1)."},
        {"augmentation.jitter.enabled", "Gaussian noise on x, y, z."},
        {"augmentation.jitter.sigma", "Noise standard deviation per axis, meters."},
        {"augmentation.jitter.clip", "Noise is clipped to +-clip meters."},
        {"model.in_channels", "Input channels; range images have 5."},
        {"model.num_classes", "Output classes; must match the dataset."},
        {"model.activation", "relu, silu or hardswish, used everywhere."},
        {"model.input_kernel", "Kernel size (1 or 3) of the input module and the head conv blocks."},
        {"model.stem_channels", "Widths of the three input-module conv blocks."},
        {"model.stage_channels", "Widths of the four residual stages."},
        {"model.stage_blocks", "BasicBlock count per stage."},
        {"model.stage_strides", "Cumulative output stride of each stage."},
        {"model.head_channels", "Widths of the two head conv blocks before the 1x1 classifier."},
        {"model.aux_mode", "none, plan_a (aux loss at stage resolution) or plan_b (after upsampling)."},
        {"model.aux_stages", "Stages (from 2, 3, 4) that carry auxiliary heads."},
        {"loss.alpha", "Weight of the weighted cross-entropy term."},
        {"loss.beta", "Weight of the Lovasz-Softmax term."},
        {"loss.gamma", "Weight of the boundary term."},
        {"loss.lambda_aux", "Weight of the summed auxiliary losses."},
        {"loss.theta0", "Odd max-pooling window of the boundary maps."},
        {"loss.class_weight_epsilon", "Class weights are 1 / log(1 + epsilon + frequency)."},
        {"loss.class_weights", "Explicit class weights; null derives them from frequencies."},
        {"knn.k", "Neighbors voting per point."},
        {"knn.window", "Odd side of the pixel search window."},
        {"knn.range_cutoff", "Neighbors farther than this in range (meters) are excluded."},
        {"knn.gaussian_sigma", "Width of the range-difference vote weight."},
        {"optimizer.kind", "Always sgd."},
        {"optimizer.momentum", "SGD momentum."},
        {"optimizer.weight_decay", "L2 weight decay."},
        {"optimizer.schedule", "cosine (single annealing) or cyclic (cosine with restarts)."},
        {"optimizer.lr_max", "Initial (cosine) or peak (cyclic) learning rate."},
        {"optimizer.lr_min", "Final / floor learning rate."},
        {"optimizer.epochs", "Total epochs over all cycles."},
        {"optimizer.cycles", "Number of cyclic restarts; epochs must divide evenly."},
        {"runtime.seed", "Global seed for weights, shuffling and augmentation."},
        {"runtime.batch_size", "Scans per optimization step."},
        {"runtime.workers", "Parallel sample-loading threads; results do not depend on it."},
        {"runtime.device", "cpu or cuda."},
        {"runtime.allow_device_downgrade", "Fall back to cpu when the requested device is missing."},
        {"runtime.checkpoint_dir", "Where checkpoints and logs are written."},
        {"runtime.log_interval", "Steps between loss records."},
        {"runtime.early_stop_miou", "Stop once validation image-space mIoU reaches this value; null disables."},
        {"runtime.max_train_scans", "Use only the first N training scans; null for all."},
        {"runtime.max_eval_scans", "Use only the first N evaluation scans; null for all."},
    };
    return docs;
}

std::string config_reference_markdown() {
    const Json defaults = ExperimentConfig{}.to_json();
    std::ostringstream os;
    os << "# Configuration reference\n\n"
       << "Config files are JSON. A top-level `\"preset\"` key (`kitti`, `poss`, `toy`) selects the\n"
       << "starting values; every other key overrides one field. Unknown keys are rejected.\n\n"
       << "| key | default | description |\n|---|---|---|\n";
    for (const auto& d : config_key_docs()) {
        const Json* node = &defaults;
        std::stringstream ss(d.key);
        std::string part;
        while (std::getline(ss, part, '.')) node = &node->at(part);
        os << "| `" << d.key << "` | `" << node->dump() << "` | " << d.description << " |\n";
    }
    return os.str();
}

}  // namespace cenet
