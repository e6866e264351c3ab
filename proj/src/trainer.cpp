#include "cenet/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>

#include "cenet/benchmark.hpp"
#include "cenet/error.hpp"
#include "cenet/knn.hpp"
#include "cenet/losses.hpp"
#include "cenet/rng.hpp"
#include "cenet/scheduler.hpp"

namespace cenet {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ull;

std::vector<ScanEntry> limit(std::vector<ScanEntry> v, const std::optional<int>& n) {
    if (n && *n >= 0 && static_cast<std::size_t>(*n) < v.size()) v.resize(static_cast<std::size_t>(*n));
    return v;
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    return order;
}

std::vector<Label> argmax_labels(const torch::Tensor& logits) {
    auto pred = logits.argmax(0).to(torch::kInt32).contiguous().cpu();
    return {pred.data_ptr<int32_t>(), pred.data_ptr<int32_t>() + pred.numel()};
}

NormStats stats_from_config(const ProjectionBlock& p) {
    NormStats s;
    if (p.normalization == "fixed")
        for (int c = 0; c < 5; ++c) s.mean[c] = p.means[c], s.std[c] = p.stds[c];
    return s;
}

void log_line(std::ostream* log, const std::string& line) {
    if (log) *log << line << std::endl;
}

Json iou_json(const IouResult& r, const ClassConfig& classes) {
    Json per = Json::object();
    for (int c = 0; c < classes.num_classes; ++c)
        per[classes.class_names[c]] = r.included[c] ? Json(r.per_class[c]) : Json(nullptr);
    return {{"miou", r.miou ? Json(*r.miou) : Json(nullptr)}, {"per_class", per}};
}

}  // namespace

MetricsRecord::MetricsRecord(int num_classes, Label ignore_id)
    : image_cm(num_classes, ignore_id), point_cm(num_classes, ignore_id) {}

void MetricsRecord::finalize() {
    image_iou = iou(image_cm);
    point_iou = iou(point_cm);
}

Json MetricsRecord::to_json(const ClassConfig& classes, const std::string& config_echo) const {
    return {{"split", split},
            {"scans", scans},
            {"knn", knn},
            {"image_space", iou_json(image_iou, classes)},
            {"point_space", iou_json(point_iou, classes)},
            {"protocol",
             {{"image_space", "argmax pixels vs. projected label image"},
              {"point_space", knn ? "unprojected with KNN post-processing vs. point labels"
                                  : "unprojected pixel labels vs. point labels"}}},
            {"config", Json::parse(config_echo)}};
}

MetricsRecord evaluate_split(CENet& model, const DataPipeline& pipeline, const std::vector<ScanEntry>& entries,
                             const KnnConfig* knn, const std::string& split_name,
                             const std::optional<fs::path>& predictions_out) {
    const auto& classes = pipeline.classes();
    if (model->config().num_classes != classes.num_classes)
        throw ConsistencyError("evaluate: model has " + std::to_string(model->config().num_classes) +
                               " classes, dataset has " + std::to_string(classes.num_classes));
    MetricsRecord rec(classes.num_classes, classes.ignore_id);
    rec.split = split_name;
    rec.knn = knn != nullptr;
    const bool was_training = model->is_training();
    model->eval();
    torch::NoGradGuard no_grad;
    const auto device = model->parameters().front().device();

    for (const auto& entry : entries) {
        const auto sample = pipeline.load(entry, false, 0, true);
        const auto logits = model->forward(sample.input.unsqueeze(0).to(device)).main_logits.squeeze(0);
        const auto pixels = argmax_labels(logits);
        const auto& ri = sample.range_image;
        if (ri.label_image()) rec.image_cm.accumulate(pixels, *ri.label_image());
        const auto points = knn ? knn_postprocess(ri, pixels, *knn) : unproject_labels(pixels, ri);
        if (!sample.point_labels.empty()) rec.point_cm.accumulate(points, sample.point_labels);
        if (predictions_out)
            write_labels(label_path_for(*predictions_out, entry.sequence, entry.scan.stem().string(), "predictions"),
                         points, classes);
        ++rec.scans;
    }
    if (was_training) model->train();
    rec.finalize();
    return rec;
}

std::int64_t steps_per_epoch(const ExperimentConfig& cfg, std::size_t train_scans) {
    const auto b = static_cast<std::size_t>(cfg.runtime.batch_size);
    return static_cast<std::int64_t>((train_scans + b - 1) / b);
}

double scheduled_lr(const ExperimentConfig& cfg, std::int64_t spe, std::int64_t global_step) {
    const auto& o = cfg.optimizer;
    const LrSchedule schedule(o.lr_max, o.lr_min, spe * o.epochs, o.schedule == ScheduleKind::Cosine ? 1 : o.cycles);
    return schedule.at(global_step);
}

TrainResult train(const ExperimentConfig& cfg, const TrainOptions& opt) {
    cfg.validate();
    std::string device_note;
    const auto device = resolve_device(cfg.runtime.device, cfg.runtime.allow_device_downgrade, &device_note);
    if (!device_note.empty()) log_line(opt.log, device_note);

    auto classes = cfg.class_config();
    const auto splits = cfg.splits();
    const fs::path root = cfg.dataset.root;
    const auto train_entries = limit(list_scans(root, splits.train_sequences), cfg.runtime.max_train_scans);
    const auto val_entries = limit(list_scans(root, splits.val_sequences), cfg.runtime.max_eval_scans);
    if (train_entries.empty()) throw DataError("no training scans under '" + root.string() + "'");

    const fs::path dir = cfg.runtime.checkpoint_dir;
    fs::create_directories(dir);
    TrainResult result;
    result.last_checkpoint = dir / "last.pt";
    result.best_checkpoint = dir / "best.pt";
    result.loss_log = dir / "losses.csv";
    result.metrics_log = dir / "metrics.jsonl";

    CheckpointMeta meta;
    meta.config_echo = cfg.echo();
    if (opt.resume) {
        const auto saved = read_checkpoint_meta(*opt.resume);
        if (saved.config_echo != meta.config_echo) {
            std::string msg = "resume: checkpoint config differs from the requested config:";
            for (const auto& d : json_diff(Json::parse(saved.config_echo), Json::parse(meta.config_echo)))
                msg += "\n  " + d;
            throw ConfigError(msg);
        }
        meta.stats = saved.stats;
        meta.frequencies = saved.frequencies;
    } else {
        if (cfg.dataset.frequencies == "auto") classes.set_frequencies_from_counts(count_classes(train_entries, classes));
        meta.frequencies = classes.frequencies;
        meta.stats = cfg.projection.normalization == "auto"
                         ? compute_norm_stats(train_entries, cfg.projection.projection(), cfg.projection.stats_max_scans)
                         : stats_from_config(cfg.projection);
    }
    classes.frequencies = meta.frequencies;
    const auto loss_cfg = cfg.loss_config(classes);

    torch::manual_seed(cfg.runtime.seed);
    auto model = build_model(cfg.model);
    model->to(device);
    torch::optim::SGD optimizer(model->parameters(), torch::optim::SGDOptions(cfg.optimizer.lr_max)
                                                         .momentum(cfg.optimizer.momentum)
                                                         .weight_decay(cfg.optimizer.weight_decay));
    result.train_params = count_parameters(*model, ParamScope::Train);
    result.inference_params = count_parameters(*model, ParamScope::Inference);

    int start_epoch = 0;
    if (opt.resume) {
        const auto saved = load_checkpoint(*opt.resume, model, &optimizer);
        start_epoch = saved.epoch;
        meta.global_step = saved.global_step;
        meta.best_miou = saved.best_miou;
        log_line(opt.log, "resumed at epoch " + std::to_string(start_epoch + 1));
    }

    std::ofstream loss_log(result.loss_log, opt.resume ? std::ios::app : std::ios::trunc);
    std::ofstream metrics_log(result.metrics_log, opt.resume ? std::ios::app : std::ios::trunc);
    if (!opt.resume) loss_log << LossBreakdown::csv_header() << '\n';

    const DataPipeline pipeline(cfg.projection.projection(), classes, meta.stats, cfg.augmentation);
    const DataPipeline eval_pipeline(cfg.projection.projection(), classes, meta.stats);
    const std::int64_t spe = steps_per_epoch(cfg, train_entries.size());
    const auto batch = static_cast<std::size_t>(cfg.runtime.batch_size);

    int epochs_this_run = 0;
    for (int epoch = start_epoch; epoch < cfg.optimizer.epochs; ++epoch) {
        model->train();
        const auto order = shuffled(train_entries.size(), mix_seed({cfg.runtime.seed, static_cast<std::uint64_t>(epoch), kShuffleStream}));
        double loss_sum = 0.0;
        double lr = 0.0;
        for (std::size_t first = 0; first < order.size(); first += batch) {
            const std::size_t last = std::min(order.size(), first + batch);
            std::vector<Sample> samples(last - first);
            auto load_one = [&](std::size_t k) {
                const std::size_t index = order[first + k];
                const auto seed = mix_seed({cfg.runtime.seed, static_cast<std::uint64_t>(epoch), index});
                return pipeline.load(train_entries[index], true, seed, true);
            };
            if (cfg.runtime.workers > 1) {
                for (std::size_t k0 = 0; k0 < samples.size(); k0 += static_cast<std::size_t>(cfg.runtime.workers)) {
                    std::vector<std::future<Sample>> jobs;
                    const std::size_t k1 = std::min(samples.size(), k0 + static_cast<std::size_t>(cfg.runtime.workers));
                    for (std::size_t k = k0; k < k1; ++k) jobs.push_back(std::async(std::launch::async, load_one, k));
                    for (std::size_t k = k0; k < k1; ++k) samples[k] = jobs[k - k0].get();
                }
            } else {
                for (std::size_t k = 0; k < samples.size(); ++k) samples[k] = load_one(k);
            }
            std::vector<torch::Tensor> inputs, targets;
            for (const auto& s : samples) {
                inputs.push_back(s.input);
                targets.push_back(s.target);
            }
            const auto input = torch::stack(inputs).to(device);
            const auto target = torch::stack(targets).to(device);

            lr = scheduled_lr(cfg, spe, meta.global_step);
            for (auto& group : optimizer.param_groups())
                static_cast<torch::optim::SGDOptions&>(group.options()).lr(lr);

            optimizer.zero_grad();
            const auto out = model->forward(input);
            const auto breakdown = total_loss(out, target, loss_cfg, cfg.model.aux_mode);
            breakdown.total_tensor.backward();
            optimizer.step();

            loss_sum += breakdown.total;
            if (meta.global_step % cfg.runtime.log_interval == 0) loss_log << breakdown.csv_row(meta.global_step) << '\n';
            ++meta.global_step;
        }
        loss_log.flush();

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.global_step = meta.global_step;
        rec.lr_last = lr;
        rec.mean_total_loss = loss_sum / static_cast<double>(spe);
        meta.epoch = epoch + 1;

        bool improved = false;
        if (!val_entries.empty()) {
            auto metrics = evaluate_split(model, eval_pipeline, val_entries, nullptr, "val");
            rec.val_image_miou = metrics.image_miou();
            rec.val_point_miou = metrics.point_miou();
            auto j = metrics.to_json(classes, meta.config_echo);
            j["epoch"] = rec.epoch;
            j["mean_total_loss"] = rec.mean_total_loss;
            metrics_log << j.dump() << '\n';
            metrics_log.flush();
            if (*rec.val_image_miou > meta.best_miou) {
                meta.best_miou = *rec.val_image_miou;
                improved = true;
            }
        }
        save_checkpoint(result.last_checkpoint, meta, model, &optimizer);
        if (improved) save_checkpoint(result.best_checkpoint, meta, model, &optimizer);

        char line[200];
        std::snprintf(line, sizeof(line), "epoch %d/%d  loss %.4f  lr %.3g  val mIoU img %.4f pts %.4f", rec.epoch,
                      cfg.optimizer.epochs, rec.mean_total_loss, rec.lr_last, rec.val_image_miou.value_or(-1.0),
                      rec.val_point_miou.value_or(-1.0));
        log_line(opt.log, line);
        result.history.push_back(rec);
        result.epochs_completed = rec.epoch;
        ++epochs_this_run;

        if (cfg.runtime.early_stop_miou && rec.val_image_miou && *rec.val_image_miou >= *cfg.runtime.early_stop_miou) {
            result.early_stopped = true;
            break;
        }
        if (opt.stop_after_epochs && epochs_this_run >= *opt.stop_after_epochs) break;
    }
    if (!fs::exists(result.best_checkpoint) && fs::exists(result.last_checkpoint))
        fs::copy_file(result.last_checkpoint, result.best_checkpoint, fs::copy_options::overwrite_existing);
    return result;
}

LoadedModel load_for_inference(const ExperimentConfig& cfg, const fs::path& checkpoint) {
    auto meta = read_checkpoint_meta(checkpoint);
    auto saved = meta.config();
    if (saved.model.num_classes != cfg.model.num_classes)
        throw ConsistencyError("checkpoint has " + std::to_string(saved.model.num_classes) +
                               " classes, config expects " + std::to_string(cfg.model.num_classes));
    if (!(saved.model == cfg.model)) {
        std::string msg = "checkpoint model config differs from the requested one:";
        for (const auto& d : json_diff(saved.to_json()["model"], cfg.to_json()["model"])) msg += "\n  " + d;
        throw ConsistencyError(msg);
    }
    std::string note;
    const auto device = resolve_device(cfg.runtime.device, cfg.runtime.allow_device_downgrade, &note);
    auto model = build_model(saved.model);
    load_checkpoint(checkpoint, model);
    model->to(device);
    model->eval();
    auto classes = cfg.class_config();
    classes.frequencies = meta.frequencies;
    DataPipeline pipeline(cfg.projection.projection(), classes, meta.stats);
    return {std::move(meta), std::move(saved), model, std::move(pipeline)};
}

MetricsRecord evaluate(const ExperimentConfig& cfg, const fs::path& checkpoint, const EvalOptions& opt) {
    cfg.validate();
    auto loaded = load_for_inference(cfg, checkpoint);
    const auto entries = limit(list_scans(cfg.dataset.root, cfg.splits().sequences(opt.split)), cfg.runtime.max_eval_scans);
    if (entries.empty()) throw DataError("no scans in split '" + opt.split + "' under '" + cfg.dataset.root + "'");
    return evaluate_split(loaded.model, loaded.pipeline, entries, opt.knn ? &cfg.knn : nullptr, opt.split,
                          opt.predictions_out);
}

MetricsRecord evaluate_predictions(const ExperimentConfig& cfg, const fs::path& predictions_root,
                                   const std::string& split) {
    const auto classes = cfg.class_config();
    const auto entries = limit(list_scans(cfg.dataset.root, cfg.splits().sequences(split)), cfg.runtime.max_eval_scans);
    MetricsRecord rec(classes.num_classes, classes.ignore_id);
    rec.split = split;
    for (const auto& e : entries) {
        const auto gt = load_labels(e.label, classes);
        const auto pred_path = label_path_for(predictions_root, e.sequence, e.scan.stem().string(), "predictions");
        const auto pred = load_labels(pred_path, classes, gt.size());
        rec.point_cm.accumulate(pred, gt);
        ++rec.scans;
    }
    rec.finalize();
    return rec;
}

InferResult infer(const ExperimentConfig& cfg, const fs::path& checkpoint, const std::vector<fs::path>& scans,
                  const fs::path& out_dir, bool knn, std::ostream* log) {
    cfg.validate();
    auto loaded = load_for_inference(cfg, checkpoint);
    const auto device = loaded.model->parameters().front().device();
    fs::create_directories(out_dir);
    InferResult result;
    torch::NoGradGuard no_grad;
    for (const auto& path : scans) {
        const auto t0 = std::chrono::steady_clock::now();
        PointCloud pc;
        try {
            pc = load_scan(path);
        } catch (const DataError& e) {
            result.skipped.push_back(path.string() + ": " + e.what());
            log_line(log, "skipped " + path.string() + ": " + e.what());
            continue;
        }
        const auto sample = loaded.pipeline.from_cloud(pc, false, 0);
        const auto logits = loaded.model->forward(sample.input.unsqueeze(0).to(device)).main_logits.squeeze(0);
        const auto pixels = argmax_labels(logits);
        const auto points = knn ? knn_postprocess(sample.range_image, pixels, cfg.knn)
                                : unproject_labels(pixels, sample.range_image);
        const auto out = out_dir / (path.stem().string() + ".label");
        write_labels(out, points, loaded.pipeline.classes());
        const auto t1 = std::chrono::steady_clock::now();
        result.written.push_back(out);
        result.wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        char line[256];
        std::snprintf(line, sizeof(line), "%s -> %s (%zu points, %.1f ms)", path.string().c_str(), out.string().c_str(),
                      points.size(), result.wall_ms.back());
        log_line(log, line);
    }
    return result;
}

AblationPlan AblationPlan::from_json(const Json& j) {
    if (!j.is_object() || !j.contains("deltas") || !j.at("deltas").is_array())
        throw ConfigError("ablation plan needs a 'deltas' array");
    AblationPlan plan;
    for (const auto& d : j.at("deltas")) {
        AblationDelta delta;
        delta.name = d.at("name").get<std::string>();
        if (d.contains("set")) delta.set = d.at("set");
        if (!delta.set.is_object()) throw ConfigError("ablation delta '" + delta.name + "': 'set' must be an object");
        for (const auto& [k, v] : d.items())
            if (k != "name" && k != "set") throw ConfigError("ablation delta '" + delta.name + "': unknown key '" + k + "'");
        plan.deltas.push_back(std::move(delta));
    }
    return plan;
}

AblationPlan AblationPlan::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ablation plan '" + path.string() + "'");
    try {
        return from_json(Json::parse(in, nullptr, true, true));
    } catch (const Json::exception& e) {
        throw ConfigError("ablation plan '" + path.string() + "': " + e.what());
    }
}

void AblationPlan::validate(const ExperimentConfig& base) const {
    for (const auto& d : deltas) {
        ExperimentConfig cfg = base;
        for (const auto& [key, value] : d.set.items()) cfg.set(key, value);
    }
}

AblationTable run_ablation(const AblationPlan& plan, const ExperimentConfig& base, std::ostream* log) {
    plan.validate(base);
    AblationTable table;
    for (const auto& d : plan.deltas) {
        AblationRow row;
        row.name = d.name;
        try {
            ExperimentConfig cfg = base;
            for (const auto& [key, value] : d.set.items()) cfg.set(key, value);
            cfg.runtime.checkpoint_dir = (fs::path(base.runtime.checkpoint_dir) / d.name).string();
            cfg.validate();
            log_line(log, "== ablation leg '" + d.name + "'");
            const auto trained = train(cfg, {.log = log});
            row.miou = trained.history.empty() ? 0.0 : trained.history.back().val_image_miou.value_or(0.0);
            row.train_params = trained.train_params;
            row.inference_params = trained.inference_params;
            BenchmarkOptions bench;
            bench.height = cfg.projection.height;
            bench.widths = {cfg.projection.width};
            bench.kernels = {cfg.model.input_kernel};
            bench.device = cfg.runtime.device;
            bench.seed = cfg.runtime.seed;
            row.latency_ms = benchmark_forward(cfg.model, bench).rows.front().mean_latency_ms;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            log_line(log, "ablation leg '" + d.name + "' failed: " + e.what());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string AblationTable::table() const {
    std::string out = "| Delta | mIoU | Train Params(M) | Inference Params(M) | Latency(ms) |\n|---|---|---|---|---|\n";
    char line[256];
    for (const auto& r : rows) {
        if (r.failed) {
            std::snprintf(line, sizeof(line), "| %s | failed | - | - | - |\n", r.name.c_str());
        } else {
            std::snprintf(line, sizeof(line), "| %s | %.4f | %.6f | %.6f | %.3f |\n", r.name.c_str(), r.miou,
                          r.train_params / 1e6, r.inference_params / 1e6, r.latency_ms);
        }
        out += line;
    }
    return out;
}

}  // namespace cenet
