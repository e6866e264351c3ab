// Command line front end: train, eval, infer, benchmark, project, ablate,
// toy-data and config-docs. Exit codes: 0 ok, 1 config, 2 data, 3 runtime.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cenet/benchmark.hpp"
#include "cenet/error.hpp"
#include "cenet/experiment_config.hpp"
#include "cenet/lidar_io.hpp"
#include "cenet/projection.hpp"
#include "cenet/toy_dataset.hpp"
#include "cenet/trainer.hpp"

namespace fs = std::filesystem;
using namespace cenet;

namespace {

struct ConfigArgs {
    std::string path;
    std::string preset;
    std::vector<std::string> sets;

    void add(CLI::App* cmd) {
        cmd->add_option("-c,--config", path, "JSON experiment config");
        cmd->add_option("--preset", preset, "start from a preset (kitti, poss, toy) instead of a file");
        cmd->add_option("--set", sets, "override a dotted key, e.g. --set optimizer.epochs=5");
    }

    ExperimentConfig build() const {
        if (!path.empty() && !preset.empty()) throw ConfigError("give either --config or --preset, not both");
        ExperimentConfig cfg = path.empty() ? ExperimentConfig::preset(preset.empty() ? "kitti" : preset)
                                            : ExperimentConfig::load(path);
        if (path.empty())
            if (const char* root = std::getenv("DATASET_ROOT")) cfg.dataset.root = root;
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
            const std::string key = s.substr(0, eq);
            const std::string text = s.substr(eq + 1);
            Json value;
            try {
                value = Json::parse(text);
            } catch (const Json::exception&) {
                value = text;  // bare strings
            }
            cfg.set(key, value);
        }
        cfg.validate();
        return cfg;
    }
};

void write_json(const fs::path& path, const Json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

void write_pgm(const fs::path& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

std::vector<fs::path> expand_scans(const std::vector<std::string>& inputs) {
    std::vector<fs::path> scans;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".bin") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            scans.insert(scans.end(), found.begin(), found.end());
        } else {
            scans.emplace_back(in);
        }
    }
    return scans;
}

void print_metrics(const MetricsRecord& m, const ClassConfig& classes) {
    std::printf("split %s  scans %zu  knn %s\n", m.split.c_str(), m.scans, m.knn ? "on" : "off");
    std::printf("%-16s %10s %10s\n", "class", "img IoU", "pts IoU");
    auto cell = [](const IouResult& r, int c) {
        char buf[16];
        if (r.included.empty() || !r.included[c]) return std::string("-");
        std::snprintf(buf, sizeof(buf), "%.4f", r.per_class[c]);
        return std::string(buf);
    };
    for (int c = 0; c < classes.num_classes; ++c)
        std::printf("%-16s %10s %10s\n", classes.class_names[c].c_str(), cell(m.image_iou, c).c_str(),
                    cell(m.point_iou, c).c_str());
    std::printf("%-16s %10.4f %10.4f\n", "mIoU", m.image_miou(), m.point_miou());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CENet range-image LiDAR segmentation"};
    app.require_subcommand(1);

    ConfigArgs train_cfg, eval_cfg, infer_cfg, bench_cfg, project_cfg, ablate_cfg;

    auto* train_cmd = app.add_subcommand("train", "train a model");
    train_cfg.add(train_cmd);
    std::string resume;
    int stop_after = 0;
    train_cmd->add_option("--resume", resume, "checkpoint to continue from");
    train_cmd->add_option("--stop-after", stop_after, "stop after this many epochs of this run");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint or prediction files");
    eval_cfg.add(eval_cmd);
    std::string eval_ckpt, eval_split = "val", eval_pred_out, eval_from_pred, eval_json;
    bool eval_knn = false;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file");
    eval_cmd->add_option("--split", eval_split, "train, val or test");
    eval_cmd->add_flag("--knn", eval_knn, "apply KNN post-processing before point-space scoring");
    eval_cmd->add_option("--predictions-out", eval_pred_out, "also write per-point predictions here");
    eval_cmd->add_option("--from-predictions", eval_from_pred, "score prediction files instead of a model");
    eval_cmd->add_option("--json", eval_json, "write the metrics record here");

    auto* infer_cmd = app.add_subcommand("infer", "label raw scans");
    infer_cfg.add(infer_cmd);
    std::string infer_ckpt, infer_out;
    std::vector<std::string> infer_inputs;
    bool infer_knn = false;
    infer_cmd->add_option("--checkpoint", infer_ckpt, "checkpoint file")->required();
    infer_cmd->add_option("-o,--out", infer_out, "output directory")->required();
    infer_cmd->add_flag("--knn", infer_knn, "apply KNN post-processing");
    infer_cmd->add_option("scans", infer_inputs, ".bin files or directories")->required();

    auto* bench_cmd = app.add_subcommand("benchmark", "time forward passes");
    bench_cfg.add(bench_cmd);
    BenchmarkOptions bench;
    std::string bench_json;
    bench_cmd->add_option("--height", bench.height);
    bench_cmd->add_option("--widths", bench.widths);
    bench_cmd->add_option("--kernels", bench.kernels);
    bench_cmd->add_option("--warmup", bench.warmup_iters);
    bench_cmd->add_option("--iters", bench.timed_iters);
    bench_cmd->add_option("--device", bench.device);
    bench_cmd->add_option("--json", bench_json, "write rows as JSON here");

    auto* project_cmd = app.add_subcommand("project", "write a scan's range image as PGM");
    project_cfg.add(project_cmd);
    std::string project_scan, project_labels, project_out;
    project_cmd->add_option("scan", project_scan, ".bin scan")->required();
    project_cmd->add_option("--labels", project_labels, ".label file");
    project_cmd->add_option("-o,--out", project_out, "output prefix")->required();

    auto* ablate_cmd = app.add_subcommand("ablate", "train and score a list of config deltas");
    ablate_cfg.add(ablate_cmd);
    std::string plan_path, ablate_json;
    ablate_cmd->add_option("--plan", plan_path, "ablation plan JSON")->required();
    ablate_cmd->add_option("--json", ablate_json, "write rows as JSON here");

    auto* toy_cmd = app.add_subcommand("toy-data", "generate a synthetic dataset");
    std::string toy_root;
    int toy_classes = 4, toy_train = 40, toy_val = 10, toy_test = 10;
    std::uint64_t toy_seed = 7;
    toy_cmd->add_option("-o,--out", toy_root, "dataset root")->required();
    toy_cmd->add_option("--classes", toy_classes);
    toy_cmd->add_option("--train", toy_train, "scans in sequence 00");
    toy_cmd->add_option("--val", toy_val, "scans in sequence 01");
    toy_cmd->add_option("--test", toy_test, "scans in sequence 02");
    toy_cmd->add_option("--seed", toy_seed);

    auto* docs_cmd = app.add_subcommand("config-docs", "print the config key reference");
    std::string docs_out;
    docs_cmd->add_option("-o,--out", docs_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_cmd) {
            const auto cfg = train_cfg.build();
            TrainOptions opt;
            opt.log = &std::cout;
            if (!resume.empty()) opt.resume = resume;
            if (stop_after > 0) opt.stop_after_epochs = stop_after;
            const auto result = train(cfg, opt);
            std::printf("params train %lld inference %lld\n", static_cast<long long>(result.train_params),
                        static_cast<long long>(result.inference_params));
            std::printf("last %s\nbest %s\n", result.last_checkpoint.c_str(), result.best_checkpoint.c_str());
        } else if (*eval_cmd) {
            const auto cfg = eval_cfg.build();
            MetricsRecord m = [&] {
                if (!eval_from_pred.empty()) return evaluate_predictions(cfg, eval_from_pred, eval_split);
                if (eval_ckpt.empty()) throw ConfigError("eval needs --checkpoint or --from-predictions");
                EvalOptions opt;
                opt.split = eval_split;
                opt.knn = eval_knn;
                if (!eval_pred_out.empty()) opt.predictions_out = eval_pred_out;
                return evaluate(cfg, eval_ckpt, opt);
            }();
            const auto classes = cfg.class_config();
            print_metrics(m, classes);
            if (!eval_json.empty()) write_json(eval_json, m.to_json(classes, cfg.echo()));
        } else if (*infer_cmd) {
            const auto cfg = infer_cfg.build();
            const auto result = infer(cfg, infer_ckpt, expand_scans(infer_inputs), infer_out, infer_knn, &std::cout);
            std::printf("wrote %zu, skipped %zu\n", result.written.size(), result.skipped.size());
            if (result.written.empty() && !result.skipped.empty()) return 2;
        } else if (*bench_cmd) {
            const auto cfg = bench_cfg.build();
            bench.seed = cfg.runtime.seed;
            bench.allow_downgrade = cfg.runtime.allow_device_downgrade;
            const auto report = benchmark_forward(cfg.model, bench);
            if (!report.note.empty()) std::printf("%s\n", report.note.c_str());
            std::printf("device %s\n%s", report.device.c_str(), report.table().c_str());
            if (!bench_json.empty()) {
                Json rows = Json::array();
                for (const auto& r : report.rows)
                    rows.push_back({{"kernel", r.kernel}, {"height", r.height}, {"width", r.width},
                                    {"latency_ms", r.mean_latency_ms}, {"latency_std_ms", r.latency_std_ms},
                                    {"fps", r.fps}, {"inference_params", r.inference_params},
                                    {"warmup", r.warmup_iters}, {"iters", r.timed_iters}});
                write_json(bench_json, {{"device", report.device}, {"note", report.note}, {"rows", rows}});
            }
        } else if (*project_cmd) {
            const auto cfg = project_cfg.build();
            const auto classes = cfg.class_config();
            auto pc = load_scan(project_scan, cfg.dataset.kind);
            if (!project_labels.empty()) pc.labels = load_labels(project_labels, classes, pc.size());
            const auto ri = spherical_project(pc, cfg.projection.projection(), classes.ignore_id);
            const int h = ri.height(), w = ri.width();
            float max_d = 0.0f;
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) max_d = std::max(max_d, ri.channel(RangeImage::Range, r, c));
            std::vector<std::uint8_t> depth(ri.num_pixels(), 0);
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c)
                    if (ri.valid(r, c))
                        depth[ri.flat(r, c)] =
                            static_cast<std::uint8_t>(1 + 254.0f * ri.channel(RangeImage::Range, r, c) / max_d);
            write_pgm(project_out + ".range.pgm", w, h, depth);
            std::ofstream side(project_out + ".txt");
            side << "width " << w << "\nheight " << h << "\npoints " << pc.size() << "\nvalid_pixels "
                 << ri.valid_count() << "\nmax_range " << max_d << "\nrange_scale 254/max_range, 0 = empty\n";
            if (ri.label_image()) {
                std::vector<std::uint8_t> lab(ri.num_pixels(), 255);
                for (std::size_t i = 0; i < lab.size(); ++i) {
                    const Label l = (*ri.label_image())[i];
                    if (l != classes.ignore_id) lab[i] = static_cast<std::uint8_t>(l);
                }
                write_pgm(project_out + ".labels.pgm", w, h, lab);
                side << "labels train ids, 255 = ignore\n";
            }
            std::printf("wrote %s.range.pgm (%d x %d, %zu valid pixels)\n", project_out.c_str(), w, h,
                        ri.valid_count());
        } else if (*ablate_cmd) {
            const auto cfg = ablate_cfg.build();
            const auto plan = AblationPlan::load(plan_path);
            const auto table = run_ablation(plan, cfg, &std::cout);
            std::printf("%s", table.table().c_str());
            if (!ablate_json.empty()) {
                Json rows = Json::array();
                for (const auto& r : table.rows)
                    rows.push_back({{"name", r.name}, {"failed", r.failed}, {"error", r.error}, {"miou", r.miou},
                                    {"train_params", r.train_params}, {"inference_params", r.inference_params},
                                    {"latency_ms", r.latency_ms}});
                write_json(ablate_json, rows);
            }
            for (const auto& r : table.rows)
                if (r.failed) return 3;
        } else if (*toy_cmd) {
            make_toy_dataset(toy_root, toy_train, toy_classes, toy_seed, "00", 0);
            make_toy_dataset(toy_root, toy_val, toy_classes, toy_seed, "01", toy_train);
            make_toy_dataset(toy_root, toy_test, toy_classes, toy_seed, "02", toy_train + toy_val);
            std::printf("wrote %d/%d/%d scans under %s\n", toy_train, toy_val, toy_test, toy_root.c_str());
        } else if (*docs_cmd) {
            const auto md = config_reference_markdown();
            if (docs_out.empty()) {
                std::cout << md;
            } else {
                std::ofstream(docs_out) << md;
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const EnvironmentError& e) {
        std::cerr << "environment error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
