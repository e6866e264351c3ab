// Python bindings for the projection, metrics, KNN, I/O and training entry points.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <numbers>

#include "cenet/error.hpp"
#include "cenet/experiment_config.hpp"
#include "cenet/knn.hpp"
#include "cenet/lidar_io.hpp"
#include "cenet/metrics.hpp"
#include "cenet/model.hpp"
#include "cenet/projection.hpp"
#include "cenet/toy_dataset.hpp"
#include "cenet/trainer.hpp"

namespace py = pybind11;
using namespace cenet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<Label, py::array::c_style | py::array::forcecast>;

// (N, 4) float32 rows of x, y, z, remission.
PointCloud cloud_from(const FloatArray& points, const std::optional<LabelArray>& labels) {
    if (points.ndim() != 2 || points.shape(1) != 4) throw py::value_error("points must have shape (N, 4)");
    const auto n = static_cast<std::size_t>(points.shape(0));
    const auto p = points.unchecked<2>();
    PointCloud pc;
    pc.xyz.resize(n);
    pc.remission.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        pc.xyz[i] = {p(i, 0), p(i, 1), p(i, 2)};
        pc.remission[i] = p(i, 3);
    }
    if (labels) {
        if (labels->ndim() != 1 || static_cast<std::size_t>(labels->shape(0)) != n)
            throw py::value_error("labels must have shape (N,)");
        pc.labels.emplace(labels->data(), labels->data() + n);
    }
    return pc;
}

py::array_t<float> points_of(const PointCloud& pc) {
    py::array_t<float> out({static_cast<py::ssize_t>(pc.size()), py::ssize_t{4}});
    auto o = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pc.size(); ++i) {
        o(i, 0) = pc.xyz[i].x;
        o(i, 1) = pc.xyz[i].y;
        o(i, 2) = pc.xyz[i].z;
        o(i, 3) = pc.remission[i];
    }
    return out;
}

template <typename T>
py::array_t<T> array_of(std::span<const T> v, std::vector<py::ssize_t> shape) {
    py::array_t<T> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::span<const Label> labels_span(const LabelArray& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
    return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

ProjectionConfig projection_config(int height, int width, double fov_up_deg, double fov_down_deg) {
    ProjectionConfig cfg;
    cfg.height = height;
    cfg.width = width;
    cfg.fov_up = fov_up_deg * std::numbers::pi / 180.0;
    cfg.fov_down = fov_down_deg * std::numbers::pi / 180.0;
    return cfg;
}

ExperimentConfig config_of(const py::object& config, bool validate = true) {
    if (py::isinstance<py::str>(config)) return ExperimentConfig::preset(config.cast<std::string>());
    auto cfg = ExperimentConfig::from_json(from_python(config));
    if (validate) cfg.validate();
    return cfg;
}

py::dict iou_dict(const IouResult& r) {
    py::dict d;
    std::vector<std::optional<double>> per_class;
    for (std::size_t c = 0; c < r.per_class.size(); ++c)
        per_class.push_back(r.included[c] ? std::optional<double>(r.per_class[c]) : std::nullopt);
    d["per_class"] = per_class;
    d["miou"] = r.miou;
    return d;
}

}  // namespace

PYBIND11_MODULE(cenet, m) {
    m.doc() = "Range-image LiDAR segmentation: projection, metrics, KNN, I/O and training";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_OSError);
    py::register_exception<EnvironmentError>(m, "EnvironmentError", PyExc_RuntimeError);
    py::class_<RangeImage>(m, "RangeImage")
        .def_property_readonly("height", &RangeImage::height)
        .def_property_readonly("width", &RangeImage::width)
        .def_property_readonly("channels", [](const RangeImage& ri) {
            return array_of(ri.channels(), {RangeImage::kChannels, ri.height(), ri.width()});
        })
        .def_property_readonly("valid", [](const RangeImage& ri) {
            return array_of(ri.valid_mask(), {ri.height(), ri.width()}).attr("astype")("bool");
        })
        .def_property_readonly("point_of_pixel", [](const RangeImage& ri) {
            return array_of(ri.point_of_pixel(), {ri.height(), ri.width()});
        })
        .def_property_readonly("pixel_of_point", [](const RangeImage& ri) {
            py::array_t<int> out({static_cast<py::ssize_t>(ri.num_points()), py::ssize_t{2}});
            auto o = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < ri.num_points(); ++i) {
                o(i, 0) = ri.pixel_of_point(i).row;
                o(i, 1) = ri.pixel_of_point(i).col;
            }
            return out;
        })
        .def_property_readonly("label_image", [](const RangeImage& ri) -> py::object {
            if (!ri.label_image()) return py::none();
            return array_of(std::span<const Label>(*ri.label_image()), {ri.height(), ri.width()});
        });

    m.def("project", [](const FloatArray& points, const std::optional<LabelArray>& labels, int height, int width,
                        double fov_up_deg, double fov_down_deg) {
        const auto cfg = projection_config(height, width, fov_up_deg, fov_down_deg);
        cfg.validate();
        return spherical_project(cloud_from(points, labels), cfg);
    }, py::arg("points"), py::arg("labels") = py::none(), py::arg("height") = 64, py::arg("width") = 2048,
       py::arg("fov_up_deg") = 3.0, py::arg("fov_down_deg") = 25.0,
       "Spherical projection of an (N, 4) cloud; the closest point owns each pixel.");

    m.def("unproject_labels", [](const RangeImage& ri, const LabelArray& image_labels) {
        const auto v = unproject_labels(labels_span(image_labels), ri);
        return array_of(std::span<const Label>(v), {static_cast<py::ssize_t>(v.size())});
    }, py::arg("range_image"), py::arg("image_labels"));

    m.def("knn_postprocess", [](const RangeImage& ri, const LabelArray& image_labels, int k, int window,
                                double range_cutoff, double gaussian_sigma) {
        KnnConfig cfg{k, window, range_cutoff, gaussian_sigma};
        cfg.validate();
        if (static_cast<std::size_t>(image_labels.size()) != ri.num_pixels())
            throw py::value_error("image_labels must have one entry per pixel");
        const auto v = knn_postprocess(ri, labels_span(image_labels), cfg);
        return array_of(std::span<const Label>(v), {static_cast<py::ssize_t>(v.size())});
    }, py::arg("range_image"), py::arg("image_labels"), py::arg("k") = 5, py::arg("window") = 5,
       py::arg("range_cutoff") = 1.0, py::arg("gaussian_sigma") = 1.0);

    m.def("iou", [](const LabelArray& pred, const LabelArray& gt, int num_classes, Label ignore_id) {
        if (pred.size() != gt.size()) throw py::value_error("pred and gt differ in length");
        ConfusionMatrix cm(num_classes, ignore_id);
        cm.accumulate(labels_span(pred), labels_span(gt));
        return iou_dict(iou(cm));
    }, py::arg("pred"), py::arg("gt"), py::arg("num_classes"), py::arg("ignore_id") = 255);

    m.def("load_scan", [](const fs::path& path, const std::string& kind) {
        return points_of(load_scan(path, parse_dataset_kind(kind)));
    }, py::arg("path"), py::arg("kind") = "semantic_kitti");
    m.def("write_scan", [](const fs::path& path, const FloatArray& points) {
        write_scan(path, cloud_from(points, std::nullopt));
    }, py::arg("path"), py::arg("points"));
    m.def("load_labels", [](const fs::path& path, const std::string& kind, int toy_classes) {
        const auto v = load_labels(path, ClassConfig::by_name(kind, toy_classes));
        return array_of(std::span<const Label>(v), {static_cast<py::ssize_t>(v.size())});
    }, py::arg("path"), py::arg("kind") = "semantic_kitti", py::arg("toy_classes") = 4);
    m.def("write_labels", [](const fs::path& path, const LabelArray& labels, const std::string& kind, int toy_classes) {
        write_labels(path, labels_span(labels), ClassConfig::by_name(kind, toy_classes));
    }, py::arg("path"), py::arg("labels"), py::arg("kind") = "semantic_kitti", py::arg("toy_classes") = 4);

    py::class_<ToySceneConfig>(m, "ToySceneConfig")
        .def(py::init<>())
        .def_readwrite("beams", &ToySceneConfig::beams)
        .def_readwrite("azimuth_samples", &ToySceneConfig::azimuth_samples);
    m.def("make_toy_scan", [](int n_classes, std::uint64_t seed) {
        const auto pc = make_toy_scan(n_classes, seed);
        return py::make_tuple(points_of(pc), array_of(std::span<const Label>(*pc.labels),
                                                      {static_cast<py::ssize_t>(pc.size())}));
    }, py::arg("n_classes") = 4, py::arg("seed") = 0);
    m.def("make_toy_dataset", &make_toy_dataset, py::arg("root"), py::arg("n_scans"), py::arg("n_classes") = 4,
          py::arg("seed") = 7, py::arg("sequence") = "00", py::arg("first_index") = 0,
          py::arg("scene") = ToySceneConfig{});

    m.def("preset", [](const std::string& name) { return to_python(ExperimentConfig::preset(name).to_json()); },
          py::arg("name"), "Configuration preset (kitti, poss or toy) as a dict.");
    m.def("parameter_count", [](const py::object& config, bool training) {
        // Only the model section matters here.
        const auto model = build_model(config_of(config, false).model);
        return count_parameters(*model, training ? ParamScope::Train : ParamScope::Inference);
    }, py::arg("config"), py::arg("training") = false);

    m.def("train", [](const py::object& config, std::optional<int> stop_after) {
        const auto cfg = config_of(config);
        TrainOptions opt;
        opt.stop_after_epochs = stop_after;
        TrainResult r;
        {
            py::gil_scoped_release release;
            r = train(cfg, opt);
        }
        py::list history;
        for (const auto& e : r.history) {
            py::dict d;
            d["epoch"] = e.epoch;
            d["global_step"] = e.global_step;
            d["mean_total_loss"] = e.mean_total_loss;
            d["val_image_miou"] = e.val_image_miou;
            d["val_point_miou"] = e.val_point_miou;
            history.append(d);
        }
        py::dict out;
        out["last_checkpoint"] = r.last_checkpoint;
        out["best_checkpoint"] = r.best_checkpoint;
        out["epochs_completed"] = r.epochs_completed;
        out["train_params"] = r.train_params;
        out["inference_params"] = r.inference_params;
        out["history"] = history;
        return out;
    }, py::arg("config"), py::arg("stop_after") = py::none());

    m.def("evaluate", [](const py::object& config, const fs::path& checkpoint, const std::string& split, bool knn) {
        const auto cfg = config_of(config);
        EvalOptions opt;
        opt.split = split;
        opt.knn = knn;
        std::optional<MetricsRecord> r;
        {
            py::gil_scoped_release release;
            r.emplace(evaluate(cfg, checkpoint, opt));
        }
        py::dict out;
        out["scans"] = r->scans;
        out["image"] = iou_dict(r->image_iou);
        out["point"] = iou_dict(r->point_iou);
        return out;
    }, py::arg("config"), py::arg("checkpoint"), py::arg("split") = "val", py::arg("knn") = false);
}
