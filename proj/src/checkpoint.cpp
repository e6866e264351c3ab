#include "cenet/checkpoint.hpp"

#include "cenet/error.hpp"

namespace cenet {

namespace {

constexpr const char* kMagic = "cenet-checkpoint";

Json meta_json(const CheckpointMeta& m) {
    return {{"format", kMagic},          {"version", m.version},
            {"config", Json::parse(m.config_echo)}, {"epoch", m.epoch},
            {"global_step", m.global_step}, {"best_miou", m.best_miou},
            {"norm_stats", m.stats.to_json()}, {"frequencies", m.frequencies}};
}

CheckpointMeta parse_meta(const std::string& text, const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception&) {
        throw FormatError("checkpoint '" + path.string() + "' has an unreadable header");
    }
    if (j.value("format", "") != kMagic) throw FormatError("'" + path.string() + "' is not a checkpoint");
    CheckpointMeta m;
    m.version = j.at("version").get<int>();
    if (m.version != kCheckpointVersion)
        throw FormatError("checkpoint version " + std::to_string(m.version) + " is not supported");
    m.config_echo = j.at("config").dump();
    m.epoch = j.at("epoch").get<int>();
    m.global_step = j.at("global_step").get<std::int64_t>();
    m.best_miou = j.at("best_miou").get<double>();
    m.stats = NormStats::from_json(j.at("norm_stats"));
    m.frequencies = j.at("frequencies").get<std::vector<double>>();
    return m;
}

}  // namespace

ExperimentConfig CheckpointMeta::config() const {
    return ExperimentConfig::from_json(Json::parse(config_echo), ExperimentConfig{});
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta, CENet& model,
                     torch::optim::Optimizer* optimizer) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    torch::serialize::OutputArchive archive;
    archive.write("meta", c10::IValue(meta_json(meta).dump()));
    torch::serialize::OutputArchive model_archive;
    model->save(model_archive);
    archive.write("model", model_archive);
    if (optimizer) {
        torch::serialize::OutputArchive opt_archive;
        optimizer->save(opt_archive);
        archive.write("optimizer", opt_archive);
    }
    // Write then rename so an interrupted save never leaves a torn file.
    const auto tmp = path.string() + ".tmp";
    archive.save_to(tmp);
    std::filesystem::rename(tmp, path);
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("checkpoint '" + path.string() + "' does not exist");
    torch::serialize::InputArchive archive;
    try {
        archive.load_from(path.string());
    } catch (const c10::Error&) {
        throw FormatError("'" + path.string() + "' is not a readable checkpoint");
    }
    c10::IValue meta;
    if (!archive.try_read("meta", meta) || !meta.isString())
        throw FormatError("'" + path.string() + "' has no checkpoint header");
    return parse_meta(meta.toStringRef(), path);
}

CheckpointMeta load_checkpoint(const std::filesystem::path& path, CENet& model, torch::optim::Optimizer* optimizer) {
    auto meta = read_checkpoint_meta(path);
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    torch::serialize::InputArchive model_archive;
    archive.read("model", model_archive);
    model->load(model_archive);
    if (optimizer) {
        torch::serialize::InputArchive opt_archive;
        if (!archive.try_read("optimizer", opt_archive))
            throw FormatError("checkpoint '" + path.string() + "' carries no optimizer state");
        optimizer->load(opt_archive);
    }
    return meta;
}

}  // namespace cenet
