#include "cenet/lidar_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "cenet/error.hpp"

namespace cenet {

static_assert(std::endian::native == std::endian::little,
              "scan and label files are read with native little-endian layout");

namespace {

std::vector<char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<char> bytes(size);
    in.seekg(0);
    if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size)))
        throw IoError("cannot read '" + path.string() + "'");
    return bytes;
}

void write_bytes(const fs::path& path, const void* data, std::size_t size) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace

DatasetKind parse_dataset_kind(const std::string& name) {
    if (name == "semantic_kitti" || name == "kitti") return DatasetKind::SemanticKitti;
    if (name == "semantic_poss" || name == "poss") return DatasetKind::SemanticPoss;
    if (name == "toy") return DatasetKind::Toy;
    throw ConfigError("unknown dataset kind '" + name + "'");
}

std::string to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::SemanticKitti: return "semantic_kitti";
        case DatasetKind::SemanticPoss: return "semantic_poss";
        case DatasetKind::Toy: return "toy";
    }
    return "unknown";
}

PointCloud load_scan(const fs::path& path, DatasetKind /*kind*/, ScanLoadStats* stats) {
    const auto bytes = read_bytes(path);
    if (bytes.size() % 16 != 0)
        throw FormatError("scan '" + path.string() + "' has " + std::to_string(bytes.size()) +
                          " bytes, not a multiple of 16");
    const std::size_t n = bytes.size() / 16;
    std::vector<float> raw(n * 4);
    if (n > 0) std::memcpy(raw.data(), bytes.data(), bytes.size());

    PointCloud pc;
    pc.xyz.reserve(n);
    pc.remission.reserve(n);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const float* r = &raw[4 * i];
        if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2])) {
            ++dropped;
            continue;
        }
        pc.xyz.push_back({r[0], r[1], r[2]});
        pc.remission.push_back(r[3]);
    }
    if (stats) *stats = {n, dropped};
    return pc;
}

void write_scan(const fs::path& path, const PointCloud& pc) {
    std::vector<float> raw;
    raw.reserve(pc.size() * 4);
    for (std::size_t i = 0; i < pc.size(); ++i) {
        raw.push_back(pc.xyz[i].x);
        raw.push_back(pc.xyz[i].y);
        raw.push_back(pc.xyz[i].z);
        raw.push_back(pc.remission[i]);
    }
    write_bytes(path, raw.data(), raw.size() * sizeof(float));
}

std::vector<std::uint32_t> load_raw_labels(const fs::path& path) {
    const auto bytes = read_bytes(path);
    if (bytes.size() % 4 != 0)
        throw FormatError("label file '" + path.string() + "' is not a multiple of 4 bytes");
    std::vector<std::uint32_t> raw(bytes.size() / 4);
    if (!raw.empty()) std::memcpy(raw.data(), bytes.data(), bytes.size());
    return raw;
}

void write_raw_labels(const fs::path& path, std::span<const std::uint32_t> raw) {
    write_bytes(path, raw.data(), raw.size_bytes());
}

std::vector<Label> remap_labels(std::span<const std::uint32_t> raw, const ClassConfig& cfg) {
    std::vector<Label> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = cfg.to_train(raw[i] & 0xFFFFu);
    return out;
}

std::vector<Label> load_labels(const fs::path& path, const ClassConfig& cfg,
                               std::optional<std::size_t> expected_count) {
    const auto raw = load_raw_labels(path);
    if (expected_count && raw.size() != *expected_count)
        throw ConsistencyError("label file '" + path.string() + "' has " +
                               std::to_string(raw.size()) + " records, scan has " +
                               std::to_string(*expected_count) + " points");
    return remap_labels(raw, cfg);
}

void write_labels(const fs::path& path, std::span<const Label> labels, const ClassConfig& cfg) {
    std::vector<std::uint32_t> raw(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) raw[i] = cfg.to_raw(labels[i]);
    write_raw_labels(path, raw);
}

void SplitSpec::validate() const {
    std::set<std::string> seen;
    for (const auto* list : {&train_sequences, &val_sequences, &test_sequences}) {
        std::set<std::string> local(list->begin(), list->end());
        for (const auto& s : local)
            if (!seen.insert(s).second)
                throw ConfigError("split sequence '" + s + "' appears in more than one split");
    }
}

const std::vector<std::string>& SplitSpec::sequences(const std::string& split) const {
    if (split == "train") return train_sequences;
    if (split == "val" || split == "valid") return val_sequences;
    if (split == "test") return test_sequences;
    throw ConfigError("unknown split '" + split + "'");
}

SplitSpec SplitSpec::defaults(DatasetKind kind) {
    SplitSpec s;
    switch (kind) {
        case DatasetKind::SemanticKitti:
            s.train_sequences = {"00", "01", "02", "03", "04", "05", "06", "07", "09", "10"};
            s.val_sequences = {"08"};
            for (int i = 11; i <= 21; ++i) s.test_sequences.push_back(std::to_string(i));
            break;
        case DatasetKind::SemanticPoss:
            s.train_sequences = {"00", "01", "03", "04", "05"};
            s.test_sequences = {"02"};
            break;
        case DatasetKind::Toy:
            s.train_sequences = {"00"};
            s.val_sequences = {"01"};
            s.test_sequences = {"02"};
            break;
    }
    return s;
}

fs::path label_path_for(const fs::path& root, const std::string& sequence, const std::string& stem,
                        const std::string& subdir) {
    return root / "sequences" / sequence / subdir / (stem + ".label");
}

std::vector<ScanEntry> list_scans(const fs::path& root, const std::vector<std::string>& sequences) {
    std::vector<ScanEntry> out;
    for (const auto& seq : sequences) {
        const fs::path dir = root / "sequences" / seq / "velodyne";
        if (!fs::is_directory(dir)) continue;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (auto& f : files) {
            auto label = label_path_for(root, seq, f.stem().string());
            out.push_back({seq, std::move(f), std::move(label)});
        }
    }
    return out;
}

}  // namespace cenet
