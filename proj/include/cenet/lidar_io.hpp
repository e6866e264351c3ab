#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cenet/class_config.hpp"
#include "cenet/point_cloud.hpp"

namespace cenet {

namespace fs = std::filesystem;

enum class DatasetKind { SemanticKitti, SemanticPoss, Toy };

DatasetKind parse_dataset_kind(const std::string& name);
std::string to_string(DatasetKind kind);

struct ScanLoadStats {
    std::size_t records = 0;
    std::size_t dropped_non_finite = 0;
};

/// Reads a scan of little-endian float32 (x, y, z, remission) records.
/// Rows with non-finite coordinates are dropped and counted in `stats`.
PointCloud load_scan(const fs::path& path, DatasetKind kind = DatasetKind::SemanticKitti,
                     ScanLoadStats* stats = nullptr);
void write_scan(const fs::path& path, const PointCloud& pc);

std::vector<std::uint32_t> load_raw_labels(const fs::path& path);
void write_raw_labels(const fs::path& path, std::span<const std::uint32_t> raw);

/// Semantic id = raw & 0xFFFF, remapped through `cfg`. When `expected_count`
/// is given the record count must match it.
std::vector<Label> load_labels(const fs::path& path, const ClassConfig& cfg,
                               std::optional<std::size_t> expected_count = std::nullopt);
std::vector<Label> remap_labels(std::span<const std::uint32_t> raw, const ClassConfig& cfg);

// Writes train ids back as raw dataset ids (instance bits zero).
void write_labels(const fs::path& path, std::span<const Label> labels, const ClassConfig& cfg);

struct SplitSpec {
    std::vector<std::string> train_sequences;
    std::vector<std::string> val_sequences;
    std::vector<std::string> test_sequences;

    void validate() const;
    const std::vector<std::string>& sequences(const std::string& split) const;

    static SplitSpec defaults(DatasetKind kind);
};

struct ScanEntry {
    std::string sequence;
    fs::path scan;
    fs::path label;  // may not exist (e.g. test sequences)
};

/// Enumerates <root>/sequences/<SS>/velodyne/*.bin in sequence order, files
/// sorted lexicographically.
std::vector<ScanEntry> list_scans(const fs::path& root, const std::vector<std::string>& sequences);

fs::path label_path_for(const fs::path& root, const std::string& sequence, const std::string& stem,
                        const std::string& subdir = "labels");

}  // namespace cenet
