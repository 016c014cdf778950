#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cellsynth {

/// One dataset entry. Paths are stored relative to the manifest's directory
/// so datasets stay relocatable.
struct ManifestRecord {
    std::string image_path;
    std::optional<std::string> mask_path;
    int64_t cell_count = 0;
    uint64_t seed = 0;
    std::vector<std::string> tags;

    bool operator==(const ManifestRecord&) const = default;
};

/// A JSONL manifest plus the directory its relative paths resolve against.
struct Manifest {
    std::filesystem::path dir;
    std::vector<ManifestRecord> records;

    std::filesystem::path image_file(const ManifestRecord& r) const { return dir / r.image_path; }
    std::filesystem::path mask_file(const ManifestRecord& r) const { return dir / *r.mask_path; }
};

Manifest read_manifest(const std::filesystem::path& path);

/// Writes one JSON object per line. When verify_masks is set (the default),
/// every record with a mask re-reads it and requires cell_count to equal the
/// mask's marked-pixel count.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest,
                    bool verify_masks = true);

} // namespace cellsynth
