#include "cellsynth/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "cellsynth/error.hpp"
#include "cellsynth/image.hpp"

namespace cellsynth {

using nlohmann::json;

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCategory::io, "cannot open manifest " + path.string());
    }
    Manifest m;
    m.dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(ErrorCategory::format,
                 path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ManifestRecord r;
        try {
            r.image_path = j.at("image_path").get<std::string>();
            if (j.contains("mask_path") && !j["mask_path"].is_null()) {
                r.mask_path = j["mask_path"].get<std::string>();
            }
            r.cell_count = j.at("cell_count").get<int64_t>();
            r.seed = j.at("seed").get<uint64_t>();
            if (j.contains("tags")) {
                r.tags = j["tags"].get<std::vector<std::string>>();
            }
        } catch (const json::exception& e) {
            fail(ErrorCategory::format,
                 path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (r.cell_count < 0) {
            fail(ErrorCategory::format, path.string() + ":" + std::to_string(line_no) +
                                            ": negative cell_count");
        }
        m.records.push_back(std::move(r));
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest,
                    bool verify_masks) {
    if (verify_masks) {
        for (const auto& r : manifest.records) {
            if (!r.mask_path) continue;
            const CenterMask mask = read_mask_png(manifest.mask_file(r));
            if (mask.count() != r.cell_count) {
                fail(ErrorCategory::data,
                     "manifest record " + r.image_path + ": cell_count " +
                         std::to_string(r.cell_count) + " != mask count " +
                         std::to_string(mask.count()));
            }
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        fail(ErrorCategory::io, "cannot write manifest " + path.string());
    }
    for (const auto& r : manifest.records) {
        json j;
        j["image_path"] = r.image_path;
        if (r.mask_path) j["mask_path"] = *r.mask_path;
        j["cell_count"] = r.cell_count;
        j["seed"] = r.seed;
        j["tags"] = r.tags;
        out << j.dump() << "\n";
    }
    if (!out) {
        fail(ErrorCategory::io, "failed writing manifest " + path.string());
    }
}

} // namespace cellsynth
