#include "cellsynth/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "cellsynth/error.hpp"
#include "cellsynth/parallel.hpp"
#include "cellsynth/rng.hpp"

namespace cellsynth {

void BlobCounterConfig::validate() const {
    if (threshold < 0 || threshold > 255) {
        fail(ErrorCategory::config, "blob threshold must lie in [0, 255]");
    }
    if (min_area < 1) {
        fail(ErrorCategory::config, "blob min_area must be >= 1");
    }
    if (connectivity != 4 && connectivity != 8) {
        fail(ErrorCategory::config, "blob connectivity must be 4 or 8");
    }
}

double blob_count(const GrayImage& window, const BlobCounterConfig& config) {
    config.validate();
    const int H = window.height;
    const int W = window.width;
    std::vector<uint8_t> fg(static_cast<size_t>(H) * W);
    for (size_t i = 0; i < fg.size(); ++i) {
        fg[i] = window.data[i] > config.threshold ? 1 : 0;
    }

    // Flood fill per seed pixel; an explicit stack keeps deep components safe.
    std::vector<int32_t> stack;
    int components = 0;
    for (int sy = 0; sy < H; ++sy) {
        for (int sx = 0; sx < W; ++sx) {
            if (!fg[static_cast<size_t>(sy) * W + sx]) continue;
            int area = 0;
            stack.push_back(sy * W + sx);
            fg[static_cast<size_t>(sy) * W + sx] = 0;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                ++area;
                const int y = p / W;
                const int x = p % W;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dy == 0 && dx == 0) continue;
                        if (config.connectivity == 4 && dy != 0 && dx != 0) continue;
                        const int ny = y + dy;
                        const int nx = x + dx;
                        if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
                        if (!fg[static_cast<size_t>(ny) * W + nx]) continue;
                        fg[static_cast<size_t>(ny) * W + nx] = 0;
                        stack.push_back(ny * W + nx);
                    }
                }
            }
            if (area >= config.min_area) ++components;
        }
    }
    return static_cast<double>(components);
}

double MaskPixelCounter::count(const GrayImage& window) const {
    int n = 0;
    for (uint8_t v : window.data) {
        if (v == 255) ++n;
    }
    return static_cast<double>(n);
}

ExternalCommandCounter::ExternalCommandCounter(std::string command,
                                               std::filesystem::path scratch_dir)
    : command_(std::move(command)), scratch_dir_(std::move(scratch_dir)) {
    std::filesystem::create_directories(scratch_dir_);
}

double ExternalCommandCounter::count(const GrayImage& window) const {
    static std::atomic<uint64_t> call_id{0};
    const uint64_t id = call_id.fetch_add(1);
    const auto png_path = scratch_dir_ / ("window_" + std::to_string(id) + ".png");
    const auto out_path = scratch_dir_ / ("count_" + std::to_string(id) + ".txt");
    write_png(png_path, window);

    const std::string cmd = command_ + " \"" + png_path.string() + "\" > \"" +
                            out_path.string() + "\"";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
        fail(ErrorCategory::backend,
             "external counter exited with status " + std::to_string(rc));
    }
    FILE* f = std::fopen(out_path.string().c_str(), "r");
    if (!f) {
        fail(ErrorCategory::backend, "external counter produced no output");
    }
    double value = 0.0;
    const int parsed = std::fscanf(f, "%lf", &value);
    std::fclose(f);
    std::filesystem::remove(png_path);
    std::filesystem::remove(out_path);
    if (parsed != 1 || !std::isfinite(value)) {
        fail(ErrorCategory::backend, "external counter output is not a decimal count");
    }
    return value;
}

EdgePolicy edge_policy_from_string(const std::string& s) {
    if (s == "drop_partial") return EdgePolicy::drop_partial;
    if (s == "pad_zero") return EdgePolicy::pad_zero;
    fail(ErrorCategory::parameter, "unknown edge policy '" + s + "'");
}

const char* to_string(EdgePolicy p) {
    return p == EdgePolicy::drop_partial ? "drop_partial" : "pad_zero";
}

std::vector<TileWindow> tile(const GrayImage& image, int window_h, int window_w,
                             EdgePolicy policy) {
    if (window_h < 1 || window_w < 1) {
        fail(ErrorCategory::parameter, "tile window must be at least 1x1");
    }
    std::vector<TileWindow> tiles;
    const bool pad = policy == EdgePolicy::pad_zero;
    for (int y0 = 0; y0 < image.height; y0 += window_h) {
        const int span_h = std::min(window_h, image.height - y0);
        if (!pad && span_h < window_h) break;
        for (int x0 = 0; x0 < image.width; x0 += window_w) {
            const int span_w = std::min(window_w, image.width - x0);
            if (!pad && span_w < window_w) break;
            TileWindow t;
            t.y0 = y0;
            t.x0 = x0;
            t.window = GrayImage(window_w, window_h);
            for (int y = 0; y < span_h; ++y) {
                for (int x = 0; x < span_w; ++x) {
                    t.window.at(y, x) = image.at(y0 + y, x0 + x);
                }
            }
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

double predict_count(const GrayImage& image, const Counter& counter,
                     int window_h, int window_w, EdgePolicy policy) {
    double total = 0.0;
    for (const TileWindow& t : tile(image, window_h, window_w, policy)) {
        total += counter.count(t.window);
    }
    return total;
}

namespace {

void require_paired(const std::vector<double>& predictions,
                    const std::vector<double>& ground_truth) {
    if (predictions.empty() || predictions.size() != ground_truth.size()) {
        fail(ErrorCategory::parameter,
             "metrics need equal-length, non-empty prediction/truth vectors");
    }
}

} // namespace

double mae(const std::vector<double>& predictions, const std::vector<double>& ground_truth) {
    require_paired(predictions, ground_truth);
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        sum += std::abs(predictions[i] - ground_truth[i]);
    }
    return sum / static_cast<double>(predictions.size());
}

double rmse(const std::vector<double>& predictions, const std::vector<double>& ground_truth) {
    require_paired(predictions, ground_truth);
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - ground_truth[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["per_image"] = nlohmann::json::array();
    for (const auto& r : per_image) {
        j["per_image"].push_back({{"id", r.id},
                                  {"prediction", r.prediction},
                                  {"prediction_rounded", std::llround(r.prediction)},
                                  {"ground_truth", r.ground_truth}});
    }
    j["mae"] = mae;
    j["rmse"] = rmse;
    return j.dump(2);
}

std::string EvalReport::format_table() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-40s %12s %8s %12s\n", "image", "prediction", "round",
                  "ground_truth");
    out << line;
    for (const auto& r : per_image) {
        std::snprintf(line, sizeof(line), "%-40s %12.3f %8lld %12.0f\n", r.id.c_str(),
                      r.prediction, static_cast<long long>(std::llround(r.prediction)),
                      r.ground_truth);
        out << line;
    }
    std::snprintf(line, sizeof(line), "MAE  %.6f\nRMSE %.6f\n", mae, rmse);
    out << line;
    return out.str();
}

EvalReport evaluate(const Manifest& manifest, const Counter& counter,
                    const EvalOptions& options) {
    // Surface every missing file at once instead of dying on the first.
    std::string missing;
    for (const auto& r : manifest.records) {
        const auto path = options.tile_masks && r.mask_path ? manifest.mask_file(r)
                                                            : manifest.image_file(r);
        if (options.tile_masks && !r.mask_path) {
            fail(ErrorCategory::data, "oracle evaluation needs a mask for " + r.image_path);
        }
        if (!std::filesystem::exists(path)) {
            missing += missing.empty() ? path.string() : (", " + path.string());
        }
    }
    if (!missing.empty()) {
        fail(ErrorCategory::io, "missing files: " + missing);
    }

    EvalReport report;
    report.per_image.resize(manifest.records.size());
    parallel_for(static_cast<int64_t>(manifest.records.size()), options.jobs, [&](int64_t i) {
        const auto& r = manifest.records[i];
        GrayImage plane;
        if (options.tile_masks) {
            const CenterMask mask = read_mask_png(manifest.mask_file(r));
            plane.width = mask.width;
            plane.height = mask.height;
            plane.data = mask.data;
        } else {
            plane = read_png(manifest.image_file(r));
        }
        PerImageResult res;
        res.id = r.image_path;
        res.prediction =
            predict_count(plane, counter, options.window_h, options.window_w, options.policy);
        res.ground_truth = static_cast<double>(r.cell_count);
        report.per_image[i] = std::move(res);
    });

    std::vector<double> preds, gts;
    preds.reserve(report.per_image.size());
    gts.reserve(report.per_image.size());
    for (const auto& r : report.per_image) {
        preds.push_back(r.prediction);
        gts.push_back(r.ground_truth);
    }
    report.mae = mae(preds, gts);
    report.rmse = rmse(preds, gts);
    return report;
}

std::pair<Manifest, Manifest> stratified_split(const Manifest& manifest,
                                               const std::vector<int64_t>& bin_edges,
                                               int per_bin, double train_fraction,
                                               uint64_t seed) {
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end())) {
        fail(ErrorCategory::parameter, "bin_edges must be a sorted list of at least two edges");
    }
    if (per_bin < 1) {
        fail(ErrorCategory::parameter, "per_bin must be >= 1");
    }
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
        fail(ErrorCategory::parameter, "train_fraction must lie in [0, 1]");
    }

    const size_t n_bins = bin_edges.size() - 1;
    std::vector<std::vector<size_t>> bins(n_bins);
    for (size_t i = 0; i < manifest.records.size(); ++i) {
        const int64_t c = manifest.records[i].cell_count;
        for (size_t b = 0; b < n_bins; ++b) {
            if (c >= bin_edges[b] && c < bin_edges[b + 1]) {
                bins[b].push_back(i);
                break;
            }
        }
    }

    Rng rng(seed);
    Manifest train, val;
    train.dir = manifest.dir;
    val.dir = manifest.dir;
    const int train_per_bin = static_cast<int>(std::floor(per_bin * train_fraction));
    for (size_t b = 0; b < n_bins; ++b) {
        if (bins[b].size() < static_cast<size_t>(per_bin)) {
            fail(ErrorCategory::data,
                 "bin [" + std::to_string(bin_edges[b]) + ", " + std::to_string(bin_edges[b + 1]) +
                     ") holds " + std::to_string(bins[b].size()) + " records, needs " +
                     std::to_string(per_bin));
        }
        // Partial Fisher-Yates: the first per_bin slots are the draw.
        std::vector<size_t>& pool = bins[b];
        for (int i = 0; i < per_bin; ++i) {
            const size_t j = static_cast<size_t>(rng.uniform_int(
                static_cast<int64_t>(i), static_cast<int64_t>(pool.size()) - 1));
            std::swap(pool[i], pool[j]);
        }
        for (int i = 0; i < per_bin; ++i) {
            const ManifestRecord& rec = manifest.records[pool[i]];
            (i < train_per_bin ? train : val).records.push_back(rec);
        }
    }
    return {train, val};
}

} // namespace cellsynth
