#include "cellsynth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cellsynth/error.hpp"
#include "cellsynth/parallel.hpp"
#include "cellsynth/rng.hpp"

namespace cellsynth {

void GenConfig::validate() const {
    if (height < 1 || width < 1) {
        fail(ErrorCategory::config, "image size must be positive");
    }
    if (cell_size <= 0.0) {
        fail(ErrorCategory::config, "cell_size must be positive");
    }
    if (std::min(height, width) < static_cast<int>(cell_size)) {
        fail(ErrorCategory::config, "image too small to hold one cell (min dim " +
                                        std::to_string(std::min(height, width)) +
                                        " < cell_size " + std::to_string(cell_size) + ")");
    }
    if (count_clamp_min < 1 || count_clamp_min > count_clamp_max) {
        fail(ErrorCategory::config, "count clamp requires 1 <= min <= max");
    }
    if (count_std < 0.0) {
        fail(ErrorCategory::config, "count_std must be non-negative");
    }
    if (clusters_min < 1 || clusters_min > clusters_max) {
        fail(ErrorCategory::config, "cluster range requires 1 <= min <= max");
    }
    if (cluster_spread <= 0.0) {
        fail(ErrorCategory::config, "cluster_spread must be positive");
    }
    if (!(axis_jitter >= 0.0 && axis_jitter < 1.0)) {
        fail(ErrorCategory::config, "axis_jitter must lie in [0, 1)");
    }
    if (intensity_min < 0.0 || intensity_max > 255.0 || intensity_min > intensity_max) {
        fail(ErrorCategory::config, "intensity range must satisfy 0 <= min <= max <= 255");
    }
    if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0)) {
        fail(ErrorCategory::config, "overlap_threshold must lie in [0, 1]");
    }
    if (max_attempts_per_cluster < 0) {
        fail(ErrorCategory::config, "max_attempts_per_cluster must be >= 0 (0 = auto)");
    }
    if (contrast_min <= 0.0 || contrast_min > contrast_max) {
        fail(ErrorCategory::config, "contrast range requires 0 < min <= max");
    }
    if (brightness_min > brightness_max) {
        fail(ErrorCategory::config, "brightness range requires min <= max");
    }
    if (separation_margin < 0) {
        fail(ErrorCategory::config, "separation_margin must be >= 0");
    }
    if (background_std < 0.0) {
        fail(ErrorCategory::config, "background_std must be non-negative");
    }
}

std::vector<PixelCoord> rasterize_ellipse(const Ellipse& e, int height, int width) {
    std::vector<PixelCoord> covered;
    const double radius = std::max(e.semi_a, e.semi_b);
    const int y_lo = std::max(0, static_cast<int>(std::ceil(e.center_y - radius)));
    const int y_hi = std::min(height - 1, static_cast<int>(std::floor(e.center_y + radius)));
    const int x_lo = std::max(0, static_cast<int>(std::ceil(e.center_x - radius)));
    const int x_hi = std::min(width - 1, static_cast<int>(std::floor(e.center_x + radius)));
    if (y_lo > y_hi || x_lo > x_hi) return covered;

    const double cos_t = std::cos(e.angle);
    const double sin_t = std::sin(e.angle);
    const double inv_a2 = 1.0 / (e.semi_a * e.semi_a);
    const double inv_b2 = 1.0 / (e.semi_b * e.semi_b);
    for (int py = y_lo; py <= y_hi; ++py) {
        const double dy = py - e.center_y;
        for (int px = x_lo; px <= x_hi; ++px) {
            const double dx = px - e.center_x;
            const double u = dx * cos_t + dy * sin_t;
            const double v = -dx * sin_t + dy * cos_t;
            if (u * u * inv_a2 + v * v * inv_b2 <= 1.0) {
                covered.push_back({py, px});
            }
        }
    }
    return covered;
}

double overlap_fraction(const Ellipse& e, const std::vector<uint8_t>& occupancy,
                        int height, int width) {
    const std::vector<PixelCoord> covered = rasterize_ellipse(e, height, width);
    if (covered.empty()) return 0.0;
    size_t hits = 0;
    for (const PixelCoord& p : covered) {
        if (occupancy[static_cast<size_t>(p.y) * width + p.x]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(covered.size());
}

GrayImage apply_contrast_brightness(const GrayImage& img, double alpha, double beta) {
    if (!(alpha > 0.0)) {
        fail(ErrorCategory::parameter, "contrast alpha must be positive");
    }
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = alpha * static_cast<double>(img.data[i]) + beta;
        out.data[i] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    return out;
}

namespace {

void mark_occupied(std::vector<uint8_t>& occupancy, const std::vector<PixelCoord>& covered,
                   int margin, int height, int width) {
    if (margin == 0) {
        for (const PixelCoord& p : covered) {
            occupancy[static_cast<size_t>(p.y) * width + p.x] = 1;
        }
        return;
    }
    for (const PixelCoord& p : covered) {
        const int y_lo = std::max(0, p.y - margin);
        const int y_hi = std::min(height - 1, p.y + margin);
        const int x_lo = std::max(0, p.x - margin);
        const int x_hi = std::min(width - 1, p.x + margin);
        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                occupancy[static_cast<size_t>(y) * width + x] = 1;
            }
        }
    }
}

} // namespace

GenOutput generate(const GenConfig& config, uint64_t seed) {
    config.validate();
    const int H = config.height;
    const int W = config.width;
    Rng rng(seed);

    GenOutput out;
    out.image = GrayImage(W, H);
    out.mask = CenterMask(W, H);

    const int n_clusters = static_cast<int>(rng.uniform_int(config.clusters_min, config.clusters_max));
    const int64_t sampled = std::llround(rng.normal(config.count_mean, config.count_std));
    const int requested = static_cast<int>(
        std::clamp(sampled, config.count_clamp_min, config.count_clamp_max));
    out.requested_count = requested;

    // Float working plane: composite first, quantize once at the end.
    std::vector<double> plane(static_cast<size_t>(H) * W);
    for (double& v : plane) {
        v = rng.normal(config.background_mean, config.background_std);
    }

    out.clusters.reserve(n_clusters);
    for (int k = 0; k < n_clusters; ++k) {
        const double cy = rng.uniform(0.0, static_cast<double>(H));
        const double cx = rng.uniform(0.0, static_cast<double>(W));
        out.clusters.emplace_back(cy, cx);
    }

    // Even assignment; the first (n mod C) clusters take the remainder.
    out.assigned_per_cluster.resize(n_clusters);
    for (int k = 0; k < n_clusters; ++k) {
        out.assigned_per_cluster[k] = requested / n_clusters + (k < requested % n_clusters ? 1 : 0);
    }

    std::vector<uint8_t> occupancy(static_cast<size_t>(H) * W, 0);
    const double axis_lo = 0.5 * config.cell_size * (1.0 - config.axis_jitter);
    const double axis_hi = 0.5 * config.cell_size * (1.0 + config.axis_jitter);

    for (int k = 0; k < n_clusters; ++k) {
        const auto [cy, cx] = out.clusters[k];
        const int assigned = out.assigned_per_cluster[k];
        const int64_t max_attempts = config.max_attempts_per_cluster > 0
                                         ? config.max_attempts_per_cluster
                                         : 50ll * assigned;
        int placed = 0;
        int64_t attempts = 0;
        while (placed < assigned && attempts < max_attempts) {
            ++attempts;
            Ellipse e;
            e.semi_a = rng.uniform(axis_lo, axis_hi);
            e.semi_b = rng.uniform(axis_lo, axis_hi);
            e.angle = rng.uniform(0.0, std::numbers::pi);
            e.center_y = rng.normal(cy, config.cluster_spread);
            e.center_x = rng.normal(cx, config.cluster_spread);
            e.intensity = rng.uniform(config.intensity_min, config.intensity_max);

            // Out-of-bounds centers are resampled on the next attempt, never clipped.
            const int mask_y = static_cast<int>(std::lround(e.center_y));
            const int mask_x = static_cast<int>(std::lround(e.center_x));
            if (mask_y < 0 || mask_y >= H || mask_x < 0 || mask_x >= W) continue;
            // One mask pixel per cell keeps count() == placed_count exact.
            if (out.mask.at(mask_y, mask_x) == 255) continue;

            const std::vector<PixelCoord> covered = rasterize_ellipse(e, H, W);
            size_t hits = 0;
            for (const PixelCoord& p : covered) {
                if (occupancy[static_cast<size_t>(p.y) * W + p.x]) ++hits;
            }
            const double fraction =
                covered.empty() ? 0.0
                                : static_cast<double>(hits) / static_cast<double>(covered.size());
            // threshold 0 still admits strictly disjoint placements
            if (!(fraction == 0.0 || fraction < config.overlap_threshold)) continue;

            for (const PixelCoord& p : covered) {
                double& v = plane[static_cast<size_t>(p.y) * W + p.x];
                v = std::max(v, e.intensity);
            }
            mark_occupied(occupancy, covered, config.separation_margin, H, W);
            out.mask.at(mask_y, mask_x) = 255;
            out.accepted_overlaps.push_back(fraction);
            ++placed;
        }
        out.placed_count += placed;
    }

    const double alpha = rng.uniform(config.contrast_min, config.contrast_max);
    const double beta = rng.uniform(config.brightness_min, config.brightness_max);
    for (size_t i = 0; i < plane.size(); ++i) {
        const double v = alpha * plane[i] + beta;
        out.image.data[i] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    return out;
}

Manifest generate_dataset(const GenConfig& config, int n_images, uint64_t base_seed,
                          const std::filesystem::path& out_dir, int jobs) {
    config.validate();
    if (n_images < 0) {
        fail(ErrorCategory::parameter, "n_images must be >= 0");
    }
    std::filesystem::create_directories(out_dir);

    Manifest manifest;
    manifest.dir = out_dir;
    manifest.records.resize(n_images);

    parallel_for(n_images, jobs, [&](int64_t i) {
        const uint64_t seed = derive_seed(base_seed, static_cast<uint64_t>(i));
        const GenOutput gen = generate(config, seed);

        char image_name[32];
        char mask_name[32];
        std::snprintf(image_name, sizeof(image_name), "img_%06lld.png", static_cast<long long>(i));
        std::snprintf(mask_name, sizeof(mask_name), "msk_%06lld.png", static_cast<long long>(i));
        write_png(out_dir / image_name, gen.image);
        write_mask_png(out_dir / mask_name, gen.mask);

        ManifestRecord rec;
        rec.image_path = image_name;
        rec.mask_path = mask_name;
        rec.cell_count = gen.placed_count;
        rec.seed = seed;
        rec.tags = {gen.placed_count < 100   ? "density:low"
                    : gen.placed_count <= 200 ? "density:medium"
                                              : "density:high"};
        manifest.records[i] = std::move(rec);
    });

    write_manifest(out_dir / "manifest.jsonl", manifest);
    return manifest;
}

} // namespace cellsynth
