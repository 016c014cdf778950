#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "cellsynth/image.hpp"
#include "cellsynth/manifest.hpp"

namespace cellsynth {

/// Parameters for clustered-cell image generation. Defaults reproduce the
/// 256x256 DAPI-like regime: counts ~ N(120, 90) clamped to [1, 1500],
/// 3..7 cluster centers, ~15-pixel cells at intensities U[100, 200], with at
/// most 10% of a new cell's area allowed to overlap already-placed cells.
struct GenConfig {
    int height = 256;
    int width = 256;
    double count_mean = 120.0;
    double count_std = 90.0;
    int64_t count_clamp_min = 1;
    int64_t count_clamp_max = 1500;
    int clusters_min = 3;
    int clusters_max = 7;
    double cluster_spread = 24.0;   // std (pixels) of cell positions around a cluster center
    double cell_size = 15.0;        // typical cell extent (full axis) in pixels
    double axis_jitter = 0.3;       // semi-axes ~ U(cell_size/2*(1-j), cell_size/2*(1+j))
    double intensity_min = 100.0;
    double intensity_max = 200.0;
    double overlap_threshold = 0.10; // accept when overlap fraction < threshold (0 = disjoint only)
    int64_t max_attempts_per_cluster = 0; // 0 = auto: 50x the cluster's assigned cells
    double contrast_min = 0.8;
    double contrast_max = 1.2;
    double brightness_min = -20.0;
    double brightness_max = 20.0;
    int separation_margin = 0;      // occupancy dilation (pixels); >0 guarantees blob-separable cells
    double background_mean = 20.0;
    double background_std = 10.0;

    /// Throws a config error when any invariant is violated.
    void validate() const;
};

struct Ellipse {
    double center_y = 0.0;
    double center_x = 0.0;
    double semi_a = 1.0; // along the rotated x axis
    double semi_b = 1.0; // along the rotated y axis
    double angle = 0.0;  // radians in [0, pi)
    double intensity = 0.0;
};

struct PixelCoord {
    int y = 0;
    int x = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct GenOutput {
    GrayImage image;
    CenterMask mask;
    std::vector<std::pair<double, double>> clusters; // (y, x) cluster centers
    int placed_count = 0;
    int requested_count = 0;

    // Placement trace: overlap fraction of each accepted ellipse against the
    // occupancy state at acceptance time, and the per-cluster assignment.
    std::vector<double> accepted_overlaps;
    std::vector<int> assigned_per_cluster;
};

/// Pixels whose centers satisfy the rotated-ellipse inequality
///   ((dx cos + dy sin)/a)^2 + ((-dx sin + dy cos)/b)^2 <= 1,
/// clipped to the image bounds, in row-major order. Pixel (y, x) has its
/// center at real coordinates (y, x).
std::vector<PixelCoord> rasterize_ellipse(const Ellipse& e, int height, int width);

/// |covered(e) & occupied| / |covered(e)|; 0 when covered(e) is empty.
/// `occupancy` is a row-major height x width grid.
double overlap_fraction(const Ellipse& e, const std::vector<uint8_t>& occupancy,
                        int height, int width);

/// out = clip(round(alpha * in + beta), 0, 255); alpha must be positive.
GrayImage apply_contrast_brightness(const GrayImage& img, double alpha, double beta);

/// Clustered-cell generation: deterministic for a given (config, seed).
/// Every marked mask pixel corresponds to exactly one placed cell.
GenOutput generate(const GenConfig& config, uint64_t seed);

/// Runs `n_images` independent generations (seed derived per index from
/// base_seed), writes image/mask PNGs plus a JSONL manifest into out_dir.
/// Deterministic end to end; `jobs` only affects wall time.
Manifest generate_dataset(const GenConfig& config, int n_images, uint64_t base_seed,
                          const std::filesystem::path& out_dir, int jobs = 1);

} // namespace cellsynth
