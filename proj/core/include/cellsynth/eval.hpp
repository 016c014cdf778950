#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "cellsynth/image.hpp"
#include "cellsynth/manifest.hpp"

namespace cellsynth {

/// Window-level counting backend. Predictions are real-valued and pass
/// through unclipped; rounding happens only in reports.
class Counter {
public:
    virtual ~Counter() = default;
    virtual double count(const GrayImage& window) const = 0;
};

struct BlobCounterConfig {
    int threshold = 90;   // just below the generator's default intensity floor
    int min_area = 10;    // components smaller than this are ignored
    int connectivity = 8; // 4 or 8

    void validate() const;
};

/// Connected components of {pixel > threshold} with area >= min_area.
double blob_count(const GrayImage& window, const BlobCounterConfig& config);

class BlobCounter final : public Counter {
public:
    explicit BlobCounter(BlobCounterConfig config = {}) : config_(config) { config_.validate(); }
    double count(const GrayImage& window) const override { return blob_count(window, config_); }

private:
    BlobCounterConfig config_;
};

class ZeroCounter final : public Counter {
public:
    double count(const GrayImage&) const override { return 0.0; }
};

/// Counts 255-valued pixels; feed it mask windows to get a perfect oracle.
class MaskPixelCounter final : public Counter {
public:
    double count(const GrayImage& window) const override;
};

/// Spawns `command <window.png>` per window and parses a decimal count from
/// its stdout. Plugs in any trained model without linking it.
class ExternalCommandCounter final : public Counter {
public:
    ExternalCommandCounter(std::string command, std::filesystem::path scratch_dir);
    double count(const GrayImage& window) const override;

private:
    std::string command_;
    std::filesystem::path scratch_dir_;
};

enum class EdgePolicy {
    drop_partial, // only full windows
    pad_zero,     // partial edge windows zero-filled to full size
};

EdgePolicy edge_policy_from_string(const std::string& s);
const char* to_string(EdgePolicy p);

struct TileWindow {
    int y0 = 0;
    int x0 = 0;
    GrayImage window;
};

/// Non-overlapping grid from the top-left. A window larger than the image
/// yields an empty list under drop_partial.
std::vector<TileWindow> tile(const GrayImage& image, int window_h, int window_w,
                             EdgePolicy policy);

/// Sum of counter.count over all tiles.
double predict_count(const GrayImage& image, const Counter& counter,
                     int window_h, int window_w, EdgePolicy policy);

double mae(const std::vector<double>& predictions, const std::vector<double>& ground_truth);
double rmse(const std::vector<double>& predictions, const std::vector<double>& ground_truth);

struct PerImageResult {
    std::string id;
    double prediction = 0.0;
    double ground_truth = 0.0;
};

struct EvalReport {
    std::vector<PerImageResult> per_image;
    double mae = 0.0;
    double rmse = 0.0;

    std::string to_json() const;
    std::string format_table() const;
};

struct EvalOptions {
    int window_h = 200;
    int window_w = 200;
    EdgePolicy policy = EdgePolicy::drop_partial;
    bool tile_masks = false; // true routes mask planes into the counter (oracle mode)
    int jobs = 1;
};

/// Per-image predictions via predict_count, aggregated into MAE/RMSE.
/// Missing files are reported together as one I/O error.
EvalReport evaluate(const Manifest& manifest, const Counter& counter,
                    const EvalOptions& options);

/// Draws per_bin records uniformly without replacement from every
/// [edges[i], edges[i+1]) cell-count bin, then splits each bin's draw with
/// floor(per_bin * train_fraction) records to train and the rest to val.
/// An under-populated bin is a data error naming the bin.
std::pair<Manifest, Manifest> stratified_split(const Manifest& manifest,
                                               const std::vector<int64_t>& bin_edges,
                                               int per_bin, double train_fraction,
                                               uint64_t seed);

} // namespace cellsynth
