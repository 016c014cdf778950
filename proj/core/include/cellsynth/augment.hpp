#pragma once

#include <cstdint>
#include <vector>

#include "cellsynth/image.hpp"
#include "cellsynth/manifest.hpp"
#include "cellsynth/rng.hpp"

namespace cellsynth {

struct CutMixConfig {
    double alpha = 1.0;       // Beta(alpha, alpha) concentration
    double probability = 0.5; // chance a pair is mixed at all

    void validate() const;
};

/// Half-open pixel box [y0, y1) x [x0, x1).
struct MixBox {
    int y0 = 0, x0 = 0, y1 = 0, x1 = 0;

    int area() const { return (y1 - y0) * (x1 - x0); }
    bool contains(int y, int x) const { return y >= y0 && y < y1 && x >= x0 && x < x1; }
    bool operator==(const MixBox&) const = default;
};

/// CutMix output. `count` is always the marked-pixel count of `mask` -- the
/// regression target comes from the mixed center mask, never from
/// lambda-weighted label interpolation.
struct MixedSample {
    GrayImage image;
    CenterMask mask;
    int count = 0;
    double lambda = 1.0; // realized area fraction kept from source A
    MixBox box;
    bool mixed = false;
};

/// Standard CutMix geometry: side lengths floor(W*sqrt(1-lambda_raw)) and
/// floor(H*sqrt(1-lambda_raw)) around a uniform center, clipped to bounds.
/// The realized lambda is recomputed from the clipped area.
std::pair<MixBox, double> sample_box(double lambda_raw, int height, int width, Rng& rng);
std::pair<MixBox, double> sample_box(double lambda_raw, int height, int width, uint64_t seed);

/// Pastes B's box region into A (image and mask alike) and recounts centers
/// from the mixed mask. Exposed so tests can pin exact box positions.
MixedSample apply_box_mix(const GrayImage& a_img, const CenterMask& a_mask,
                          const GrayImage& b_img, const CenterMask& b_mask,
                          const MixBox& box);

/// With probability config.probability: draw lambda_raw ~ Beta(alpha, alpha),
/// sample a box, mix B into A. Otherwise returns A unmodified (mixed=false).
MixedSample cutmix(const GrayImage& a_img, const CenterMask& a_mask,
                   const GrayImage& b_img, const CenterMask& b_mask,
                   const CutMixConfig& config, uint64_t seed);

struct DacsOptions {
    int per_domain = 8;    // images drawn from each pool per batch
    int crop = 200;        // square crop applied to both sources before mixing
    bool synthetic_as_base = false; // default pastes the synthetic box into real
    CutMixConfig cutmix;
};

/// Cross-domain batch mixing: samples per_domain records from each pool
/// (without replacement when the pool allows), crops a random square window
/// from every source, pairs real<->synthetic, and applies cutmix per pair.
/// Records must carry masks; counts are derived from the mixed masks.
std::vector<MixedSample> dacs_batch(const Manifest& real_pool, const Manifest& syn_pool,
                                    const DacsOptions& options, uint64_t seed);

} // namespace cellsynth
