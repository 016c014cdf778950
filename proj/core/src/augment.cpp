#include "cellsynth/augment.hpp"

#include <algorithm>
#include <cmath>

#include "cellsynth/error.hpp"

namespace cellsynth {

void CutMixConfig::validate() const {
    if (!(alpha > 0.0)) {
        fail(ErrorCategory::config, "cutmix alpha must be positive");
    }
    if (!(probability >= 0.0 && probability <= 1.0)) {
        fail(ErrorCategory::config, "cutmix probability must lie in [0, 1]");
    }
}

std::pair<MixBox, double> sample_box(double lambda_raw, int height, int width, Rng& rng) {
    if (height < 1 || width < 1) {
        fail(ErrorCategory::parameter, "sample_box needs positive dimensions");
    }
    const double cut_ratio = std::sqrt(std::clamp(1.0 - lambda_raw, 0.0, 1.0));
    const int cut_h = static_cast<int>(std::floor(height * cut_ratio));
    const int cut_w = static_cast<int>(std::floor(width * cut_ratio));
    const int cy = static_cast<int>(rng.uniform_int(0, height - 1));
    const int cx = static_cast<int>(rng.uniform_int(0, width - 1));

    MixBox box;
    box.y0 = std::max(0, cy - cut_h / 2);
    box.y1 = std::min(height, cy - cut_h / 2 + cut_h);
    box.x0 = std::max(0, cx - cut_w / 2);
    box.x1 = std::min(width, cx - cut_w / 2 + cut_w);
    if (box.y1 < box.y0) box.y1 = box.y0;
    if (box.x1 < box.x0) box.x1 = box.x0;

    const double realized =
        1.0 - static_cast<double>(box.area()) / (static_cast<double>(height) * width);
    return {box, realized};
}

std::pair<MixBox, double> sample_box(double lambda_raw, int height, int width, uint64_t seed) {
    Rng rng(seed);
    return sample_box(lambda_raw, height, width, rng);
}

MixedSample apply_box_mix(const GrayImage& a_img, const CenterMask& a_mask,
                          const GrayImage& b_img, const CenterMask& b_mask,
                          const MixBox& box) {
    const int H = a_img.height;
    const int W = a_img.width;
    if (a_mask.height != H || a_mask.width != W || b_img.height != H || b_img.width != W ||
        b_mask.height != H || b_mask.width != W) {
        fail(ErrorCategory::shape, "cutmix inputs must share dimensions");
    }
    MixedSample sample;
    sample.image = a_img;
    sample.mask = a_mask;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            sample.image.at(y, x) = b_img.at(y, x);
            sample.mask.at(y, x) = b_mask.at(y, x);
        }
    }
    sample.count = sample.mask.count();
    sample.lambda = 1.0 - static_cast<double>(box.area()) / (static_cast<double>(H) * W);
    sample.box = box;
    sample.mixed = true;
    return sample;
}

MixedSample cutmix(const GrayImage& a_img, const CenterMask& a_mask,
                   const GrayImage& b_img, const CenterMask& b_mask,
                   const CutMixConfig& config, uint64_t seed) {
    config.validate();
    const int H = a_img.height;
    const int W = a_img.width;
    if (a_mask.height != H || a_mask.width != W || b_img.height != H || b_img.width != W ||
        b_mask.height != H || b_mask.width != W) {
        fail(ErrorCategory::shape, "cutmix inputs must share dimensions");
    }

    Rng rng(seed);
    if (!(rng.next_double() < config.probability)) {
        MixedSample sample;
        sample.image = a_img;
        sample.mask = a_mask;
        sample.count = a_mask.count();
        sample.lambda = 1.0;
        sample.box = MixBox{};
        sample.mixed = false;
        return sample;
    }

    const double lambda_raw = rng.beta(config.alpha, config.alpha);
    const auto [box, realized] = sample_box(lambda_raw, H, W, rng);
    MixedSample sample = apply_box_mix(a_img, a_mask, b_img, b_mask, box);
    sample.lambda = realized;
    return sample;
}

namespace {

struct LoadedPair {
    GrayImage image;
    CenterMask mask;
};

LoadedPair load_pair(const Manifest& pool, const ManifestRecord& rec) {
    if (!rec.mask_path) {
        fail(ErrorCategory::data,
             "dacs_batch: record " + rec.image_path + " has no center mask");
    }
    LoadedPair p;
    p.image = read_png(pool.image_file(rec));
    p.mask = read_mask_png(pool.mask_file(rec));
    return p;
}

LoadedPair crop_pair(const LoadedPair& src, int crop, Rng& rng) {
    const int H = src.image.height;
    const int W = src.image.width;
    const int side = std::min({crop, H, W});
    const int y0 = H == side ? 0 : static_cast<int>(rng.uniform_int(0, H - side));
    const int x0 = W == side ? 0 : static_cast<int>(rng.uniform_int(0, W - side));
    LoadedPair out;
    out.image = GrayImage(side, side);
    out.mask = CenterMask(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            out.image.at(y, x) = src.image.at(y0 + y, x0 + x);
            out.mask.at(y, x) = src.mask.at(y0 + y, x0 + x);
        }
    }
    return out;
}

// First per_domain entries of a seeded partial shuffle; falls back to
// with-replacement draws when the pool is smaller than the request.
std::vector<size_t> sample_indices(size_t pool_size, int wanted, Rng& rng) {
    std::vector<size_t> picked;
    picked.reserve(wanted);
    if (pool_size >= static_cast<size_t>(wanted)) {
        std::vector<size_t> idx(pool_size);
        for (size_t i = 0; i < pool_size; ++i) idx[i] = i;
        for (int i = 0; i < wanted; ++i) {
            const size_t j = static_cast<size_t>(
                rng.uniform_int(static_cast<int64_t>(i), static_cast<int64_t>(pool_size) - 1));
            std::swap(idx[i], idx[j]);
            picked.push_back(idx[i]);
        }
    } else {
        for (int i = 0; i < wanted; ++i) {
            picked.push_back(static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(pool_size) - 1)));
        }
    }
    return picked;
}

} // namespace

std::vector<MixedSample> dacs_batch(const Manifest& real_pool, const Manifest& syn_pool,
                                    const DacsOptions& options, uint64_t seed) {
    options.cutmix.validate();
    if (options.per_domain < 1) {
        fail(ErrorCategory::parameter, "dacs_batch: per_domain must be >= 1");
    }
    if (options.crop < 1) {
        fail(ErrorCategory::parameter, "dacs_batch: crop must be >= 1");
    }
    if (real_pool.records.empty()) {
        fail(ErrorCategory::data, "dacs_batch: real pool is empty");
    }
    if (syn_pool.records.empty()) {
        fail(ErrorCategory::data, "dacs_batch: synthetic pool is empty");
    }

    Rng rng(seed);
    const std::vector<size_t> real_idx =
        sample_indices(real_pool.records.size(), options.per_domain, rng);
    const std::vector<size_t> syn_idx =
        sample_indices(syn_pool.records.size(), options.per_domain, rng);

    std::vector<MixedSample> batch;
    batch.reserve(options.per_domain);
    for (int i = 0; i < options.per_domain; ++i) {
        const LoadedPair real_full = load_pair(real_pool, real_pool.records[real_idx[i]]);
        const LoadedPair syn_full = load_pair(syn_pool, syn_pool.records[syn_idx[i]]);
        const int side = std::min({options.crop, real_full.image.height, real_full.image.width,
                                   syn_full.image.height, syn_full.image.width});
        LoadedPair real_crop = crop_pair(real_full, side, rng);
        LoadedPair syn_crop = crop_pair(syn_full, side, rng);

        const LoadedPair& base = options.synthetic_as_base ? syn_crop : real_crop;
        const LoadedPair& patch = options.synthetic_as_base ? real_crop : syn_crop;
        const uint64_t pair_seed = rng.next_u64();
        batch.push_back(cutmix(base.image, base.mask, patch.image, patch.mask,
                               options.cutmix, pair_seed));
    }
    return batch;
}

} // namespace cellsynth
