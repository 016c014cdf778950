#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cellsynth {

/// Single-channel 8-bit image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data; // size width*height

    GrayImage() = default;
    GrayImage(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Binary ground-truth plane: 255 marks one cell center, 0 elsewhere.
/// Always paired with a GrayImage of identical dimensions.
struct CenterMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    CenterMask() = default;
    CenterMask(int w, int h)
        : width(w), height(h), data(static_cast<size_t>(w) * h, 0) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

    /// Number of marked centers, i.e. the exact cell count.
    int count() const;

    bool operator==(const CenterMask&) const = default;
};

/// Dense C x H' x W' real-valued tensor, row-major within each channel.
/// Holds latents throughout the style-transfer math.
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data; // size channels*height*width

    Tensor3() = default;
    Tensor3(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w),
          data(static_cast<size_t>(c) * h * w, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    size_t size() const { return data.size(); }
    bool same_shape(const Tensor3& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }

    /// Throws a backend error if any element is NaN/Inf.
    void require_finite(const char* what) const;

    bool operator==(const Tensor3&) const = default;
};

/// Pixel -> [0,1] real plane (C=1). Exact inverse of from_real up to quantization.
Tensor3 to_real(const GrayImage& img);

/// [0,1] real plane -> pixels: clamp to [0,1], round to nearest of 0..255.
/// Requires C=1.
GrayImage from_real(const Tensor3& t);

/// 8-bit grayscale PNG I/O. Anything other than 8-bit grayscale is a format
/// error on read; writes are byte-deterministic for identical pixel data.
GrayImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& img);

CenterMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const CenterMask& mask);

} // namespace cellsynth
