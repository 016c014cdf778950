#include "cellsynth/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <csetjmp>
#include <memory>

#include <png.h>

#include "cellsynth/error.hpp"

namespace cellsynth {

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::parameter: return "parameter";
        case ErrorCategory::shape: return "shape";
        case ErrorCategory::format: return "format";
        case ErrorCategory::data: return "data";
        case ErrorCategory::io: return "io";
        case ErrorCategory::backend: return "backend";
    }
    return "unknown";
}

int CenterMask::count() const {
    int n = 0;
    for (uint8_t v : data) {
        if (v == 255) ++n;
    }
    return n;
}

void Tensor3::require_finite(const char* what) const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            fail(ErrorCategory::backend, std::string(what) + ": non-finite tensor value");
        }
    }
}

Tensor3 to_real(const GrayImage& img) {
    Tensor3 t(1, img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i) {
        t.data[i] = static_cast<double>(img.data[i]) / 255.0;
    }
    return t;
}

GrayImage from_real(const Tensor3& t) {
    if (t.channels != 1) {
        fail(ErrorCategory::shape, "from_real expects a single-channel tensor, got C=" +
                                       std::to_string(t.channels));
    }
    GrayImage img(t.width, t.height);
    for (size_t i = 0; i < t.data.size(); ++i) {
        const double v = std::clamp(t.data[i], 0.0, 1.0);
        img.data[i] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
    return img;
}

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

GrayImage read_gray8_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) {
        fail(ErrorCategory::io, "cannot open " + path.string());
    }

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        fail(ErrorCategory::format, path.string() + " is not a PNG file");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCategory::io, "libpng initialization failed");
    }

    GrayImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCategory::format, "corrupt PNG: " + path.string());
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCategory::format,
             path.string() + ": expected 8-bit grayscale PNG (color_type=" +
                 std::to_string(color_type) + ", bit_depth=" + std::to_string(bit_depth) + ")");
    }

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.data.resize(static_cast<size_t>(img.width) * img.height);
    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = img.data.data() + static_cast<size_t>(y) * img.width;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_gray8_png(const std::filesystem::path& path, int width, int height,
                     const std::vector<uint8_t>& data) {
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) {
        fail(ErrorCategory::io, "cannot write " + path.string());
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCategory::io, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCategory::io, "PNG write failed: " + path.string());
    }

    png_init_io(png, file.get());
    // Fixed settings keep the emitted bytes identical across reruns.
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(data.data() + static_cast<size_t>(y) * width);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

GrayImage read_png(const std::filesystem::path& path) {
    return read_gray8_png(path);
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    write_gray8_png(path, img.width, img.height, img.data);
}

CenterMask read_mask_png(const std::filesystem::path& path) {
    GrayImage img = read_gray8_png(path);
    for (uint8_t v : img.data) {
        if (v != 0 && v != 255) {
            fail(ErrorCategory::format, path.string() + ": mask values must be 0 or 255");
        }
    }
    CenterMask mask;
    mask.width = img.width;
    mask.height = img.height;
    mask.data = std::move(img.data);
    return mask;
}

void write_mask_png(const std::filesystem::path& path, const CenterMask& mask) {
    write_gray8_png(path, mask.width, mask.height, mask.data);
}

} // namespace cellsynth
