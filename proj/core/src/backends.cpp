#include "cellsynth/backends.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cellsynth/error.hpp"

namespace cellsynth {

Tensor3 ToyCodec::encode(const GrayImage& img) const {
    if (img.height % kBlock != 0 || img.width % kBlock != 0) {
        fail(ErrorCategory::shape, "toy codec: image dims must be divisible by " +
                                       std::to_string(kBlock) + " (got " +
                                       std::to_string(img.height) + "x" +
                                       std::to_string(img.width) + ")");
    }
    const int lh = img.height / kBlock;
    const int lw = img.width / kBlock;
    Tensor3 z(1, lh, lw);
    for (int by = 0; by < lh; ++by) {
        for (int bx = 0; bx < lw; ++bx) {
            double sum = 0.0;
            for (int dy = 0; dy < kBlock; ++dy) {
                for (int dx = 0; dx < kBlock; ++dx) {
                    sum += static_cast<double>(img.at(by * kBlock + dy, bx * kBlock + dx)) / 255.0;
                }
            }
            z.at(0, by, bx) = sum / (kBlock * kBlock);
        }
    }
    return z;
}

GrayImage ToyCodec::decode(const Tensor3& z) const {
    if (z.channels != 1) {
        fail(ErrorCategory::shape, "toy codec: decode expects C=1");
    }
    Tensor3 full(1, z.height * kBlock, z.width * kBlock);
    for (int y = 0; y < full.height; ++y) {
        for (int x = 0; x < full.width; ++x) {
            full.at(0, y, x) = z.at(0, y / kBlock, x / kBlock);
        }
    }
    return from_real(full);
}

Tensor3 ToyDenoiser::predict_noise(const Tensor3& z_t, int /*t*/,
                                   const StyleToken& token) const {
    Tensor3 out(z_t.channels, z_t.height, z_t.width);
    if (token.dim() == 0) return out;
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = token.values[i % token.dim()];
    }
    return out;
}

Tensor3 OracleDenoiser::predict_noise(const Tensor3& z_t, int /*t*/,
                                      const StyleToken& /*token*/) const {
    if (!eps_.same_shape(z_t)) {
        fail(ErrorCategory::backend, "oracle denoiser: latent shape differs from its noise");
    }
    return eps_;
}

Tensor3 read_tensor(const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "tensor file I/O assumes a little-endian host");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCategory::io, "cannot open tensor file " + path.string());
    }
    uint32_t dims[3] = {0, 0, 0};
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || dims[0] == 0 || dims[1] == 0 || dims[2] == 0) {
        fail(ErrorCategory::format, "invalid tensor header: " + path.string());
    }
    const uint64_t n = static_cast<uint64_t>(dims[0]) * dims[1] * dims[2];
    if (n > (1u << 28)) {
        fail(ErrorCategory::format, "tensor too large: " + path.string());
    }
    Tensor3 t(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]));
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) {
        fail(ErrorCategory::format, "truncated tensor file: " + path.string());
    }
    return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
    static_assert(std::endian::native == std::endian::little,
                  "tensor file I/O assumes a little-endian host");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCategory::io, "cannot write tensor file " + path.string());
    }
    const uint32_t dims[3] = {static_cast<uint32_t>(t.channels),
                              static_cast<uint32_t>(t.height),
                              static_cast<uint32_t>(t.width)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!out) {
        fail(ErrorCategory::io, "failed writing tensor file " + path.string());
    }
}

ExternalDenoiser::ExternalDenoiser(std::string command, std::filesystem::path scratch_dir)
    : command_(std::move(command)), scratch_dir_(std::move(scratch_dir)) {
    std::filesystem::create_directories(scratch_dir_);
}

Tensor3 ExternalDenoiser::predict_noise(const Tensor3& z_t, int t,
                                        const StyleToken& token) const {
    static std::atomic<uint64_t> call_id{0};
    const uint64_t id = call_id.fetch_add(1);
    const auto stem = scratch_dir_ / ("denoise_" + std::to_string(id));
    const auto z_path = stem.string() + "_z.t3";
    const auto tok_path = stem.string() + "_token.tok";
    const auto out_path = stem.string() + "_eps.t3";

    write_tensor(z_path, z_t);
    write_token(tok_path, token.dim() > 0 ? token : StyleToken(1));

    const std::string cmd = command_ + " \"" + z_path + "\" " + std::to_string(t) + " \"" +
                            tok_path + "\" \"" + out_path + "\"";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
        fail(ErrorCategory::backend,
             "external denoiser exited with status " + std::to_string(rc));
    }
    Tensor3 eps = read_tensor(out_path);
    std::filesystem::remove(z_path);
    std::filesystem::remove(tok_path);
    std::filesystem::remove(out_path);
    if (!eps.same_shape(z_t)) {
        fail(ErrorCategory::backend, "external denoiser returned a mismatched shape");
    }
    eps.require_finite("external denoiser output");
    return eps;
}

DenoiserBackend denoiser_backend_from_string(const std::string& s) {
    if (s == "toy") return DenoiserBackend::toy;
    if (s == "oracle") return DenoiserBackend::oracle;
    if (s == "external") return DenoiserBackend::external;
    fail(ErrorCategory::parameter, "unknown denoiser backend '" + s + "'");
}

} // namespace cellsynth
