#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "cellsynth/latent.hpp"

namespace cellsynth {

/// Blockwise-mean codec: encode averages each 8x8 block of to_real values
/// into one latent cell (C=1, H/8, W/8); decode upsamples blockwise-constant.
/// Image dims must be divisible by 8. Stands in for a learned autoencoder
/// while honoring its shape contract.
class ToyCodec final : public LatentCodec {
public:
    static constexpr int kBlock = 8;

    Tensor3 encode(const GrayImage& img) const override;
    GrayImage decode(const Tensor3& z) const override;
};

/// Predicts a tiling of the token over the tensor shape, ignoring z_t and t.
/// A constant prediction makes the DDIM recursion telescope exactly, so the
/// decoded latent is z_init plus a token-shaped texture scaled by the
/// injected-noise mismatch. A zero token predicts zero noise.
class ToyDenoiser final : public Denoiser {
public:
    Tensor3 predict_noise(const Tensor3& z_t, int t, const StyleToken& token) const override;
};

/// Returns a fixed tensor regardless of inputs. With the tensor set to the
/// exact noise used by forward_noise, DDIM decoding inverts the noising
/// algebraically; the round-trip tests and the `oracle` backend build on it.
class OracleDenoiser final : public Denoiser {
public:
    explicit OracleDenoiser(Tensor3 eps) : eps_(std::move(eps)) {}
    Tensor3 predict_noise(const Tensor3& z_t, int t, const StyleToken& token) const override;

private:
    Tensor3 eps_;
};

/// Spawns a command per prediction:
///   <command> <z_t.t3> <t> <token.tok> <out.t3>
/// Tensor files are little-endian: 3x uint32 (C, H', W') then C*H'*W' float64.
/// The token file uses the standard token format. Lets any external model
/// plug in without linking it.
class ExternalDenoiser final : public Denoiser {
public:
    explicit ExternalDenoiser(std::string command, std::filesystem::path scratch_dir);
    Tensor3 predict_noise(const Tensor3& z_t, int t, const StyleToken& token) const override;

private:
    std::string command_;
    std::filesystem::path scratch_dir_;
};

/// Raw tensor file I/O used by the external-denoiser protocol.
Tensor3 read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor3& t);

enum class DenoiserBackend { toy, oracle, external };
DenoiserBackend denoiser_backend_from_string(const std::string& s);

} // namespace cellsynth
