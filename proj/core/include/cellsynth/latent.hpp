#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "cellsynth/image.hpp"
#include "cellsynth/schedule.hpp"

namespace cellsynth {

/// Learned d-dimensional conditioning vector (default d = 768).
struct StyleToken {
    std::vector<double> values;

    StyleToken() = default;
    explicit StyleToken(size_t d, double fill = 0.0) : values(d, fill) {}

    size_t dim() const { return values.size(); }
    bool operator==(const StyleToken&) const = default;
};

/// Noise-prediction backend. Implementations must return a tensor of the
/// input's shape with finite values and be safe for concurrent read-only use.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Tensor3 predict_noise(const Tensor3& z_t, int t, const StyleToken& token) const = 0;
};

/// Image <-> latent codec. The default (toy) codec maps H x W to 1 x H/8 x W/8.
class LatentCodec {
public:
    virtual ~LatentCodec() = default;
    virtual Tensor3 encode(const GrayImage& img) const = 0;
    virtual GrayImage decode(const Tensor3& z) const = 0;
};

/// Hook for backends that derive a conditioning token from a style image
/// directly (in place of token optimization). No default implementation.
class StyleEmbedder {
public:
    virtual ~StyleEmbedder() = default;
    virtual StyleToken embed(const GrayImage& style) const = 0;
};

struct StylizeParams {
    double strength = 0.7;   // gamma in [0,1]; fraction of the horizon to noise toward
    int sampling_steps = 50; // S
    StyleToken token;
    uint64_t noise_seed = 0;
};

struct ChannelStats {
    std::vector<double> mean; // per channel
    std::vector<double> std;  // population (1/N over spatial dims)
};

/// Per-channel mean and population standard deviation over spatial dims.
ChannelStats channel_stats(const Tensor3& z);

/// Re-normalizes content channels to the style's per-channel mean/std:
///   out = std(z_s) * (z_c - mean(z_c)) / std(z_c) + mean(z_s).
/// Channel counts must match; spatial dims may differ. A content channel with
/// std below eps_var is a degenerate-content error (constant latents would
/// otherwise blow up to +-inf).
Tensor3 adain(const Tensor3& z_content, const Tensor3& z_style, double eps_var = 1e-8);

/// t = round(gamma * T), clamped to [0, T].
int strength_to_timestep(double gamma, const NoiseSchedule& schedule);

/// z_t = sqrt(alpha_bar_t) * z + sqrt(1 - alpha_bar_t) * eps. t = 0 returns z.
Tensor3 forward_noise(const Tensor3& z_init, int t, const Tensor3& eps,
                      const NoiseSchedule& schedule);

/// Deterministic (eta = 0) DDIM decoding from timestep t down to 0 over an
/// evenly spaced sub-sequence of `sampling_steps` steps. Calls the denoiser
/// exactly `sampling_steps` times; t = 0 is the identity with zero calls.
Tensor3 ddim_decode(const Tensor3& z_t, int t, const StylizeParams& params,
                    const Denoiser& denoiser, const NoiseSchedule& schedule);

/// MSE between eps and the denoiser's prediction on forward_noise(z_0, t, eps).
double denoising_loss(const Denoiser& denoiser, const Tensor3& z_0, int t,
                      const Tensor3& eps, const StyleToken& token,
                      const NoiseSchedule& schedule);

/// Seeded standard-normal tensor; the noise source for stochastic inversion.
Tensor3 draw_noise(int channels, int height, int width, uint64_t seed);

/// Full stylization pipeline: encode both images, AdaIN-initialize, partially
/// noise to t = round(gamma*T), DDIM-decode conditioned on the token, decode.
GrayImage stylize(const GrayImage& content, const GrayImage& style,
                  const StylizeParams& params, const Denoiser& denoiser,
                  const LatentCodec& codec, const NoiseSchedule& schedule);

/// Same pipeline, but the denoiser is an oracle returning the exact noise the
/// stochastic inversion injected. Recovers the AdaIN-only result up to
/// quantization for any strength; used to validate decode wiring end to end.
GrayImage stylize_oracle(const GrayImage& content, const GrayImage& style,
                         const StylizeParams& params, const LatentCodec& codec,
                         const NoiseSchedule& schedule);

struct FitOptions {
    int steps = 1000;
    double step_size = 5e-4;
    double perturb_scale = 1e-2; // SPSA two-sided perturbation radius
    uint64_t seed = 0;
    StyleToken initial;          // fitting starts here; its dim fixes d
};

/// Fits a style token by minimizing the expected denoising loss over random
/// (latent, t, eps) draws with simultaneous-perturbation (SPSA) gradient
/// estimates. The denoiser stays a black box: only loss evaluations are used.
/// Returns the token with the lowest running-average loss along the way.
StyleToken fit_style_token(const Denoiser& denoiser,
                           const std::vector<Tensor3>& style_latents,
                           const NoiseSchedule& schedule, const FitOptions& options);

/// Token file format: uint32 dimension, then dim little-endian float64.
StyleToken read_token(const std::filesystem::path& path);
void write_token(const std::filesystem::path& path, const StyleToken& token);

} // namespace cellsynth
