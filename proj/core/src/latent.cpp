#include "cellsynth/latent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>

#include "cellsynth/backends.hpp"
#include "cellsynth/error.hpp"
#include "cellsynth/rng.hpp"

namespace cellsynth {

ChannelStats channel_stats(const Tensor3& z) {
    if (z.height < 1 || z.width < 1) {
        fail(ErrorCategory::shape, "channel_stats needs at least one spatial element");
    }
    const size_t spatial = static_cast<size_t>(z.height) * z.width;
    ChannelStats stats;
    stats.mean.resize(z.channels);
    stats.std.resize(z.channels);
    for (int c = 0; c < z.channels; ++c) {
        const double* p = z.data.data() + c * spatial;
        double sum = 0.0;
        for (size_t i = 0; i < spatial; ++i) sum += p[i];
        const double mean = sum / static_cast<double>(spatial);
        double sq = 0.0;
        for (size_t i = 0; i < spatial; ++i) {
            const double d = p[i] - mean;
            sq += d * d;
        }
        stats.mean[c] = mean;
        stats.std[c] = std::sqrt(sq / static_cast<double>(spatial));
    }
    return stats;
}

Tensor3 adain(const Tensor3& z_content, const Tensor3& z_style, double eps_var) {
    if (z_content.channels != z_style.channels) {
        fail(ErrorCategory::shape, "adain: channel counts differ (" +
                                       std::to_string(z_content.channels) + " vs " +
                                       std::to_string(z_style.channels) + ")");
    }
    const ChannelStats cs = channel_stats(z_content);
    const ChannelStats ss = channel_stats(z_style);
    for (int c = 0; c < z_content.channels; ++c) {
        if (cs.std[c] < eps_var) {
            fail(ErrorCategory::data, "adain: content channel " + std::to_string(c) +
                                          " is (near-)constant; cannot normalize");
        }
    }
    Tensor3 out(z_content.channels, z_content.height, z_content.width);
    const size_t spatial = static_cast<size_t>(z_content.height) * z_content.width;
    for (int c = 0; c < z_content.channels; ++c) {
        const double scale = ss.std[c] / cs.std[c];
        const double shift = ss.mean[c] - cs.mean[c] * scale;
        const double* in = z_content.data.data() + c * spatial;
        double* dst = out.data.data() + c * spatial;
        for (size_t i = 0; i < spatial; ++i) {
            dst[i] = in[i] * scale + shift;
        }
    }
    return out;
}

int strength_to_timestep(double gamma, const NoiseSchedule& schedule) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        fail(ErrorCategory::parameter, "strength must lie in [0, 1]");
    }
    const int T = schedule.total_steps();
    const int t = static_cast<int>(std::lround(gamma * T));
    return std::clamp(t, 0, T);
}

Tensor3 forward_noise(const Tensor3& z_init, int t, const Tensor3& eps,
                      const NoiseSchedule& schedule) {
    if (!z_init.same_shape(eps)) {
        fail(ErrorCategory::shape, "forward_noise: noise shape differs from latent shape");
    }
    if (t < 0 || t > schedule.total_steps()) {
        fail(ErrorCategory::parameter, "forward_noise: timestep out of [0, T]");
    }
    if (t == 0) return z_init;
    const double ab = schedule.alpha_bar(t);
    const double signal = std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    Tensor3 out(z_init.channels, z_init.height, z_init.width);
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = signal * z_init.data[i] + noise * eps.data[i];
    }
    return out;
}

namespace {

// tau_i = round(i*t/S) with ties broken downward; strictly increasing
// because S <= t keeps the spacing at least 1.
std::vector<int> ddim_timesteps(int t, int steps) {
    std::vector<int> tau(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const double x = static_cast<double>(i) * t / steps;
        tau[i] = static_cast<int>(std::ceil(x - 0.5));
    }
    tau.erase(std::unique(tau.begin(), tau.end()), tau.end());
    return tau;
}

} // namespace

Tensor3 ddim_decode(const Tensor3& z_t, int t, const StylizeParams& params,
                    const Denoiser& denoiser, const NoiseSchedule& schedule) {
    if (t == 0) return z_t;
    if (t < 0 || t > schedule.total_steps()) {
        fail(ErrorCategory::parameter, "ddim_decode: timestep out of [0, T]");
    }
    const int steps = params.sampling_steps;
    if (steps < 1 || steps > t) {
        fail(ErrorCategory::parameter, "ddim_decode: need 1 <= sampling_steps <= t (got steps=" +
                                           std::to_string(steps) + ", t=" + std::to_string(t) + ")");
    }

    const std::vector<int> tau = ddim_timesteps(t, steps);
    Tensor3 z = z_t;
    for (size_t i = tau.size() - 1; i > 0; --i) {
        const int cur = tau[i];
        const int prev = tau[i - 1];
        const Tensor3 eps_hat = denoiser.predict_noise(z, cur, params.token);
        if (!eps_hat.same_shape(z)) {
            fail(ErrorCategory::backend, "denoiser returned a tensor of different shape");
        }
        eps_hat.require_finite("denoiser output");

        const double ab_cur = schedule.alpha_bar(cur);
        const double ab_prev = schedule.alpha_bar(prev);
        const double sqrt_ab_cur = std::sqrt(ab_cur);
        const double sqrt_1m_cur = std::sqrt(1.0 - ab_cur);
        const double sqrt_ab_prev = std::sqrt(ab_prev);
        const double sqrt_1m_prev = std::sqrt(1.0 - ab_prev);
        // z0_hat = (z - sqrt(1-ab)*eps)/sqrt(ab); step to prev with eta = 0.
        for (size_t k = 0; k < z.data.size(); ++k) {
            const double z0_hat = (z.data[k] - sqrt_1m_cur * eps_hat.data[k]) / sqrt_ab_cur;
            z.data[k] = sqrt_ab_prev * z0_hat + sqrt_1m_prev * eps_hat.data[k];
        }
    }
    return z;
}

double denoising_loss(const Denoiser& denoiser, const Tensor3& z_0, int t,
                      const Tensor3& eps, const StyleToken& token,
                      const NoiseSchedule& schedule) {
    const Tensor3 z_t = forward_noise(z_0, t, eps, schedule);
    const Tensor3 eps_hat = denoiser.predict_noise(z_t, t, token);
    if (!eps_hat.same_shape(eps)) {
        fail(ErrorCategory::backend, "denoiser returned a tensor of different shape");
    }
    double sum = 0.0;
    for (size_t i = 0; i < eps.data.size(); ++i) {
        const double d = eps_hat.data[i] - eps.data[i];
        sum += d * d;
    }
    return sum / static_cast<double>(eps.data.size());
}

Tensor3 draw_noise(int channels, int height, int width, uint64_t seed) {
    Tensor3 eps(channels, height, width);
    Rng rng(seed);
    for (double& v : eps.data) v = rng.normal();
    return eps;
}

namespace {

GrayImage stylize_impl(const GrayImage& content, const GrayImage& style,
                       const StylizeParams& params, const LatentCodec& codec,
                       const NoiseSchedule& schedule,
                       const std::function<const Denoiser*(const Tensor3&)>& pick_denoiser) {
    const Tensor3 z_content = codec.encode(content);
    const Tensor3 z_style = codec.encode(style);
    const Tensor3 z_init = adain(z_content, z_style);
    const int t = strength_to_timestep(params.strength, schedule);
    if (t == 0) return codec.decode(z_init);

    const Tensor3 eps = draw_noise(z_init.channels, z_init.height, z_init.width,
                                   params.noise_seed);
    const Tensor3 z_t = forward_noise(z_init, t, eps, schedule);
    const Denoiser* denoiser = pick_denoiser(eps);
    const Tensor3 z_hat = ddim_decode(z_t, t, params, *denoiser, schedule);
    return codec.decode(z_hat);
}

} // namespace

GrayImage stylize(const GrayImage& content, const GrayImage& style,
                  const StylizeParams& params, const Denoiser& denoiser,
                  const LatentCodec& codec, const NoiseSchedule& schedule) {
    return stylize_impl(content, style, params, codec, schedule,
                        [&](const Tensor3&) { return &denoiser; });
}

GrayImage stylize_oracle(const GrayImage& content, const GrayImage& style,
                         const StylizeParams& params, const LatentCodec& codec,
                         const NoiseSchedule& schedule) {
    std::unique_ptr<OracleDenoiser> oracle;
    return stylize_impl(content, style, params, codec, schedule,
                        [&](const Tensor3& eps) -> const Denoiser* {
                            oracle = std::make_unique<OracleDenoiser>(eps);
                            return oracle.get();
                        });
}

StyleToken fit_style_token(const Denoiser& denoiser,
                           const std::vector<Tensor3>& style_latents,
                           const NoiseSchedule& schedule, const FitOptions& options) {
    if (options.steps < 1) {
        fail(ErrorCategory::parameter, "fit_style_token: steps must be >= 1");
    }
    if (style_latents.empty()) {
        fail(ErrorCategory::data, "fit_style_token: no style latents");
    }
    if (options.initial.dim() == 0) {
        fail(ErrorCategory::parameter, "fit_style_token: initial token must have dimension > 0");
    }
    const size_t d = options.initial.dim();
    const double c = options.perturb_scale;
    const int T = schedule.total_steps();

    Rng rng(options.seed);
    StyleToken token = options.initial;
    StyleToken best = token;
    double running_avg = 0.0;
    double best_avg = 0.0;
    std::vector<double> delta(d);

    for (int step = 0; step < options.steps; ++step) {
        const auto& z0 = style_latents[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(style_latents.size()) - 1))];
        const int t = static_cast<int>(rng.uniform_int(1, T));
        const Tensor3 eps = [&] {
            Tensor3 e(z0.channels, z0.height, z0.width);
            for (double& v : e.data) v = rng.normal();
            return e;
        }();

        for (size_t j = 0; j < d; ++j) {
            delta[j] = rng.next_double() < 0.5 ? -1.0 : 1.0;
        }
        StyleToken plus = token, minus = token;
        for (size_t j = 0; j < d; ++j) {
            plus.values[j] += c * delta[j];
            minus.values[j] -= c * delta[j];
        }
        const double loss_plus = denoising_loss(denoiser, z0, t, eps, plus, schedule);
        const double loss_minus = denoising_loss(denoiser, z0, t, eps, minus, schedule);
        const double directional = (loss_plus - loss_minus) / (2.0 * c);
        for (size_t j = 0; j < d; ++j) {
            token.values[j] -= options.step_size * directional * delta[j];
        }

        const double midpoint = 0.5 * (loss_plus + loss_minus);
        running_avg = step == 0 ? midpoint : 0.9 * running_avg + 0.1 * midpoint;
        if (step == 0 || running_avg <= best_avg) {
            best_avg = running_avg;
            best = token;
        }
    }
    return best;
}

StyleToken read_token(const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "token file I/O assumes a little-endian host");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCategory::io, "cannot open token file " + path.string());
    }
    uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (!in || dim == 0 || dim > (1u << 24)) {
        fail(ErrorCategory::format, "invalid token file header: " + path.string());
    }
    StyleToken token(dim);
    in.read(reinterpret_cast<char*>(token.values.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in) {
        fail(ErrorCategory::format, "truncated token file: " + path.string());
    }
    for (double v : token.values) {
        if (!std::isfinite(v)) {
            fail(ErrorCategory::format, "non-finite token value in " + path.string());
        }
    }
    return token;
}

void write_token(const std::filesystem::path& path, const StyleToken& token) {
    static_assert(std::endian::native == std::endian::little,
                  "token file I/O assumes a little-endian host");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCategory::io, "cannot write token file " + path.string());
    }
    const uint32_t dim = static_cast<uint32_t>(token.dim());
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(token.values.data()),
              static_cast<std::streamsize>(token.values.size() * sizeof(double)));
    if (!out) {
        fail(ErrorCategory::io, "failed writing token file " + path.string());
    }
}

} // namespace cellsynth
