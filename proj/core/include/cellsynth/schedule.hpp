#pragma once

#include <string>
#include <vector>

namespace cellsynth {

enum class ScheduleKind {
    linear,        // beta_t evenly spaced over [beta_start, beta_end]
    scaled_linear, // sqrt(beta_t) evenly spaced, then squared
};

ScheduleKind schedule_kind_from_string(const std::string& s);
const char* to_string(ScheduleKind k);

/// Diffusion noise schedule: per-step betas and the cumulative signal
/// retention alpha_bar_t = prod_{s<=t} (1 - beta_s), with alpha_bar_0 = 1.
struct NoiseSchedule {
    std::vector<double> betas;      // betas[i] = beta_{i+1}, size T
    std::vector<double> alpha_bars; // alpha_bars[t], size T+1, [0] == 1

    int total_steps() const { return static_cast<int>(betas.size()); }
    double beta(int t) const { return betas.at(t - 1); }          // t in 1..T
    double alpha_bar(int t) const { return alpha_bars.at(t); }    // t in 0..T
};

/// Builds a schedule and verifies 0 < beta_t < 1 with alpha_bar strictly
/// decreasing and alpha_bar_T > 0. The scaled_linear defaults
/// (T=1000, 0.00085 -> 0.012) follow the usual latent-diffusion convention.
NoiseSchedule make_schedule(int total_steps, double beta_start, double beta_end,
                            ScheduleKind kind = ScheduleKind::scaled_linear);

inline NoiseSchedule default_schedule() {
    return make_schedule(1000, 0.00085, 0.012, ScheduleKind::scaled_linear);
}

} // namespace cellsynth
