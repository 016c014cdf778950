#include "cellsynth/schedule.hpp"

#include <cmath>

#include "cellsynth/error.hpp"

namespace cellsynth {

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::linear;
    if (s == "scaled_linear") return ScheduleKind::scaled_linear;
    fail(ErrorCategory::parameter, "unknown schedule kind '" + s + "'");
}

const char* to_string(ScheduleKind k) {
    return k == ScheduleKind::linear ? "linear" : "scaled_linear";
}

NoiseSchedule make_schedule(int total_steps, double beta_start, double beta_end,
                            ScheduleKind kind) {
    if (total_steps < 1) {
        fail(ErrorCategory::parameter, "schedule needs at least one timestep");
    }
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || !(beta_start <= beta_end)) {
        fail(ErrorCategory::parameter, "schedule requires 0 < beta_start <= beta_end < 1");
    }

    NoiseSchedule s;
    s.betas.resize(total_steps);
    if (total_steps == 1) {
        s.betas[0] = beta_start;
    } else if (kind == ScheduleKind::linear) {
        const double step = (beta_end - beta_start) / (total_steps - 1);
        for (int i = 0; i < total_steps; ++i) {
            s.betas[i] = beta_start + step * i;
        }
    } else {
        const double lo = std::sqrt(beta_start);
        const double hi = std::sqrt(beta_end);
        const double step = (hi - lo) / (total_steps - 1);
        for (int i = 0; i < total_steps; ++i) {
            const double b = lo + step * i;
            s.betas[i] = b * b;
        }
    }

    s.alpha_bars.resize(total_steps + 1);
    s.alpha_bars[0] = 1.0;
    for (int t = 1; t <= total_steps; ++t) {
        s.alpha_bars[t] = s.alpha_bars[t - 1] * (1.0 - s.betas[t - 1]);
    }

    for (int t = 1; t <= total_steps; ++t) {
        if (!(s.betas[t - 1] > 0.0 && s.betas[t - 1] < 1.0)) {
            fail(ErrorCategory::parameter, "beta_" + std::to_string(t) + " out of (0,1)");
        }
        if (!(s.alpha_bars[t] < s.alpha_bars[t - 1])) {
            fail(ErrorCategory::parameter, "alpha_bar not strictly decreasing at t=" +
                                               std::to_string(t));
        }
    }
    if (!(s.alpha_bars[total_steps] > 0.0)) {
        fail(ErrorCategory::parameter, "alpha_bar_T underflowed to zero; schedule too long");
    }
    return s;
}

} // namespace cellsynth
