#include "agrisim/flow_meter.hpp"

#include <cmath>

#include "agrisim/error.hpp"

namespace agrisim::flow {

void validate(const FlowCalib& c) {
    if (!(c.ml_per_pulse > 0.0)) throw DomainError("ml_per_pulse", "must be > 0");
}

double pulses_to_volume(std::uint64_t count, const FlowCalib& c) {
    return static_cast<double>(count) * c.ml_per_pulse;
}

double flow_rate(std::uint64_t count, double window_s, const FlowCalib& c) {
    if (!(window_s > 0.0)) throw DomainError("window_s", "must be > 0");
    return pulses_to_volume(count, c) * 60.0 / window_s;
}

PulseStep flow_to_pulses(double rate_ml_per_min, double dt_s, PulseAccumulator acc, const FlowCalib& c) {
    if (!(rate_ml_per_min >= 0.0)) throw DomainError("rate_ml_per_min", "must be >= 0");
    if (!(dt_s > 0.0)) throw DomainError("dt_s", "must be > 0");
    if (rate_ml_per_min == 0.0) return {0, acc};

    const double total_ml = acc.residual_ml + rate_ml_per_min * dt_s / 60.0;
    const double whole = std::floor(total_ml / c.ml_per_pulse);
    PulseStep out;
    out.pulses = static_cast<std::uint64_t>(whole);
    out.acc.residual_ml = total_ml - whole * c.ml_per_pulse;
    // Rounding in the division can leave the residual a hair outside
    // [0, ml_per_pulse); fold it back so the invariant holds.
    if (out.acc.residual_ml >= c.ml_per_pulse) {
        ++out.pulses;
        out.acc.residual_ml -= c.ml_per_pulse;
    }
    if (out.acc.residual_ml < 0.0) {
        if (out.pulses > 0) {
            --out.pulses;
            out.acc.residual_ml += c.ml_per_pulse;
        } else {
            out.acc.residual_ml = 0.0;
        }
    }
    return out;
}

FlowMeter::FlowMeter(FlowCalib calib) : calib_(calib) { validate(calib_); }

FlowSample FlowMeter::record(std::uint64_t pulses, double window_s) {
    FlowSample s;
    s.pulse_count = pulses;
    s.window_s = window_s;
    s.rate_ml_per_min = flow_rate(pulses, window_s, calib_);
    total_pulses_ += pulses;
    s.cumulative_ml = cumulative_ml();
    return s;
}

}  // namespace agrisim::flow
