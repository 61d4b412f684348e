#pragma once

// Hall-effect pinwheel flow meter (YF-S201 style): one pulse per fixed volume.

#include <cstdint>

namespace agrisim::flow {

struct FlowCalib {
    double ml_per_pulse = 2.25;
};

struct FlowSample {
    std::uint64_t pulse_count = 0;
    double window_s = 1.0;
    double rate_ml_per_min = 0.0;
    double cumulative_ml = 0.0;
};

/// Fractional volume not yet large enough to produce a pulse.
struct PulseAccumulator {
    double residual_ml = 0.0;
};

struct PulseStep {
    std::uint64_t pulses = 0;
    PulseAccumulator acc;
};

void validate(const FlowCalib& c);

double pulses_to_volume(std::uint64_t count, const FlowCalib& c = {});
double flow_rate(std::uint64_t count, double window_s, const FlowCalib& c = {});

/// Simulation inverse: volume delivered at `rate` over `dt_s`, emitted as
/// whole pulses with the remainder carried in the accumulator.
PulseStep flow_to_pulses(double rate_ml_per_min, double dt_s, PulseAccumulator acc, const FlowCalib& c = {});

/// Running totals for one meter.
class FlowMeter {
public:
    explicit FlowMeter(FlowCalib calib = {});

    FlowSample record(std::uint64_t pulses, double window_s);

    double cumulative_ml() const { return pulses_to_volume(total_pulses_, calib_); }
    std::uint64_t total_pulses() const { return total_pulses_; }
    const FlowCalib& calib() const { return calib_; }

private:
    FlowCalib calib_;
    std::uint64_t total_pulses_ = 0;
};

}  // namespace agrisim::flow
