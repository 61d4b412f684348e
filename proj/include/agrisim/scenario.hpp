#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "agrisim/controller.hpp"
#include "agrisim/sensor_models.hpp"

namespace agrisim::scenario {

struct RainInterval {
    double start_s = 0.0;
    double end_s = 0.0;
    double wetness = 1.0;
};

/// Diurnal sine for light (daylight only) and for temperature/humidity.
struct WeatherProfile {
    double peak_lux = 50000.0;
    double day_length_s = 43200.0;
    double temp_mean_c = 25.0;
    double temp_amplitude_c = 0.0;
    double rh_mean_pct = 55.0;
    double rh_amplitude_pct = 0.0;
};

struct ScheduledOverride {
    double at_s = 0.0;
    edge::OverrideMode mode = edge::OverrideMode::None;
    double ttl_s = 0.0;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double duration_s = 60.0;
    edge::IrrigationPolicy policy;
    sensors::EnvDynamics dynamics;
    sensors::EnvState initial;
    std::vector<RainInterval> rain_intervals;
    WeatherProfile weather;
    std::vector<ScheduledOverride> overrides;
    edge::NodeConfig node;   // carries pump rate and flow noise
};

/// Throws ConfigError naming the first offending field (dotted path).
void validate(const ScenarioConfig& cfg);

/// Parses a scenario document. Missing optional sections take defaults;
/// unknown keys are rejected.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::string& path);

struct Weather {
    double rain = 0.0;
    double light_lux = 0.0;
    double temp_c = 0.0;
    double rh_pct = 0.0;
};

Weather weather_at(const ScenarioConfig& cfg, double t_s);

std::int64_t tick_count(const ScenarioConfig& cfg);

struct TickOutput {
    double t_s = 0.0;
    sensors::EnvState env;
    const edge::StepResult& step;
};

struct RunSummary {
    std::int64_t records = 0;
    double total_volume_ml = 0.0;
    double pump_duty = 0.0;   // fraction of ticks with the pump commanded on
    std::int64_t pump_transitions = 0;
    std::int64_t dht_faults = 0;
};

/// Single-threaded deterministic loop: per tick, advance the environment
/// then step the node. Same config (seed included) gives the same output.
RunSummary run_scenario(const ScenarioConfig& cfg, const std::function<void(const TickOutput&)>& sink);

/// Convenience: collect the telemetry records.
std::vector<TelemetryRecord> run_scenario(const ScenarioConfig& cfg);

}  // namespace agrisim::scenario
