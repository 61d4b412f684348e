#pragma once

// Edge node: rain-gated hysteresis pump control, sensor sampling and
// telemetry/LCD output for one tick.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "agrisim/dht11.hpp"
#include "agrisim/flow_meter.hpp"
#include "agrisim/rng.hpp"
#include "agrisim/sensor_models.hpp"
#include "agrisim/telemetry.hpp"

namespace agrisim::edge {

struct IrrigationPolicy {
    std::string crop_id = "default";
    double m_on_pct = 35.0;    // start watering at or below
    double m_off_pct = 60.0;   // stop watering at or above
    double min_on_s = 30.0;
    double dht_period_s = 1.0;
    double tick_s = 1.0;

    friend bool operator==(const IrrigationPolicy&, const IrrigationPolicy&) = default;
};

/// Throws ConfigError naming the first invalid field.
void validate(const IrrigationPolicy& pol);

enum class OverrideMode : std::uint8_t { None, ForcedOn, ForcedOff };

std::string_view to_string(OverrideMode m);

struct Override {
    OverrideMode mode = OverrideMode::None;
    double expires_at_s = 0.0;

    bool active(double now_s) const { return mode != OverrideMode::None && now_s < expires_at_s; }
    double ttl_remaining(double now_s) const { return active(now_s) ? expires_at_s - now_s : 0.0; }
};

inline constexpr double kMaxOverrideTtlS = 86400.0;

struct PumpState {
    bool on = false;
    double since_s = 0.0;
    Override override;
};

enum class PumpReason : std::uint8_t {
    RainGate,
    BelowOnThreshold,
    AboveOffThreshold,
    HysteresisHold,
    Override,
    MinOnHold,
};

std::string_view to_string(PumpReason r);

struct PumpCommand {
    bool on = false;
    PumpReason reason = PumpReason::HysteresisHold;

    friend bool operator==(const PumpCommand&, const PumpCommand&) = default;
};

/// Precedence, highest first: rain, active override, minimum on-time,
/// on-threshold (<=), off-threshold (>=), otherwise hold.
PumpCommand decide_pump(double m_pct, bool rain, const PumpState& state, const IrrigationPolicy& pol, double now_s);

/// State after actuating `cmd` at `now_s`; expired overrides are dropped.
PumpState apply_command(PumpState state, const PumpCommand& cmd, double now_s);

/// Installs (or clears, for OverrideMode::None) an operator override.
/// Forced modes need ttl_s in (0, 86400].
PumpState with_override(PumpState state, OverrideMode mode, double ttl_s, double now_s);

/// Control line sent from the decision service back down a node's ingest
/// connection: {"v":1,"override":"on|off|clear","ttl_s":600.0}
struct OverrideMessage {
    OverrideMode mode = OverrideMode::None;
    double ttl_s = 0.0;

    friend bool operator==(const OverrideMessage&, const OverrideMessage&) = default;
};

std::string serialize(const OverrideMessage& msg);
/// Throws ParseError.
OverrideMessage parse_override_line(std::string_view line);
/// Throws DomainError for unknown names.
OverrideMode parse_override_mode(std::string_view name);

/// Sensor wiring and calibration for one node.
struct NodeConfig {
    std::string node = "n1";
    std::int64_t epoch_ms = 1767225600000;   // t = 0 of the run, UTC
    sensors::LdrParams ldr;
    double ldr_r_fixed = 1e3;
    sensors::AdcSpec adc;
    sensors::RainBoardModel rain_board;
    sensors::PressureSpec pressure;
    flow::FlowCalib flow_calib;
    dht11::Timing dht_timing;
    double pump_rate_ml_per_min = 135.0;
    bool flow_noise = false;          // uniform +/-10% on delivered rate
    double dht_jitter_frac = 0.05;    // per-segment wire timing jitter
};

void validate(const NodeConfig& cfg);

struct NodeState {
    PumpState pump;
    std::optional<dht11::Reading> last_dht;
    std::int64_t last_dht_ms = 0;
    flow::PulseAccumulator flow_acc;
    std::uint64_t total_pulses = 0;
    Rng rng{0};
};

struct StepResult {
    TelemetryRecord record;
    PumpCommand command;
    NodeState state;
    bool dht_sampled = false;
    bool dht_fault = false;   // record carries the last good DHT values
    std::string fault_detail;
};

/// One control tick at time `t_s` (seconds since the run epoch). Flow for the
/// tick is computed from the pump state held during the tick; the record's
/// `pump` field is the newly commanded state.
StepResult step_node(double t_s, const sensors::EnvState& env, NodeState state, const IrrigationPolicy& pol,
                     const NodeConfig& cfg);

/// Moisture percent as the edge derives it from the probe's ADC counts.
int moisture_pct_from_counts(std::int32_t counts, const sensors::AdcSpec& adc);

struct LcdPage {
    std::string line1;
    std::string line2;
};

inline constexpr std::size_t kLcdWidth = 16;

/// Page 0: temperature/humidity/rain and moisture/pump/clock.
/// Page 1: date and flow/volume.
LcdPage format_lcd(const TelemetryRecord& rec, int page);

}  // namespace agrisim::edge
