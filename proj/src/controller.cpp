#include "agrisim/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "agrisim/canonical_json.hpp"

namespace agrisim::edge {

std::string_view to_string(OverrideMode m) {
    switch (m) {
        case OverrideMode::None: return "none";
        case OverrideMode::ForcedOn: return "on";
        case OverrideMode::ForcedOff: return "off";
    }
    return "none";
}

std::string_view to_string(PumpReason r) {
    switch (r) {
        case PumpReason::RainGate: return "RAIN_GATE";
        case PumpReason::BelowOnThreshold: return "BELOW_ON_THRESHOLD";
        case PumpReason::AboveOffThreshold: return "ABOVE_OFF_THRESHOLD";
        case PumpReason::HysteresisHold: return "HYSTERESIS_HOLD";
        case PumpReason::Override: return "OVERRIDE";
        case PumpReason::MinOnHold: return "MIN_ON_HOLD";
    }
    return "HYSTERESIS_HOLD";
}

void validate(const IrrigationPolicy& pol) {
    if (pol.crop_id.empty() || !valid_node_id(pol.crop_id)) throw ConfigError("crop_id", "must match [A-Za-z0-9_.-]{1,64}");
    if (!(pol.m_on_pct >= 0.0)) throw ConfigError("m_on_pct", "must be >= 0");
    if (!(pol.m_on_pct < pol.m_off_pct)) throw ConfigError("m_on_pct", "must be < m_off_pct");
    if (!(pol.m_off_pct <= 100.0)) throw ConfigError("m_off_pct", "must be <= 100");
    if (!(pol.min_on_s >= 0.0)) throw ConfigError("min_on_s", "must be >= 0");
    if (!(pol.dht_period_s >= 1.0)) throw ConfigError("dht_period_s", "must be >= 1 (sensor is limited to 1 Hz)");
    if (!(pol.tick_s > 0.0)) throw ConfigError("tick_s", "must be > 0");
}

PumpCommand decide_pump(double m_pct, bool rain, const PumpState& state, const IrrigationPolicy& pol, double now_s) {
    if (rain) return {false, PumpReason::RainGate};
    if (state.override.active(now_s)) return {state.override.mode == OverrideMode::ForcedOn, PumpReason::Override};
    if (state.on && now_s - state.since_s < pol.min_on_s) return {true, PumpReason::MinOnHold};
    if (m_pct <= pol.m_on_pct) return {true, PumpReason::BelowOnThreshold};
    if (m_pct >= pol.m_off_pct) return {false, PumpReason::AboveOffThreshold};
    return {state.on, PumpReason::HysteresisHold};
}

PumpState apply_command(PumpState state, const PumpCommand& cmd, double now_s) {
    if (cmd.on != state.on) {
        state.on = cmd.on;
        state.since_s = now_s;
    }
    if (state.override.mode != OverrideMode::None && !state.override.active(now_s)) state.override = {};
    return state;
}

PumpState with_override(PumpState state, OverrideMode mode, double ttl_s, double now_s) {
    if (mode == OverrideMode::None) {
        state.override = {};
        return state;
    }
    if (!(ttl_s > 0.0 && ttl_s <= kMaxOverrideTtlS)) throw DomainError("ttl_s", "must be in (0, 86400]");
    state.override = {mode, now_s + ttl_s};
    return state;
}

OverrideMode parse_override_mode(std::string_view name) {
    if (name == "on") return OverrideMode::ForcedOn;
    if (name == "off") return OverrideMode::ForcedOff;
    if (name == "clear" || name == "none") return OverrideMode::None;
    throw DomainError("state", "expected on, off or clear");
}

std::string serialize(const OverrideMessage& msg) {
    return json::ObjectWriter{}
        .field("v", std::int64_t{kWireVersion})
        .field("override", msg.mode == OverrideMode::None ? "clear" : to_string(msg.mode))
        .fixed("ttl_s", msg.ttl_s, 1)
        .str();
}

OverrideMessage parse_override_line(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(ParseFault::Syntax, "line", e.what());
    }
    if (!obj.is_object()) throw ParseError(ParseFault::Syntax, "line", "expected a JSON object");
    const auto v = obj.find("v");
    if (v == obj.end()) throw ParseError(ParseFault::MissingKey, "v", "missing key");
    if (!v->is_number_integer() || v->get<std::int64_t>() != kWireVersion) {
        throw ParseError(ParseFault::UnknownVersion, "v", "unsupported wire version");
    }
    const auto mode = obj.find("override");
    if (mode == obj.end()) throw ParseError(ParseFault::MissingKey, "override", "missing key");
    if (!mode->is_string()) throw ParseError(ParseFault::TypeError, "override", "expected a string");
    const auto ttl = obj.find("ttl_s");
    if (ttl == obj.end()) throw ParseError(ParseFault::MissingKey, "ttl_s", "missing key");
    if (!ttl->is_number()) throw ParseError(ParseFault::TypeError, "ttl_s", "expected a number");

    OverrideMessage msg;
    try {
        msg.mode = parse_override_mode(mode->get<std::string>());
    } catch (const DomainError&) {
        throw ParseError(ParseFault::TypeError, "override", "expected on, off or clear");
    }
    msg.ttl_s = ttl->get<double>();
    return msg;
}

void validate(const NodeConfig& cfg) {
    if (!valid_node_id(cfg.node)) throw ConfigError("node", "must match [A-Za-z0-9_.-]{1,64}");
    if (cfg.epoch_ms < 0) throw ConfigError("epoch_ms", "must be >= 0");
    sensors::validate(cfg.ldr);
    if (!(cfg.ldr_r_fixed > 0.0)) throw ConfigError("ldr_r_fixed", "must be > 0");
    sensors::validate(cfg.adc);
    sensors::validate(cfg.rain_board, sensors::kSupplyVolts);
    sensors::validate(cfg.pressure);
    flow::validate(cfg.flow_calib);
    dht11::validate(cfg.dht_timing);
    if (!(cfg.pump_rate_ml_per_min >= 0.0)) throw ConfigError("pump_rate_ml_per_min", "must be >= 0");
    if (!(cfg.dht_jitter_frac >= 0.0 && cfg.dht_jitter_frac <= 0.1)) {
        throw ConfigError("dht_jitter_frac", "must be in [0, 0.1]");
    }
}

int moisture_pct_from_counts(std::int32_t counts, const sensors::AdcSpec& adc) {
    const double max = adc.max_count();
    const double pct = 100.0 * (1.0 - std::clamp<double>(counts, 0.0, max) / max);
    return static_cast<int>(std::lround(pct));
}

namespace {

// Drives the DHT11 through the full wire path: encode, put on the line with
// timing jitter, decode.
dht11::Reading sample_dht(const sensors::EnvState& env, const NodeConfig& cfg, Rng& rng) {
    const auto frame = dht11::encode_reading(dht11::reading_from(env.rh_pct, env.temp_c));
    auto wave = dht11::frame_to_waveform(frame, cfg.dht_timing);
    if (cfg.dht_jitter_frac > 0.0) {
        for (auto& seg : wave) {
            const double scaled = seg.duration_us * rng.uniform(1.0 - cfg.dht_jitter_frac, 1.0 + cfg.dht_jitter_frac);
            seg.duration_us = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(scaled)));
        }
    }
    return dht11::frame_to_reading(dht11::decode_waveform(wave, cfg.dht_timing));
}

}  // namespace

StepResult step_node(double t_s, const sensors::EnvState& env, NodeState state, const IrrigationPolicy& pol,
                     const NodeConfig& cfg) {
    StepResult out;
    const auto t_ms = static_cast<std::int64_t>(std::llround(t_s * 1000.0));
    const auto period_ms = static_cast<std::int64_t>(std::llround(pol.dht_period_s * 1000.0));

    if (!state.last_dht || t_ms - state.last_dht_ms >= period_ms) {
        out.dht_sampled = true;
        try {
            state.last_dht = sample_dht(env, cfg, state.rng);
            state.last_dht_ms = t_ms;
        } catch (const dht11::CodecError& e) {
            out.dht_fault = true;
            out.fault_detail = std::string(dht11::to_string(e.fault())) + " " + e.field() + ": " + e.what();
        }
    }

    // Flow over the elapsed tick, with the pump state that was held during it.
    std::uint64_t pulses = 0;
    if (state.pump.on && cfg.pump_rate_ml_per_min > 0.0) {
        double rate = cfg.pump_rate_ml_per_min;
        if (cfg.flow_noise) rate *= state.rng.uniform(0.9, 1.1);
        const auto step = flow::flow_to_pulses(rate, pol.tick_s, state.flow_acc, cfg.flow_calib);
        pulses = step.pulses;
        state.flow_acc = step.acc;
    }
    state.total_pulses += pulses;

    const auto m_raw = sensors::adc_quantize(sensors::soil_moisture_voltage(env.moisture), cfg.adc);
    const int m_pct = moisture_pct_from_counts(m_raw, cfg.adc);
    const bool rain = sensors::rain_signals(env.rain_wetness, cfg.rain_board, sensors::kSupplyVolts).rain_detected;
    const auto lux_v =
        sensors::divider_voltage(sensors::ldr_resistance(env.light_lux, cfg.ldr), cfg.ldr_r_fixed, sensors::kSupplyVolts);
    const auto p_counts = sensors::pressure_counts(env.soil_pressure_kpa, cfg.pressure);

    out.command = decide_pump(m_pct, rain, state.pump, pol, t_s);
    state.pump = apply_command(state.pump, out.command, t_s);

    auto& rec = out.record;
    rec.node = cfg.node;
    rec.ts_ms = cfg.epoch_ms + t_ms;
    if (state.last_dht) {
        rec.t_c = state.last_dht->temperature();
        rec.rh_pct = state.last_dht->humidity();
    }
    rec.m_pct = m_pct;
    rec.m_raw = m_raw;
    rec.rain = rain ? 1 : 0;
    rec.lux_raw = sensors::adc_quantize(lux_v, cfg.adc);
    rec.p_kpa = sensors::pressure_from_counts(p_counts, cfg.pressure);
    rec.f_mlmin = flow::flow_rate(pulses, pol.tick_s, cfg.flow_calib);
    rec.vol_ml = flow::pulses_to_volume(state.total_pulses, cfg.flow_calib);
    rec.pump = state.pump.on ? 1 : 0;
    canonicalize(rec);

    out.state = std::move(state);
    return out;
}

namespace {

std::string pad16(std::string s) {
    s.resize(kLcdWidth, ' ');
    return s;
}

long saturate(double v, long hi) { return std::clamp<long>(std::lround(v), 0, hi); }

}  // namespace

LcdPage format_lcd(const TelemetryRecord& rec, int page) {
    using namespace std::chrono;
    const sys_time<milliseconds> tp{milliseconds{rec.ts_ms}};
    const auto day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{floor<seconds>(tp - day)};

    char a[32];
    char b[32];
    if (page == 0) {
        std::snprintf(a, sizeof a, "T:%02ldC H:%02ld%% R:%d", saturate(rec.t_c, 99), saturate(rec.rh_pct, 99),
                      rec.rain ? 1 : 0);
        std::snprintf(b, sizeof b, "M:%02ld%% P:%d %02d:%02d", saturate(rec.m_pct, 99), rec.pump ? 1 : 0,
                      static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()));
    } else {
        std::snprintf(a, sizeof a, "D:%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        std::snprintf(b, sizeof b, "F:%04ld V:%06ld", saturate(rec.f_mlmin, 9999), saturate(rec.vol_ml, 999999));
    }
    return {pad16(a), pad16(b)};
}

}  // namespace agrisim::edge
