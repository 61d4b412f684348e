#include "agrisim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "agrisim/error.hpp"

namespace agrisim::scenario {

namespace {

using nlohmann::json;

// Reads one JSON object, tracking the dotted path for error messages and
// rejecting keys nobody asked for.
class Section {
public:
    Section(const json& obj, std::string path, std::initializer_list<std::string_view> allowed)
        : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "scenario" : path_, "expected an object");
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
                throw ConfigError(name(it.key()), "unknown key");
            }
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json* find(const std::string& key) const {
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) throw ConfigError(name(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(name(key), "expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->is_number_unsigned() || v->get<std::int64_t>() >= 0) {
                    out = static_cast<Int>(v->get<std::uint64_t>());
                    return;
                }
                throw ConfigError(name(key), "expected a non-negative integer");
            } else {
                out = static_cast<Int>(v->get<std::int64_t>());
            }
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(name(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) throw ConfigError(name(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    const json* array(const std::string& key) {
        const auto* v = find(key);
        if (v && !v->is_array()) throw ConfigError(name(key), "expected an array");
        return v;
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& obj_;
    std::string path_;
};

edge::OverrideMode parse_mode(const std::string& s, const std::string& field) {
    if (s == "on") return edge::OverrideMode::ForcedOn;
    if (s == "off") return edge::OverrideMode::ForcedOff;
    if (s == "clear") return edge::OverrideMode::None;
    throw ConfigError(field, "expected on, off or clear");
}

void read_policy(Section& s, edge::IrrigationPolicy& p) {
    s.string("crop_id", p.crop_id);
    s.number("m_on_pct", p.m_on_pct);
    s.number("m_off_pct", p.m_off_pct);
    s.number("min_on_s", p.min_on_s);
    s.number("dht_period_s", p.dht_period_s);
    s.number("tick_s", p.tick_s);
}

void read_sensors(Section& s, edge::NodeConfig& n) {
    if (const auto* v = s.find("ldr")) {
        Section ldr(*v, s.name("ldr"), {"r_dark", "r_at_10lux", "gamma"});
        ldr.number("r_dark", n.ldr.r_dark);
        ldr.number("r_at_10lux", n.ldr.r_at_10lux);
        ldr.number("gamma", n.ldr.gamma);
    }
    s.number("ldr_r_fixed", n.ldr_r_fixed);
    if (const auto* v = s.find("rain_board")) {
        Section rb(*v, s.name("rain_board"), {"r_dry", "r_wet", "r_fixed", "v_threshold"});
        rb.number("r_dry", n.rain_board.r_dry);
        rb.number("r_wet", n.rain_board.r_wet);
        rb.number("r_fixed", n.rain_board.r_fixed);
        rb.number("v_threshold", n.rain_board.v_threshold);
    }
    if (const auto* v = s.find("pressure")) {
        Section ps(*v, s.name("pressure"), {"gain", "rate_sps"});
        ps.integer("gain", n.pressure.gain);
        ps.integer("rate_sps", n.pressure.rate_sps);
    }
    s.number("ml_per_pulse", n.flow_calib.ml_per_pulse);
    s.number("dht_jitter_frac", n.dht_jitter_frac);
}

// Re-raise library validation errors under the section's dotted path.
template <typename Fn>
void within(const std::string& prefix, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + "." + e.field(), e.what());
    } catch (const DomainError& e) {
        throw ConfigError(prefix + "." + e.field(), e.what());
    }
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    if (!(cfg.duration_s > 0.0)) throw ConfigError("duration_s", "must be > 0");
    within("policy", [&] { edge::validate(cfg.policy); });
    if (tick_count(cfg) < 1) throw ConfigError("duration_s", "shorter than one tick");
    within("dynamics", [&] { sensors::validate(cfg.dynamics); });
    within("initial", [&] { sensors::validate(cfg.initial); });
    within("sensors", [&] { edge::validate(cfg.node); });
    for (std::size_t i = 0; i < cfg.rain_intervals.size(); ++i) {
        const auto& r = cfg.rain_intervals[i];
        const auto field = "rain_intervals[" + std::to_string(i) + "]";
        if (!(r.start_s >= 0.0 && r.start_s < r.end_s && r.end_s <= cfg.duration_s)) {
            throw ConfigError(field, "interval must satisfy 0 <= start_s < end_s <= duration_s");
        }
        if (!(r.wetness >= 0.0 && r.wetness <= 1.0)) throw ConfigError(field + ".wetness", "must be in [0, 1]");
    }
    const auto& w = cfg.weather;
    if (!(w.peak_lux >= 0.0)) throw ConfigError("light_profile.peak_lux", "must be >= 0");
    if (!(w.day_length_s >= 0.0 && w.day_length_s <= 86400.0)) {
        throw ConfigError("light_profile.day_length_s", "must be in [0, 86400]");
    }
    if (!(w.rh_mean_pct >= 0.0 && w.rh_mean_pct <= 100.0)) throw ConfigError("weather.rh_mean_pct", "must be in [0, 100]");
    for (std::size_t i = 0; i < cfg.overrides.size(); ++i) {
        const auto& o = cfg.overrides[i];
        const auto field = "overrides[" + std::to_string(i) + "]";
        if (!(o.at_s >= 0.0 && o.at_s <= cfg.duration_s)) throw ConfigError(field + ".at_s", "must be within the run");
        if (o.mode != edge::OverrideMode::None && !(o.ttl_s > 0.0 && o.ttl_s <= edge::kMaxOverrideTtlS)) {
            throw ConfigError(field + ".ttl_s", "must be in (0, 86400]");
        }
    }
}

ScenarioConfig parse_scenario(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario", std::string("malformed JSON: ") + e.what());
    }

    ScenarioConfig cfg;
    bool has_pressure = false;
    bool has_temp_mean = false;
    bool has_rh_mean = false;
    {
        Section root(doc, "", {"seed", "duration_s", "node", "epoch_ms", "pump_rate_ml_per_min", "noise", "policy",
                               "dynamics", "initial", "rain_intervals", "light_profile", "weather", "overrides",
                               "sensors"});
        root.integer("seed", cfg.seed);
        root.number("duration_s", cfg.duration_s);
        root.string("node", cfg.node.node);
        root.integer("epoch_ms", cfg.node.epoch_ms);
        root.number("pump_rate_ml_per_min", cfg.node.pump_rate_ml_per_min);
        root.boolean("noise", cfg.node.flow_noise);

        if (const auto* v = root.find("policy")) {
            Section s(*v, "policy", {"crop_id", "m_on_pct", "m_off_pct", "min_on_s", "dht_period_s", "tick_s"});
            read_policy(s, cfg.policy);
        }
        if (const auto* v = root.find("dynamics")) {
            Section s(*v, "dynamics", {"k_pump", "k_rain", "w", "pressure_base_kpa", "pressure_per_moisture_kpa"});
            s.number("k_pump", cfg.dynamics.k_pump);
            s.number("k_rain", cfg.dynamics.k_rain);
            if (const auto* w = s.array("w")) {
                if (w->size() != 4) throw ConfigError("dynamics.w", "expected 4 coefficients");
                for (std::size_t i = 0; i < 4; ++i) {
                    if (!(*w)[i].is_number()) throw ConfigError("dynamics.w", "expected numbers");
                    cfg.dynamics.w_true[i] = (*w)[i].get<double>();
                }
            }
            s.number("pressure_base_kpa", cfg.dynamics.pressure_base_kpa);
            s.number("pressure_per_moisture_kpa", cfg.dynamics.pressure_per_moisture_kpa);
        }
        if (const auto* v = root.find("initial")) {
            Section s(*v, "initial",
                      {"moisture", "rain_wetness", "light_lux", "temp_c", "rh_pct", "soil_pressure_kpa"});
            s.number("moisture", cfg.initial.moisture);
            s.number("rain_wetness", cfg.initial.rain_wetness);
            s.number("light_lux", cfg.initial.light_lux);
            s.number("temp_c", cfg.initial.temp_c);
            s.number("rh_pct", cfg.initial.rh_pct);
            has_pressure = s.has("soil_pressure_kpa");
            s.number("soil_pressure_kpa", cfg.initial.soil_pressure_kpa);
        }
        if (const auto* arr = root.array("rain_intervals")) {
            for (std::size_t i = 0; i < arr->size(); ++i) {
                Section s((*arr)[i], "rain_intervals[" + std::to_string(i) + "]", {"start_s", "end_s", "wetness"});
                RainInterval r;
                s.number("start_s", r.start_s);
                s.number("end_s", r.end_s);
                s.number("wetness", r.wetness);
                cfg.rain_intervals.push_back(r);
            }
        }
        if (const auto* v = root.find("light_profile")) {
            Section s(*v, "light_profile", {"peak_lux", "day_length_s"});
            s.number("peak_lux", cfg.weather.peak_lux);
            s.number("day_length_s", cfg.weather.day_length_s);
        }
        if (const auto* v = root.find("weather")) {
            Section s(*v, "weather", {"temp_mean_c", "temp_amplitude_c", "rh_mean_pct", "rh_amplitude_pct"});
            has_temp_mean = s.has("temp_mean_c");
            has_rh_mean = s.has("rh_mean_pct");
            s.number("temp_mean_c", cfg.weather.temp_mean_c);
            s.number("temp_amplitude_c", cfg.weather.temp_amplitude_c);
            s.number("rh_mean_pct", cfg.weather.rh_mean_pct);
            s.number("rh_amplitude_pct", cfg.weather.rh_amplitude_pct);
        }
        if (const auto* arr = root.array("overrides")) {
            for (std::size_t i = 0; i < arr->size(); ++i) {
                const auto path = "overrides[" + std::to_string(i) + "]";
                Section s((*arr)[i], path, {"at_s", "state", "ttl_s"});
                ScheduledOverride o;
                std::string state = "clear";
                s.number("at_s", o.at_s);
                s.string("state", state);
                s.number("ttl_s", o.ttl_s);
                o.mode = parse_mode(state, path + ".state");
                cfg.overrides.push_back(o);
            }
        }
        if (const auto* v = root.find("sensors")) {
            Section s(*v, "sensors", {"ldr", "ldr_r_fixed", "rain_board", "pressure", "ml_per_pulse", "dht_jitter_frac"});
            read_sensors(s, cfg.node);
        }
    }

    if (!has_temp_mean) cfg.weather.temp_mean_c = cfg.initial.temp_c;
    if (!has_rh_mean) cfg.weather.rh_mean_pct = cfg.initial.rh_pct;
    if (!has_pressure) {
        cfg.initial.soil_pressure_kpa =
            cfg.dynamics.pressure_base_kpa + cfg.dynamics.pressure_per_moisture_kpa * cfg.initial.moisture;
    }
    std::stable_sort(cfg.overrides.begin(), cfg.overrides.end(),
                     [](const auto& a, const auto& b) { return a.at_s < b.at_s; });
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("scenario", "cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

Weather weather_at(const ScenarioConfig& cfg, double t_s) {
    const auto& p = cfg.weather;
    Weather w;
    for (const auto& r : cfg.rain_intervals) {
        if (t_s >= r.start_s && t_s < r.end_s) w.rain = std::max(w.rain, r.wetness);
    }

    const double epoch_s = static_cast<double>(cfg.node.epoch_ms % 86400000) / 1000.0;
    const double tod = std::fmod(epoch_s + t_s, 86400.0);
    const double sunrise = 43200.0 - p.day_length_s / 2.0;
    if (p.day_length_s > 0.0 && tod >= sunrise && tod <= sunrise + p.day_length_s) {
        w.light_lux = std::max(0.0, p.peak_lux * std::sin(std::numbers::pi * (tod - sunrise) / p.day_length_s));
    }

    // Warmest (and driest) mid-afternoon.
    const double phase = std::sin(2.0 * std::numbers::pi * (tod - 9.0 * 3600.0) / 86400.0);
    w.temp_c = p.temp_mean_c + p.temp_amplitude_c * phase;
    w.rh_pct = std::clamp(p.rh_mean_pct - p.rh_amplitude_pct * phase, 0.0, 100.0);
    return w;
}

std::int64_t tick_count(const ScenarioConfig& cfg) {
    return static_cast<std::int64_t>(std::floor(cfg.duration_s / cfg.policy.tick_s + 1e-9));
}

RunSummary run_scenario(const ScenarioConfig& cfg, const std::function<void(const TickOutput&)>& sink) {
    validate(cfg);

    const double tick = cfg.policy.tick_s;
    const auto n_ticks = tick_count(cfg);

    edge::NodeState state;
    state.rng = Rng(cfg.seed);
    auto env = cfg.initial;
    std::size_t next_override = 0;

    RunSummary summary;
    std::int64_t on_ticks = 0;
    bool prev_on = false;
    for (std::int64_t n = 1; n <= n_ticks; ++n) {
        const double t = static_cast<double>(n) * tick;
        const auto w = weather_at(cfg, t - tick);
        env.temp_c = w.temp_c;
        env.rh_pct = w.rh_pct;
        env = sensors::env_step(env, cfg.dynamics, tick, state.pump.on, w.rain, w.light_lux);

        while (next_override < cfg.overrides.size() && cfg.overrides[next_override].at_s <= t) {
            const auto& o = cfg.overrides[next_override++];
            state.pump = edge::with_override(state.pump, o.mode, o.ttl_s, t);
        }

        const auto step = edge::step_node(t, env, std::move(state), cfg.policy, cfg.node);
        state = step.state;

        ++summary.records;
        if (step.record.pump) ++on_ticks;
        if ((step.record.pump != 0) != prev_on) ++summary.pump_transitions;
        prev_on = step.record.pump != 0;
        if (step.dht_fault) ++summary.dht_faults;
        summary.total_volume_ml = step.record.vol_ml;

        if (sink) sink(TickOutput{t, env, step});
    }
    summary.pump_duty = summary.records ? static_cast<double>(on_ticks) / summary.records : 0.0;
    return summary;
}

std::vector<TelemetryRecord> run_scenario(const ScenarioConfig& cfg) {
    std::vector<TelemetryRecord> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, tick_count(cfg))));
    run_scenario(cfg, [&](const TickOutput& t) { out.push_back(t.step.record); });
    return out;
}

}  // namespace agrisim::scenario
