#include <doctest.h>

#include <random>

#include "agrisim/controller.hpp"

using namespace agrisim;
using namespace agrisim::edge;

namespace {

// Reference decision table written out longhand, independent of decide_pump.
bool expected_on(double m, bool rain, const PumpState& s, const IrrigationPolicy& p, double now) {
    if (rain) return false;
    const bool ov = s.override.mode != OverrideMode::None && now < s.override.expires_at_s;
    if (ov) return s.override.mode == OverrideMode::ForcedOn;
    if (s.on && now - s.since_s < p.min_on_s) return true;
    if (m <= p.m_on_pct) return true;
    if (m >= p.m_off_pct) return false;
    return s.on;
}

sensors::EnvState env_at(double moisture, double rain = 0.0) {
    sensors::EnvState e;
    e.moisture = moisture;
    e.rain_wetness = rain;
    e.temp_c = 25.0;
    e.rh_pct = 65.0;
    e.light_lux = 20000.0;
    e.soil_pressure_kpa = 12.0;
    return e;
}

}  // namespace

TEST_CASE("policy validation") {
    IrrigationPolicy p;
    CHECK_NOTHROW(validate(p));
    p.m_on_pct = 60.0;
    try {
        validate(p);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "m_on_pct");
    }
    p = {};
    p.dht_period_s = 0.5;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.m_off_pct = 101.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.crop_id = "no spaces";
    CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("decide_pump precedence") {
    const IrrigationPolicy pol;
    PumpState off;
    CHECK(decide_pump(10, true, off, pol, 100) == PumpCommand{false, PumpReason::RainGate});
    CHECK(decide_pump(35, false, off, pol, 100) == PumpCommand{true, PumpReason::BelowOnThreshold});
    CHECK(decide_pump(36, false, off, pol, 100) == PumpCommand{false, PumpReason::HysteresisHold});
    CHECK(decide_pump(60, false, off, pol, 100) == PumpCommand{false, PumpReason::AboveOffThreshold});

    PumpState on{true, 0.0, {}};
    CHECK(decide_pump(70, false, on, pol, 10) == PumpCommand{true, PumpReason::MinOnHold});
    CHECK(decide_pump(70, false, on, pol, 30) == PumpCommand{false, PumpReason::AboveOffThreshold});
    CHECK(decide_pump(50, false, on, pol, 100) == PumpCommand{true, PumpReason::HysteresisHold});
    // Rain beats the minimum on-time.
    CHECK(decide_pump(20, true, on, pol, 1) == PumpCommand{false, PumpReason::RainGate});

    auto forced = with_override(off, OverrideMode::ForcedOn, 60, 100);
    CHECK(decide_pump(90, false, forced, pol, 120) == PumpCommand{true, PumpReason::Override});
    CHECK(decide_pump(90, true, forced, pol, 120) == PumpCommand{false, PumpReason::RainGate});
    CHECK(decide_pump(90, false, forced, pol, 160).reason == PumpReason::AboveOffThreshold);

    auto stop = with_override(on, OverrideMode::ForcedOff, 60, 5);
    CHECK(decide_pump(10, false, stop, pol, 6) == PumpCommand{false, PumpReason::Override});

    CHECK(to_string(PumpReason::RainGate) == "RAIN_GATE");
    CHECK(to_string(PumpReason::MinOnHold) == "MIN_ON_HOLD");
}

TEST_CASE("decide_pump matches the reference table over the state space") {
    const IrrigationPolicy pol;
    const double now = 1000.0;
    std::int64_t states = 0;
    for (int m = 0; m <= 100; ++m) {
        for (bool rain : {false, true}) {
            for (bool on : {false, true}) {
                for (double since : {now - 5.0, now - 100.0}) {
                    for (int ov = 0; ov < 4; ++ov) {
                        PumpState s{on, since, {}};
                        if (ov == 1) s.override = {OverrideMode::ForcedOn, now + 60};
                        if (ov == 2) s.override = {OverrideMode::ForcedOff, now + 60};
                        if (ov == 3) s.override = {OverrideMode::ForcedOn, now - 1};   // expired
                        const auto cmd = decide_pump(m, rain, s, pol, now);
                        REQUIRE(cmd.on == expected_on(m, rain, s, pol, now));
                        if (rain) REQUIRE_FALSE(cmd.on);
                        ++states;
                    }
                }
            }
        }
    }
    CHECK(states == 101 * 2 * 2 * 2 * 4);
}

TEST_CASE("apply_command tracks transitions and drops expired overrides") {
    PumpState s;
    s = apply_command(s, {true, PumpReason::BelowOnThreshold}, 10);
    CHECK(s.on);
    CHECK(s.since_s == 10);
    s = apply_command(s, {true, PumpReason::HysteresisHold}, 20);
    CHECK(s.since_s == 10);
    s = with_override(s, OverrideMode::ForcedOff, 5, 20);
    CHECK(s.override.active(24));
    s = apply_command(s, {false, PumpReason::Override}, 25);
    CHECK(s.override.mode == OverrideMode::None);
    CHECK(s.since_s == 25);
}

TEST_CASE("with_override ttl bounds") {
    PumpState s;
    CHECK_THROWS_AS(with_override(s, OverrideMode::ForcedOn, 0, 0), DomainError);
    CHECK_THROWS_AS(with_override(s, OverrideMode::ForcedOn, 86400.5, 0), DomainError);
    CHECK_NOTHROW(with_override(s, OverrideMode::ForcedOff, 86400, 0));
    s = with_override(s, OverrideMode::ForcedOn, 10, 0);
    CHECK(s.override.ttl_remaining(4) == 6);
    s = with_override(s, OverrideMode::None, 0, 5);
    CHECK_FALSE(s.override.active(5));
}

TEST_CASE("override message wire format") {
    const OverrideMessage on{OverrideMode::ForcedOn, 600};
    CHECK(serialize(on) == R"({"v":1,"override":"on","ttl_s":600.0})");
    CHECK(serialize(OverrideMessage{OverrideMode::None, 0}) == R"({"v":1,"override":"clear","ttl_s":0.0})");
    CHECK(parse_override_line(serialize(on) + "\n") == on);
    CHECK(parse_override_line(R"({"v":1,"override":"off","ttl_s":5})") == OverrideMessage{OverrideMode::ForcedOff, 5});

    auto fault = [](std::string_view s) {
        try {
            parse_override_line(s);
        } catch (const ParseError& e) {
            return e.fault();
        }
        return ParseFault::UnknownKey;
    };
    CHECK(fault("nope") == ParseFault::Syntax);
    CHECK(fault(R"({"v":2,"override":"on","ttl_s":1})") == ParseFault::UnknownVersion);
    CHECK(fault(R"({"v":1,"ttl_s":1})") == ParseFault::MissingKey);
    CHECK(fault(R"({"v":1,"override":"maybe","ttl_s":1})") == ParseFault::TypeError);
    CHECK(fault(R"({"v":1,"override":"on","ttl_s":"1"})") == ParseFault::TypeError);

    CHECK(parse_override_mode("clear") == OverrideMode::None);
    CHECK_THROWS_AS(parse_override_mode("ON"), DomainError);
}

TEST_CASE("moisture percent from counts") {
    const sensors::AdcSpec adc;
    CHECK(moisture_pct_from_counts(0, adc) == 100);
    CHECK(moisture_pct_from_counts(1023, adc) == 0);
    CHECK(moisture_pct_from_counts(512, adc) == 50);
    CHECK(moisture_pct_from_counts(-3, adc) == 100);
    for (int c = 1; c <= 1023; ++c) CHECK(moisture_pct_from_counts(c, adc) <= moisture_pct_from_counts(c - 1, adc));
}

TEST_CASE("step_node builds a canonical record") {
    IrrigationPolicy pol;
    NodeConfig cfg;
    NodeState st;
    st.rng = Rng(42);

    const auto r0 = step_node(0.0, env_at(0.2), st, pol, cfg);
    CHECK(r0.dht_sampled);
    CHECK_FALSE(r0.dht_fault);
    CHECK(r0.record.node == "n1");
    CHECK(r0.record.ts_ms == 1767225600000);
    CHECK(r0.record.t_c == 25.0);
    CHECK(r0.record.rh_pct == 65.0);
    CHECK(r0.record.m_pct == 20);
    CHECK(r0.record.m_raw == sensors::adc_quantize(4.0, cfg.adc));
    CHECK(r0.record.rain == 0);
    CHECK(r0.record.pump == 1);
    CHECK(r0.record.f_mlmin == 0.0);   // pump was off during the first tick
    CHECK(r0.command.reason == PumpReason::BelowOnThreshold);
    CHECK(r0.record.p_kpa == doctest::Approx(12.0).epsilon(1e-3));

    // Next tick delivers 135 mL/min * 1 s = 2.25 mL, exactly one pulse.
    const auto r1 = step_node(1.0, env_at(0.2), r0.state, pol, cfg);
    CHECK(r1.record.f_mlmin == 135.0);
    CHECK(r1.record.vol_ml == 2.25);
    CHECK(r1.record.ts_ms == 1767225601000);

    // Rain shuts the pump off even inside the minimum on-time.
    const auto r2 = step_node(2.0, env_at(0.2, 1.0), r1.state, pol, cfg);
    CHECK(r2.record.rain == 1);
    CHECK(r2.record.pump == 0);
    CHECK(r2.command.reason == PumpReason::RainGate);

    CHECK(parse_telemetry_line(serialize(r2.record)) == r2.record);
}

TEST_CASE("step_node samples the DHT11 no faster than its period") {
    IrrigationPolicy pol;
    pol.dht_period_s = 2.0;
    NodeConfig cfg;
    NodeState st;
    int sampled = 0;
    for (int t = 0; t < 10; ++t) {
        auto env = env_at(0.5);
        env.temp_c = 20.0 + t;
        const auto r = step_node(t, env, st, pol, cfg);
        if (r.dht_sampled) {
            ++sampled;
            CHECK(r.record.t_c == 20.0 + t);
        } else {
            CHECK(r.record.t_c == 20.0 + t - 1);
        }
        st = r.state;
    }
    CHECK(sampled == 5);
}

TEST_CASE("DHT faults keep the last good reading") {
    IrrigationPolicy pol;
    NodeConfig cfg;
    NodeState st;
    auto r = step_node(0.0, env_at(0.5), st, pol, cfg);
    REQUIRE_FALSE(r.dht_fault);

    auto hot = env_at(0.5);
    hot.temp_c = 60.0;   // out of the sensor's range
    const auto f = step_node(1.0, hot, r.state, pol, cfg);
    CHECK(f.dht_sampled);
    CHECK(f.dht_fault);
    CHECK(f.fault_detail.find("Range") != std::string::npos);
    CHECK(f.record.t_c == 25.0);
}

TEST_CASE("LCD pages are 16 columns") {
    TelemetryRecord rec;
    rec.ts_ms = 1767225600000 + 3661000;
    rec.t_c = 25.0;
    rec.rh_pct = 65.0;
    rec.m_pct = 45;
    rec.pump = 1;
    rec.f_mlmin = 135.0;
    rec.vol_ml = 2.25;

    const auto p0 = format_lcd(rec, 0);
    CHECK(p0.line1 == "T:25C H:65% R:0 ");
    CHECK(p0.line2 == "M:45% P:1 01:01 ");
    const auto p1 = format_lcd(rec, 1);
    CHECK(p1.line1 == "D:2026-01-01    ");
    CHECK(p1.line2 == "F:0135 V:000002 ");

    rec.t_c = 120.0;
    rec.vol_ml = 5e6;
    CHECK(format_lcd(rec, 0).line1.substr(0, 5) == "T:99C");
    CHECK(format_lcd(rec, 1).line2 == "F:0135 V:999999 ");
    CHECK(format_lcd(rec, 0).line1.size() == kLcdWidth);
}

TEST_CASE("node config validation") {
    NodeConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.node = "";
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.dht_jitter_frac = 0.5;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}
