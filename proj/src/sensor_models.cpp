#include "agrisim/sensor_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "agrisim/error.hpp"

namespace agrisim::sensors {

namespace {

void require(bool ok, const char* field, const std::string& message) {
    if (!ok) throw DomainError(field, message);
}

void require_fraction(double v, const char* field) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, field, "must be a fraction in [0, 1]");
}

}  // namespace

void validate(const LdrParams& p) {
    require(p.r_at_10lux > 0.0, "r_at_10lux", "must be > 0");
    require(p.r_dark > p.r_at_10lux, "r_dark", "must exceed r_at_10lux");
    require(p.gamma > 0.0, "gamma", "must be > 0");
}

void validate(const AdcSpec& spec) {
    require(spec.bits >= 1 && spec.bits <= 30, "bits", "must be in [1, 30]");
    require(spec.vref > 0.0, "vref", "must be > 0");
}

void validate(const RainBoardModel& m, double vcc) {
    require(m.r_wet > 0.0, "r_wet", "must be > 0");
    require(m.r_dry > m.r_wet, "r_dry", "must exceed r_wet");
    require(m.r_fixed > 0.0, "r_fixed", "must be > 0");
    require(m.v_threshold > 0.0 && m.v_threshold < vcc, "v_threshold", "must lie in (0, vcc)");
}

void validate(const PressureSpec& spec) {
    require(spec.gain == 32 || spec.gain == 64 || spec.gain == 128, "gain", "must be 32, 64 or 128");
    require(spec.rate_sps == 10 || spec.rate_sps == 80, "rate_sps", "must be 10 or 80");
    require(spec.full_scale_kpa == kPressureFullScaleKpa, "full_scale_kpa", "must be 40");
}

void validate(const EnvDynamics& dyn) {
    require(dyn.k_pump > 0.0, "k_pump", "must be > 0");
    require(dyn.k_rain >= 0.0, "k_rain", "must be >= 0");
    for (double w : dyn.w_true) require(std::isfinite(w) && w >= 0.0, "w", "coefficients must be >= 0");
    const double lo = dyn.pressure_base_kpa;
    const double hi = dyn.pressure_base_kpa + dyn.pressure_per_moisture_kpa;
    require(std::min(lo, hi) >= 0.0 && std::max(lo, hi) <= kPressureFullScaleKpa, "pressure_base_kpa",
            "soil pressure must stay within [0, 40] kPa for moisture in [0, 1]");
}

void validate(const EnvState& env) {
    require_fraction(env.moisture, "moisture");
    require_fraction(env.rain_wetness, "rain_wetness");
    require(env.light_lux >= 0.0, "light_lux", "must be >= 0");
    require(std::isfinite(env.temp_c), "temp_c", "must be finite");
    require(env.rh_pct >= 0.0 && env.rh_pct <= 100.0, "rh_pct", "must be in [0, 100]");
    require(env.soil_pressure_kpa >= 0.0 && env.soil_pressure_kpa <= kPressureFullScaleKpa,
            "soil_pressure_kpa", "must be in [0, 40]");
}

double ldr_resistance(double lux, const LdrParams& p) {
    require(std::isfinite(lux) && lux >= 0.0, "lux", "must be >= 0");
    if (lux == 0.0) return p.r_dark;
    return std::min(p.r_dark, p.r_at_10lux * std::pow(lux / 10.0, -p.gamma));
}

double ldr_lux(double ohms, const LdrParams& p) {
    if (ohms >= p.r_dark) return 0.0;
    return 10.0 * std::pow(ohms / p.r_at_10lux, -1.0 / p.gamma);
}

double divider_voltage(double r_sensor, double r_fixed, double vcc) {
    require(r_fixed > 0.0, "r_fixed", "must be > 0");
    require(r_sensor >= 0.0, "r_sensor", "must be >= 0");
    require(vcc > 0.0, "vcc", "must be > 0");
    return vcc * r_fixed / (r_sensor + r_fixed);
}

double divider_sensor_resistance(double v_out, double r_fixed, double vcc) {
    require(v_out > 0.0 && v_out <= vcc, "v_out", "must lie in (0, vcc]");
    return r_fixed * (vcc - v_out) / v_out;
}

std::int32_t adc_quantize(double volts, const AdcSpec& spec) {
    const double scaled = std::floor(volts / spec.vref * static_cast<double>(std::int64_t{1} << spec.bits));
    if (!(scaled > 0.0)) return 0;  // also catches NaN
    return static_cast<std::int32_t>(std::min<double>(scaled, spec.max_count()));
}

double adc_code_center(std::int32_t counts, const AdcSpec& spec) {
    const auto c = std::clamp(counts, 0, spec.max_count());
    return (c + 0.5) * spec.vref / static_cast<double>(std::int64_t{1} << spec.bits);
}

double soil_moisture_voltage(double moisture) {
    require_fraction(moisture, "moisture");
    return kSupplyVolts * (1.0 - moisture);
}

bool soil_moisture_digital(double analog_volts, double set_point_volts) {
    return !(analog_volts < set_point_volts);
}

RainSignals rain_signals(double wetness, const RainBoardModel& m, double vcc) {
    require_fraction(wetness, "wetness");
    const double board = m.r_dry + wetness * (m.r_wet - m.r_dry);
    // Board on the bottom leg: output = vcc * board / (r_fixed + board).
    RainSignals out;
    out.analog = divider_voltage(m.r_fixed, board, vcc);
    out.rain_detected = out.analog < m.v_threshold;
    return out;
}

std::int32_t pressure_counts(double p_kpa, const PressureSpec& spec) {
    require(std::isfinite(p_kpa) && p_kpa >= 0.0 && p_kpa <= spec.full_scale_kpa, "p_kpa",
            "must be in [0, 40] kPa");
    constexpr double kMax = (1 << 23) - 1;
    const double raw = std::round(p_kpa / spec.full_scale_kpa * kMax * spec.gain / 128.0);
    return static_cast<std::int32_t>(std::clamp(raw, -kMax - 1.0, kMax));
}

double pressure_from_counts(std::int32_t counts, const PressureSpec& spec) {
    constexpr double kMax = (1 << 23) - 1;
    return counts / kMax * 128.0 / spec.gain * spec.full_scale_kpa;
}

double depletion_rate(const std::array<double, 4>& w, double temp_c, double rh_pct, double light_lux) {
    return w[0] + w[1] * temp_c + w[2] * (1.0 - rh_pct / 100.0) + w[3] * (light_lux / kFullSunLux);
}

EnvState env_step(const EnvState& env, const EnvDynamics& dyn, double dt_s, bool pump_on,
                  double weather_rain, double weather_light) {
    require(dt_s > 0.0, "dt", "must be > 0");
    require_fraction(weather_rain, "weather_rain");
    require(weather_light >= 0.0, "weather_light", "must be >= 0");

    const double inflow = (pump_on ? dyn.k_pump : 0.0) + dyn.k_rain * weather_rain;
    const double outflow = depletion_rate(dyn.w_true, env.temp_c, env.rh_pct, weather_light);

    EnvState next = env;
    next.moisture = std::clamp(env.moisture + (inflow - outflow) * dt_s, 0.0, 1.0);
    next.rain_wetness = weather_rain;
    next.light_lux = weather_light;
    next.soil_pressure_kpa = std::clamp(dyn.pressure_base_kpa + dyn.pressure_per_moisture_kpa * next.moisture, 0.0,
                                        kPressureFullScaleKpa);
    return next;
}

}  // namespace agrisim::sensors
