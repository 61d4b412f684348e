#pragma once

// Transfer functions from simulated ground truth to the electrical signals
// each edge sensor produces, plus the ground truth's own time evolution.

#include <array>
#include <cstdint>

namespace agrisim::sensors {

inline constexpr double kSupplyVolts = 5.0;
inline constexpr double kPressureFullScaleKpa = 40.0;
inline constexpr double kFullSunLux = 100000.0;

struct EnvState {
    double moisture = 0.5;        // fraction, 0 = bone dry, 1 = saturated
    double rain_wetness = 0.0;    // fraction
    double light_lux = 0.0;
    double temp_c = 25.0;
    double rh_pct = 50.0;
    double soil_pressure_kpa = 0.0;
};

struct LdrParams {
    double r_dark = 1e12;       // ohms at 0 lux
    double r_at_10lux = 10e3;   // ohms
    double gamma = 0.8;
};

struct AdcSpec {
    double vref = kSupplyVolts;
    int bits = 10;

    std::int32_t max_count() const { return (std::int32_t{1} << bits) - 1; }
};

struct RainBoardModel {
    double r_dry = 1e6;
    double r_wet = 10e3;
    double r_fixed = 10e3;
    double v_threshold = 2.6;
};

struct PressureSpec {
    double full_scale_kpa = kPressureFullScaleKpa;
    int gain = 128;       // 32, 64 or 128
    int rate_sps = 10;    // 10 or 80
};

/// Coefficients driving `env_step`. Depletion is linear in
/// (1, temp_c, 1 - rh/100, light/kFullSunLux).
struct EnvDynamics {
    double k_pump = 1e-3;                      // fraction/s while pump runs
    double k_rain = 5e-4;                      // fraction/s per unit wetness
    std::array<double, 4> w_true{1e-5, 2e-6, 3e-5, 1e-5};
    double pressure_base_kpa = 2.0;
    double pressure_per_moisture_kpa = 20.0;
};

struct RainSignals {
    double analog = 0.0;
    bool rain_detected = false;
};

void validate(const LdrParams& p);
void validate(const AdcSpec& spec);
void validate(const RainBoardModel& m, double vcc);
void validate(const PressureSpec& spec);
void validate(const EnvDynamics& dyn);
void validate(const EnvState& env);

/// Photoresistor power law, clamped at the dark resistance.
double ldr_resistance(double lux, const LdrParams& p);

/// Inverse of `ldr_resistance`; resistances at or above r_dark map to 0 lux.
double ldr_lux(double ohms, const LdrParams& p);

/// Sensor on the top leg, fixed resistor on the bottom; output is taken
/// across the fixed resistor.
double divider_voltage(double r_sensor, double r_fixed, double vcc);

/// Inverse of `divider_voltage` for v in (0, vcc].
double divider_sensor_resistance(double v_out, double r_fixed, double vcc);

std::int32_t adc_quantize(double volts, const AdcSpec& spec);

/// Midpoint voltage of an ADC code bin.
double adc_code_center(std::int32_t counts, const AdcSpec& spec);

/// Resistive probe: 5 V dry, 0 V saturated, linear in between.
double soil_moisture_voltage(double moisture);

/// Digital companion output of the moisture probe: LOW (false) means the
/// soil is moist enough.
bool soil_moisture_digital(double analog_volts, double set_point_volts);

/// The rain board sits on the bottom leg of the divider, so a dry board
/// reads high and a wet one reads low. Detection is a strict `<`.
RainSignals rain_signals(double wetness, const RainBoardModel& m, double vcc);

/// Ideal 24-bit bridge ADC reading for a pressure in [0, 40] kPa.
std::int32_t pressure_counts(double p_kpa, const PressureSpec& spec);
double pressure_from_counts(std::int32_t counts, const PressureSpec& spec);

double depletion_rate(const std::array<double, 4>& w, double temp_c, double rh_pct, double light_lux);

EnvState env_step(const EnvState& env, const EnvDynamics& dyn, double dt_s, bool pump_on,
                  double weather_rain, double weather_light);

}  // namespace agrisim::sensors
