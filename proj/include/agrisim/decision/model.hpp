#pragma once

// Online depletion model: moisture loss rate (fraction/s) as a linear function
// of (1, temperature, dryness, normalized light), fitted by normalized LMS on
// intervals where neither the pump nor rain adds water.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "agrisim/controller.hpp"
#include "agrisim/error.hpp"
#include "agrisim/sensor_models.hpp"
#include "agrisim/telemetry.hpp"

namespace agrisim::decision {

inline constexpr double kNlmsEpsilon = 1e-8;

using FeatureVector = std::array<double, 4>;

/// The edge's light-sensing chain, needed to turn `lux_raw` counts back into lux.
struct LuxChain {
    sensors::LdrParams ldr;
    double r_fixed = 1e3;
    sensors::AdcSpec adc;
};

double lux_estimate(int lux_raw, const LuxChain& chain);

FeatureVector make_features(double temp_c, double rh_pct, double lux);
FeatureVector features(const TelemetryRecord& rec, const LuxChain& chain);

double dot(const FeatureVector& a, const FeatureVector& b);

struct ModelCoefficients {
    FeatureVector w{};
    std::uint64_t n_samples = 0;
    double learning_rate = 0.05;
};

/// One NLMS step towards target `y` for features `x`.
ModelCoefficients nlms_update(ModelCoefficients m, const FeatureVector& x, double y);

/// True when the interval prev -> cur had neither pump nor rain.
bool is_free_depletion(const TelemetryRecord& prev, const TelemetryRecord& cur);

/// Trains on the observed depletion between two consecutive records of one
/// node. Masked intervals leave the model unchanged.
ModelCoefficients update_model(const ModelCoefficients& m, const TelemetryRecord& prev, const TelemetryRecord& cur,
                               const LuxChain& chain = {});

struct PolicyRecommendation {
    std::string crop_id;
    std::string node;
    std::optional<double> next_irrigation_eta_s;
    double suggested_duration_s = 0.0;
    double predicted_depletion_frac_per_hr = 0.0;
};

struct RecommendParams {
    double pump_rate_ml_per_min = 135.0;
    double plot_capacity_ml_per_moisture_pct = 22.5;
    std::int64_t staleness_ms = 300000;
};

class StaleTelemetry : public Error {
public:
    using Error::Error;
};

/// `now_ms` is the caller's clock; records older than the staleness bound
/// are refused.
PolicyRecommendation recommend_policy(const ModelCoefficients& m, const TelemetryRecord& latest,
                                      const edge::IrrigationPolicy& pol, const RecommendParams& params,
                                      std::int64_t now_ms, const LuxChain& chain = {});

}  // namespace agrisim::decision
