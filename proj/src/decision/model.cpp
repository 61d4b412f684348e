#include "agrisim/decision/model.hpp"

#include <algorithm>
#include <cmath>

namespace agrisim::decision {

double lux_estimate(int lux_raw, const LuxChain& chain) {
    if (lux_raw <= 0) return 0.0;
    const double v = sensors::adc_code_center(lux_raw, chain.adc);
    const double r = sensors::divider_sensor_resistance(std::min(v, chain.adc.vref), chain.r_fixed, chain.adc.vref);
    return sensors::ldr_lux(r, chain.ldr);
}

FeatureVector make_features(double temp_c, double rh_pct, double lux) {
    return {1.0, temp_c, 1.0 - rh_pct / 100.0, lux / sensors::kFullSunLux};
}

FeatureVector features(const TelemetryRecord& rec, const LuxChain& chain) {
    return make_features(rec.t_c, rec.rh_pct, lux_estimate(rec.lux_raw, chain));
}

double dot(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

ModelCoefficients nlms_update(ModelCoefficients m, const FeatureVector& x, double y) {
    const double err = y - dot(m.w, x);
    const double step = m.learning_rate * err / (kNlmsEpsilon + dot(x, x));
    for (std::size_t i = 0; i < x.size(); ++i) m.w[i] += step * x[i];
    ++m.n_samples;
    return m;
}

bool is_free_depletion(const TelemetryRecord& prev, const TelemetryRecord& cur) {
    return prev.pump == 0 && cur.pump == 0 && prev.rain == 0 && cur.rain == 0;
}

ModelCoefficients update_model(const ModelCoefficients& m, const TelemetryRecord& prev, const TelemetryRecord& cur,
                               const LuxChain& chain) {
    if (prev.node != cur.node) throw DomainError("node", "records belong to different nodes");
    if (cur.ts_ms <= prev.ts_ms) throw DomainError("ts_ms", "timestamps must increase");
    if (!is_free_depletion(prev, cur)) return m;

    const double dt_s = static_cast<double>(cur.ts_ms - prev.ts_ms) / 1000.0;
    const double y = (prev.m_pct - cur.m_pct) / 100.0 / dt_s;
    return nlms_update(m, features(prev, chain), y);
}

PolicyRecommendation recommend_policy(const ModelCoefficients& m, const TelemetryRecord& latest,
                                      const edge::IrrigationPolicy& pol, const RecommendParams& params,
                                      std::int64_t now_ms, const LuxChain& chain) {
    for (double w : m.w) {
        if (!std::isfinite(w)) throw DomainError("w", "model coefficients are not finite");
    }
    if (!(params.pump_rate_ml_per_min > 0.0)) throw DomainError("pump_rate_ml_per_min", "must be > 0");
    if (!(params.plot_capacity_ml_per_moisture_pct > 0.0)) {
        throw DomainError("plot_capacity_ml_per_moisture_pct", "must be > 0");
    }
    if (now_ms - latest.ts_ms > params.staleness_ms) {
        throw StaleTelemetry("ts_ms", "latest record is " + std::to_string(now_ms - latest.ts_ms) +
                                          " ms old, bound is " + std::to_string(params.staleness_ms) + " ms");
    }

    PolicyRecommendation rec;
    rec.crop_id = pol.crop_id;
    rec.node = latest.node;

    const double d = std::max(0.0, dot(m.w, features(latest, chain)));
    rec.predicted_depletion_frac_per_hr = d * 3600.0;
    if (latest.m_pct <= pol.m_on_pct) {
        rec.next_irrigation_eta_s = 0.0;
    } else if (d > 0.0) {
        rec.next_irrigation_eta_s = (latest.m_pct - pol.m_on_pct) / 100.0 / d;
    }

    const double pct_per_s = params.pump_rate_ml_per_min / 60.0 / params.plot_capacity_ml_per_moisture_pct;
    rec.suggested_duration_s = (pol.m_off_pct - pol.m_on_pct) / pct_per_s;
    return rec;
}

}  // namespace agrisim::decision
