#pragma once

// Linear power-supply chain arithmetic: transformer, rectifier, 78xx regulator.

#include <optional>
#include <span>
#include <string>

namespace agrisim::power {

inline constexpr double kRegulatorHeadroomV = 3.0;
// Filtered DC level quoted for the 115 V worked example. Not computed.
inline constexpr double kFilteredDcAnnotationV = 110.0;

struct PowerChainSpec {
    double line_v = 115.0;
    double turns_ratio = 3.0;
    int regulator_code = 7805;
    double headroom_v = kRegulatorHeadroomV;
    double output_current_ma = 100.0;
};

std::span<const int> known_regulators();

/// Line voltage times turns ratio, labelled peak-to-peak. The input is an
/// RMS figure; the unit label is kept as in the reference worked example.
double transformer_output_pp(double line_v, double ratio);

/// Half of the peak-to-peak input (each diode conducts for 180 degrees).
double rectifier_output(double v_pp);

struct RegulatorCheck {
    bool ok = false;          // false means insufficient headroom
    double v_out = 0.0;
    double v_in_min = 0.0;
};

/// Output voltage is the code's last two digits; input needs 3 V headroom.
RegulatorCheck regulator_check(double v_in, int code);

struct ChainReport {
    PowerChainSpec spec;
    double transformer_pp = 0.0;
    double rectified = 0.0;
    RegulatorCheck regulator;
};

ChainReport evaluate_chain(const PowerChainSpec& spec);
std::string format_report(const ChainReport& r);

}  // namespace agrisim::power
