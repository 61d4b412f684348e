#include "agrisim/power.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "agrisim/error.hpp"

namespace agrisim::power {

namespace {

constexpr std::array<int, 9> kRegulators{7805, 7806, 7808, 7809, 7810, 7812, 7815, 7818, 7824};

}  // namespace

std::span<const int> known_regulators() { return kRegulators; }

double transformer_output_pp(double line_v, double ratio) {
    if (!(line_v > 0.0)) throw DomainError("line", "line voltage must be > 0");
    if (!(ratio > 0.0)) throw DomainError("ratio", "turns ratio must be > 0");
    return line_v * ratio;
}

double rectifier_output(double v_pp) {
    if (!(v_pp > 0.0)) throw DomainError("v_pp", "must be > 0");
    return v_pp / 2.0;
}

RegulatorCheck regulator_check(double v_in, int code) {
    if (std::find(kRegulators.begin(), kRegulators.end(), code) == kRegulators.end()) {
        throw DomainError("reg", "unknown regulator code " + std::to_string(code));
    }
    RegulatorCheck out;
    out.v_out = code % 100;
    out.v_in_min = out.v_out + kRegulatorHeadroomV;
    out.ok = v_in >= out.v_in_min;
    return out;
}

ChainReport evaluate_chain(const PowerChainSpec& spec) {
    ChainReport r;
    r.spec = spec;
    r.transformer_pp = transformer_output_pp(spec.line_v, spec.turns_ratio);
    r.rectified = rectifier_output(r.transformer_pp);
    r.regulator = regulator_check(r.rectified, spec.regulator_code);
    return r;
}

std::string format_report(const ChainReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "transformer: %.1f V AC x %g = %.1f V p-p\n"
                  "rectifier:   %.1f V pulsing DC\n"
                  "filter:      ~%.0f V DC with ripple (reference annotation, not computed)\n"
                  "regulator:   %d -> %.0f V out, needs >= %.1f V in: %s\n",
                  r.spec.line_v, r.spec.turns_ratio, r.transformer_pp, r.rectified, kFilteredDcAnnotationV,
                  r.spec.regulator_code, r.regulator.v_out, r.regulator.v_in_min,
                  r.regulator.ok ? "ok" : "insufficient headroom");
    return buf;
}

}  // namespace agrisim::power
