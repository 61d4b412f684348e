#pragma once

// One edge-node observation and its line-oriented wire/persistence format:
//
//   {"v":1,"node":"n1","ts_ms":...,"t_c":25.0,"rh_pct":65.0,"m_pct":45,
//    "m_raw":563,"rain":0,"lux_raw":1012,"p_kpa":11.00,"f_mlmin":135.00,
//    "vol_ml":2.25,"pump":1}
//
// Keys always appear in this order; one record per LF-terminated line.

#include <cstdint>
#include <string>
#include <string_view>

#include "agrisim/error.hpp"

namespace agrisim {

inline constexpr int kWireVersion = 1;

struct TelemetryRecord {
    std::string node;
    std::int64_t ts_ms = 0;
    double t_c = 0.0;        // 1 decimal
    double rh_pct = 0.0;     // 1 decimal
    int m_pct = 0;
    int m_raw = 0;           // ADC counts
    int rain = 0;            // 0 | 1
    int lux_raw = 0;         // ADC counts
    double p_kpa = 0.0;      // 2 decimals
    double f_mlmin = 0.0;    // 2 decimals
    double vol_ml = 0.0;     // 2 decimals
    int pump = 0;            // 0 | 1

    friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

/// Rounds the decimal fields to their wire precision in place.
void canonicalize(TelemetryRecord& rec);

/// Node ids are restricted to [A-Za-z0-9_.-], 1..64 characters.
bool valid_node_id(std::string_view id);

/// Serialized record without the trailing LF.
std::string serialize(const TelemetryRecord& rec);

enum class ParseFault { Syntax, UnknownVersion, MissingKey, TypeError, UnknownKey };

std::string_view to_string(ParseFault f);

class ParseError : public Error {
public:
    ParseError(ParseFault fault, std::string key, const std::string& message)
        : Error(std::move(key), message), fault_(fault) {}

    ParseFault fault() const noexcept { return fault_; }

private:
    ParseFault fault_;
};

/// Accepts a line with or without its trailing LF (and a tolerated CR).
TelemetryRecord parse_telemetry_line(std::string_view line);

}  // namespace agrisim
