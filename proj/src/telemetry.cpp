#include "agrisim/telemetry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

#include "agrisim/canonical_json.hpp"

namespace agrisim {

namespace {

constexpr std::array<std::string_view, 13> kKeys{"v",      "node",    "ts_ms",   "t_c",     "rh_pct",
                                                 "m_pct",  "m_raw",   "rain",    "lux_raw", "p_kpa",
                                                 "f_mlmin", "vol_ml", "pump"};

[[noreturn]] void fail(ParseFault fault, std::string_view key, const std::string& message) {
    throw ParseError(fault, std::string(key), message);
}

const nlohmann::json& member(const nlohmann::json& obj, std::string_view key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(ParseFault::MissingKey, key, "missing key");
    return *it;
}

std::int64_t integer(const nlohmann::json& obj, std::string_view key, std::int64_t lo, std::int64_t hi) {
    const auto& v = member(obj, key);
    if (!v.is_number_integer()) fail(ParseFault::TypeError, key, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
        fail(ParseFault::TypeError, key, "integer out of range");
    }
    const auto n = v.get<std::int64_t>();
    if (n < lo || n > hi) fail(ParseFault::TypeError, key, "integer out of range");
    return n;
}

double decimal(const nlohmann::json& obj, std::string_view key, int places) {
    const auto& v = member(obj, key);
    if (!v.is_number()) fail(ParseFault::TypeError, key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ParseFault::TypeError, key, "expected a finite number");
    return json::quantize(d, places);
}

}  // namespace

std::string_view to_string(ParseFault f) {
    switch (f) {
        case ParseFault::Syntax: return "SyntaxError";
        case ParseFault::UnknownVersion: return "UnknownVersion";
        case ParseFault::MissingKey: return "MissingKey";
        case ParseFault::TypeError: return "TypeError";
        case ParseFault::UnknownKey: return "UnknownKey";
    }
    return "unknown";
}

void canonicalize(TelemetryRecord& rec) {
    rec.t_c = json::quantize(rec.t_c, 1);
    rec.rh_pct = json::quantize(rec.rh_pct, 1);
    rec.p_kpa = json::quantize(rec.p_kpa, 2);
    rec.f_mlmin = json::quantize(rec.f_mlmin, 2);
    rec.vol_ml = json::quantize(rec.vol_ml, 2);
}

bool valid_node_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

std::string serialize(const TelemetryRecord& rec) {
    return json::ObjectWriter{}
        .field("v", std::int64_t{kWireVersion})
        .field("node", rec.node)
        .field("ts_ms", rec.ts_ms)
        .fixed("t_c", rec.t_c, 1)
        .fixed("rh_pct", rec.rh_pct, 1)
        .field("m_pct", std::int64_t{rec.m_pct})
        .field("m_raw", std::int64_t{rec.m_raw})
        .field("rain", std::int64_t{rec.rain})
        .field("lux_raw", std::int64_t{rec.lux_raw})
        .fixed("p_kpa", rec.p_kpa, 2)
        .fixed("f_mlmin", rec.f_mlmin, 2)
        .fixed("vol_ml", rec.vol_ml, 2)
        .field("pump", std::int64_t{rec.pump})
        .str();
}

TelemetryRecord parse_telemetry_line(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ParseFault::Syntax, "line", e.what());
    }
    if (!obj.is_object()) fail(ParseFault::Syntax, "line", "expected a JSON object");

    const auto& v = member(obj, "v");
    if (!v.is_number_integer() || v.get<std::int64_t>() != kWireVersion) {
        fail(ParseFault::UnknownVersion, "v", "unsupported wire version " + v.dump());
    }

    TelemetryRecord rec;
    const auto& node = member(obj, "node");
    if (!node.is_string() || !valid_node_id(node.get_ref<const std::string&>())) {
        fail(ParseFault::TypeError, "node", "expected a node id string");
    }
    rec.node = node.get<std::string>();
    rec.ts_ms = integer(obj, "ts_ms", 0, INT64_MAX);
    rec.t_c = decimal(obj, "t_c", 1);
    rec.rh_pct = decimal(obj, "rh_pct", 1);
    rec.m_pct = static_cast<int>(integer(obj, "m_pct", 0, 100));
    rec.m_raw = static_cast<int>(integer(obj, "m_raw", 0, 1023));
    rec.rain = static_cast<int>(integer(obj, "rain", 0, 1));
    rec.lux_raw = static_cast<int>(integer(obj, "lux_raw", 0, 1023));
    rec.p_kpa = decimal(obj, "p_kpa", 2);
    rec.f_mlmin = decimal(obj, "f_mlmin", 2);
    rec.vol_ml = decimal(obj, "vol_ml", 2);
    rec.pump = static_cast<int>(integer(obj, "pump", 0, 1));

    if (obj.size() != kKeys.size()) {
        for (const auto& [key, _] : obj.items()) {
            if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
                fail(ParseFault::UnknownKey, key, "unexpected key");
            }
        }
    }
    return rec;
}

}  // namespace agrisim
