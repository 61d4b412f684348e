#pragma once

// Writer for the flat canonical JSON subset shared by the telemetry wire
// format, the HTTP API and scenario files: keys in a fixed order, no
// whitespace, fixed decimal places per numeric field.

#include <cstdint>
#include <string>
#include <string_view>

namespace agrisim::json {

/// Rounds `value` to `places` decimals such that printing it with the same
/// number of places and parsing it back yields the identical double.
double quantize(double value, int places);

std::string format_fixed(double value, int places);
std::string quote(std::string_view s);

class ObjectWriter {
public:
    ObjectWriter& field(std::string_view key, std::int64_t value);
    ObjectWriter& field(std::string_view key, std::string_view value);
    ObjectWriter& field(std::string_view key, const char* value) { return field(key, std::string_view(value)); }
    ObjectWriter& field(std::string_view key, bool value);
    ObjectWriter& fixed(std::string_view key, double value, int places);
    /// Inserts pre-serialized JSON (an array or nested object) verbatim.
    ObjectWriter& raw(std::string_view key, std::string_view json);
    ObjectWriter& null(std::string_view key);

    std::string str() const { return body_ + "}"; }

private:
    void key(std::string_view k);
    std::string body_ = "{";
};

}  // namespace agrisim::json
