#include "agrisim/canonical_json.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace agrisim::json {

double quantize(double value, int places) {
    const double scale = std::pow(10.0, places);
    // Integer / power-of-ten is correctly rounded, so the result is the
    // double nearest the decimal string "%.Nf" prints. Adding 0.0 drops -0.
    return std::round(value * scale) / scale + 0.0;
}

std::string format_fixed(double value, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, quantize(value, places));
    return buf;
}

std::string quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

void ObjectWriter::key(std::string_view k) {
    if (body_.size() > 1) body_ += ',';
    body_ += '"';
    body_ += k;
    body_ += "\":";
}

ObjectWriter& ObjectWriter::field(std::string_view k, std::int64_t value) {
    key(k);
    body_ += std::to_string(value);
    return *this;
}

ObjectWriter& ObjectWriter::field(std::string_view k, std::string_view value) {
    key(k);
    body_ += quote(value);
    return *this;
}

ObjectWriter& ObjectWriter::field(std::string_view k, bool value) {
    key(k);
    body_ += value ? "true" : "false";
    return *this;
}

ObjectWriter& ObjectWriter::fixed(std::string_view k, double value, int places) {
    key(k);
    body_ += format_fixed(value, places);
    return *this;
}

ObjectWriter& ObjectWriter::raw(std::string_view k, std::string_view json) {
    key(k);
    body_ += json;
    return *this;
}

ObjectWriter& ObjectWriter::null(std::string_view k) {
    key(k);
    body_ += "null";
    return *this;
}

}  // namespace agrisim::json
