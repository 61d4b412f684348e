#pragma once

// DHT11 single-wire codec: readings <-> 5-byte frames <-> timed line segments.
//
// Wire layout produced by the sensor after the host start pulse:
//
//   LOW 54us, HIGH 80us                  response
//   40 x (LOW 50us, HIGH 26us | 70us)    data bits, MSB first per byte
//   LOW 54us                             end of frame
//
// A bit is 1 when its HIGH lasts at least `classify_threshold_us`.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agrisim/error.hpp"

namespace agrisim::dht11 {

inline constexpr std::size_t kFrameBytes = 5;
inline constexpr std::size_t kFrameBits = 40;
inline constexpr std::size_t kWaveformSegments = 2 + 2 * kFrameBits + 1;

struct Reading {
    std::uint8_t rh_int = 0;
    std::uint8_t rh_frac = 0;   // tenths of a percent
    std::uint8_t t_int = 0;
    std::uint8_t t_frac = 0;    // tenths of a degree

    double humidity() const { return rh_int + rh_frac / 10.0; }
    double temperature() const { return t_int + t_frac / 10.0; }

    friend bool operator==(const Reading&, const Reading&) = default;
};

using Frame = std::array<std::uint8_t, kFrameBytes>;

struct Timing {
    std::uint32_t start_low_min_us = 18000;
    std::uint32_t resp_low_us = 54;
    std::uint32_t resp_high_us = 80;
    std::uint32_t bit_preamble_low_us = 50;
    std::uint32_t bit0_high_us = 26;
    std::uint32_t bit1_high_us = 70;
    std::uint32_t eof_low_us = 54;
    std::uint32_t classify_threshold_us = 50;
    double tolerance_frac = 0.20;
    // Durations within this distance of the threshold are refused.
    std::uint32_t ambiguity_band_us = 2;
    // A leading LOW at least this long is taken as the host start pulse
    // rather than the sensor response.
    std::uint32_t host_pulse_min_detect_us = 1000;
    std::uint32_t host_release_max_us = 200;
};

enum class Level : std::uint8_t { Low, High };

struct LineSegment {
    Level level = Level::Low;
    std::uint32_t duration_us = 0;

    friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

using Waveform = std::vector<LineSegment>;

enum class Fault {
    Range,
    Checksum,
    FrameSize,
    NoResponse,
    BitCount,
    AmbiguousDuration,
    StartPulseTooShort,
    NotAlternating,
    NoEndOfFrame,
    BadSegment,
};

std::string_view to_string(Fault f);

class CodecError : public Error {
public:
    CodecError(Fault fault, std::string field, const std::string& message)
        : Error(std::move(field), message), fault_(fault) {}

    Fault fault() const noexcept { return fault_; }

private:
    Fault fault_;
};

struct ChecksumMismatch {
    std::uint8_t expected = 0;
    std::uint8_t found = 0;
};

/// Empty on success.
std::optional<ChecksumMismatch> verify_checksum(std::span<const std::uint8_t> bytes);

std::uint8_t checksum_of(std::span<const std::uint8_t> payload);

void validate(const Reading& r);
void validate(const Timing& t);

/// Builds a reading from measured values, truncating to tenths.
Reading reading_from(double rh_pct, double temp_c);

Frame encode_reading(const Reading& r);
Reading frame_to_reading(const Frame& f);

Waveform frame_to_waveform(const Frame& f, const Timing& t = {});

/// Host start pulse (LOW) plus the release HIGH that precedes the response.
Waveform host_start_segments(const Timing& t = {}, std::uint32_t release_us = 30);

Frame decode_waveform(std::span<const LineSegment> segs, const Timing& t = {});

/// Dump format: one `H <us>` or `L <us>` per line, LF-terminated.
std::string format_waveform(std::span<const LineSegment> segs);
void write_waveform(std::ostream& out, std::span<const LineSegment> segs);
Waveform parse_waveform(std::string_view text);
Waveform read_waveform(std::istream& in);

}  // namespace agrisim::dht11
