#include "agrisim/dht11.hpp"

#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <tuple>

namespace agrisim::dht11 {

namespace {

[[noreturn]] void fail(Fault fault, std::string field, const std::string& message) {
    throw CodecError(fault, std::move(field), message);
}

void check_range(unsigned value, unsigned lo, unsigned hi, const char* field) {
    if (value < lo || value > hi) {
        fail(Fault::Range, field,
             std::to_string(value) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

bool within(std::uint32_t measured, std::uint32_t nominal, double tol) {
    return std::abs(static_cast<double>(measured) - nominal) <= tol * nominal;
}

}  // namespace

std::string_view to_string(Fault f) {
    switch (f) {
        case Fault::Range: return "RangeError";
        case Fault::Checksum: return "ChecksumError";
        case Fault::FrameSize: return "FrameSizeError";
        case Fault::NoResponse: return "NoResponse";
        case Fault::BitCount: return "BitCountError";
        case Fault::AmbiguousDuration: return "AmbiguousDuration";
        case Fault::StartPulseTooShort: return "StartPulseTooShort";
        case Fault::NotAlternating: return "NotAlternating";
        case Fault::NoEndOfFrame: return "NoEndOfFrame";
        case Fault::BadSegment: return "BadSegment";
    }
    return "unknown";
}

std::uint8_t checksum_of(std::span<const std::uint8_t> payload) {
    unsigned sum = 0;
    for (auto b : payload) sum += b;
    return static_cast<std::uint8_t>(sum & 0xFFu);
}

std::optional<ChecksumMismatch> verify_checksum(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kFrameBytes) {
        fail(Fault::FrameSize, "frame", "expected 5 octets, got " + std::to_string(bytes.size()));
    }
    const auto expected = checksum_of(bytes.first(4));
    if (expected == bytes[4]) return std::nullopt;
    return ChecksumMismatch{expected, bytes[4]};
}

void validate(const Reading& r) {
    check_range(r.rh_int, 20, 90, "rh_int");
    check_range(r.rh_frac, 0, 9, "rh_frac");
    check_range(r.t_int, 0, 50, "t_int");
    check_range(r.t_frac, 0, 9, "t_frac");
}

void validate(const Timing& t) {
    if (!(t.bit0_high_us < t.classify_threshold_us && t.classify_threshold_us < t.bit1_high_us)) {
        throw ConfigError("classify_threshold_us", "must lie strictly between bit0_high_us and bit1_high_us");
    }
    if (!(t.tolerance_frac >= 0.0 && t.tolerance_frac <= 0.3)) {
        throw ConfigError("tolerance_frac", "must be in [0, 0.3]");
    }
}

Reading reading_from(double rh_pct, double temp_c) {
    const auto split = [](double v, const char* field) {
        const double tenths = std::round(v * 10.0);
        if (!(tenths >= 0.0 && tenths < 2560.0)) fail(Fault::Range, field, "value not encodable");
        const auto n = static_cast<unsigned>(tenths);
        return std::pair{static_cast<std::uint8_t>(n / 10), static_cast<std::uint8_t>(n % 10)};
    };
    Reading r;
    std::tie(r.rh_int, r.rh_frac) = split(rh_pct, "rh_int");
    std::tie(r.t_int, r.t_frac) = split(temp_c, "t_int");
    validate(r);
    return r;
}

Frame encode_reading(const Reading& r) {
    validate(r);
    Frame f{r.rh_int, r.rh_frac, r.t_int, r.t_frac, 0};
    f[4] = checksum_of(std::span(f).first(4));
    return f;
}

Reading frame_to_reading(const Frame& f) {
    if (auto bad = verify_checksum(f)) {
        fail(Fault::Checksum, "checksum",
             "expected " + std::to_string(bad->expected) + ", found " + std::to_string(bad->found));
    }
    Reading r{f[0], f[1], f[2], f[3]};
    validate(r);
    return r;
}

Waveform frame_to_waveform(const Frame& f, const Timing& t) {
    if (auto bad = verify_checksum(f)) {
        fail(Fault::Checksum, "checksum", "refusing to emit a frame with an inconsistent checksum");
    }
    Waveform out;
    out.reserve(kWaveformSegments);
    out.push_back({Level::Low, t.resp_low_us});
    out.push_back({Level::High, t.resp_high_us});
    for (auto byte : f) {
        for (int bit = 7; bit >= 0; --bit) {
            out.push_back({Level::Low, t.bit_preamble_low_us});
            out.push_back({Level::High, ((byte >> bit) & 1u) ? t.bit1_high_us : t.bit0_high_us});
        }
    }
    out.push_back({Level::Low, t.eof_low_us});
    return out;
}

Waveform host_start_segments(const Timing& t, std::uint32_t release_us) {
    return {{Level::Low, t.start_low_min_us}, {Level::High, release_us}};
}

Frame decode_waveform(std::span<const LineSegment> segs, const Timing& t) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].duration_us == 0) fail(Fault::BadSegment, "duration_us", "segment " + std::to_string(i) + " has zero length");
        if (i > 0 && segs[i].level == segs[i - 1].level) {
            fail(Fault::NotAlternating, "level", "segments " + std::to_string(i - 1) + " and " + std::to_string(i) + " share a level");
        }
    }

    std::size_t pos = 0;
    if (!segs.empty() && segs[0].level == Level::Low && segs[0].duration_us >= t.host_pulse_min_detect_us) {
        if (segs[0].duration_us < t.start_low_min_us) {
            fail(Fault::StartPulseTooShort, "start_low_us",
                 "host start pulse of " + std::to_string(segs[0].duration_us) + "us is shorter than " +
                     std::to_string(t.start_low_min_us) + "us");
        }
        if (segs.size() < 2 || segs[1].duration_us > t.host_release_max_us) {
            fail(Fault::NoResponse, "response", "no host release after the start pulse");
        }
        pos = 2;
    }

    if (segs.size() < pos + 2 || segs[pos].level != Level::Low || !within(segs[pos].duration_us, t.resp_low_us, t.tolerance_frac) ||
        !within(segs[pos + 1].duration_us, t.resp_high_us, t.tolerance_frac)) {
        fail(Fault::NoResponse, "response", "sensor response pulse pair not recognised");
    }
    pos += 2;

    Frame frame{};
    std::size_t bits = 0;
    bool saw_eof = false;
    while (pos < segs.size()) {
        // segs[pos] is LOW by alternation.
        if (pos + 1 == segs.size()) {
            saw_eof = true;
            break;
        }
        const auto high = segs[pos + 1].duration_us;
        const auto gap = std::abs(static_cast<long>(high) - static_cast<long>(t.classify_threshold_us));
        if (gap <= static_cast<long>(t.ambiguity_band_us)) {
            fail(Fault::AmbiguousDuration, "bit",
                 "bit " + std::to_string(bits) + " HIGH of " + std::to_string(high) + "us is too close to the threshold");
        }
        if (bits < kFrameBits && high >= t.classify_threshold_us) {
            frame[bits / 8] |= static_cast<std::uint8_t>(0x80u >> (bits % 8));
        }
        ++bits;
        pos += 2;
    }

    if (bits != kFrameBits) fail(Fault::BitCount, "bits", "expected 40 bit cells, found " + std::to_string(bits));
    if (!saw_eof) fail(Fault::NoEndOfFrame, "eof", "frame not terminated by a LOW level");

    if (auto bad = verify_checksum(frame)) {
        fail(Fault::Checksum, "checksum",
             "expected " + std::to_string(bad->expected) + ", found " + std::to_string(bad->found));
    }
    return frame;
}

void write_waveform(std::ostream& out, std::span<const LineSegment> segs) {
    for (const auto& s : segs) out << (s.level == Level::High ? 'H' : 'L') << ' ' << s.duration_us << '\n';
}

std::string format_waveform(std::span<const LineSegment> segs) {
    std::ostringstream os;
    write_waveform(os, segs);
    return os.str();
}

Waveform parse_waveform(std::string_view text) {
    Waveform out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        if (nl == std::string_view::npos) fail(Fault::BadSegment, "line " + std::to_string(line_no), "missing LF terminator");
        const auto line = text.substr(0, nl);
        text.remove_prefix(nl + 1);

        const auto bad = [&] { fail(Fault::BadSegment, "line " + std::to_string(line_no), "expected `H <us>` or `L <us>`"); };
        if (line.size() < 3 || (line[0] != 'H' && line[0] != 'L') || line[1] != ' ') bad();
        if (line[2] == '0' && line.size() > 3) bad();
        std::uint64_t us = 0;
        for (char c : line.substr(2)) {
            if (c < '0' || c > '9') bad();
            us = us * 10 + static_cast<unsigned>(c - '0');
            if (us > UINT32_MAX) bad();
        }
        if (us == 0) bad();
        out.push_back({line[0] == 'H' ? Level::High : Level::Low, static_cast<std::uint32_t>(us)});
    }
    return out;
}

Waveform read_waveform(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_waveform(text);
}

}  // namespace agrisim::dht11
