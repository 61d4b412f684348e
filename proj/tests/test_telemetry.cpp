#include <doctest.h>

#include <random>

#include "agrisim/canonical_json.hpp"
#include "agrisim/telemetry.hpp"

using namespace agrisim;

namespace {

TelemetryRecord sample() {
    TelemetryRecord r;
    r.node = "n1";
    r.ts_ms = 1767225600000;
    r.t_c = 25.0;
    r.rh_pct = 65.0;
    r.m_pct = 45;
    r.m_raw = 563;
    r.rain = 0;
    r.lux_raw = 1012;
    r.p_kpa = 11.0;
    r.f_mlmin = 135.0;
    r.vol_ml = 2.25;
    r.pump = 1;
    return r;
}

ParseFault fault_of(std::string_view line) {
    try {
        parse_telemetry_line(line);
    } catch (const ParseError& e) {
        return e.fault();
    }
    FAIL("expected ParseError for " << line);
    return ParseFault::Syntax;
}

}  // namespace

TEST_CASE("canonical serialization") {
    CHECK(serialize(sample()) ==
          R"({"v":1,"node":"n1","ts_ms":1767225600000,"t_c":25.0,"rh_pct":65.0,"m_pct":45,"m_raw":563,)"
          R"("rain":0,"lux_raw":1012,"p_kpa":11.00,"f_mlmin":135.00,"vol_ml":2.25,"pump":1})");

    auto neg = sample();
    neg.t_c = -0.04;   // rounds to zero; no "-0.0"
    canonicalize(neg);
    CHECK(serialize(neg).find("\"t_c\":0.0,") != std::string::npos);
}

TEST_CASE("quantize and format_fixed") {
    CHECK(json::format_fixed(2.25, 2) == "2.25");
    CHECK(json::format_fixed(0.1 + 0.2, 1) == "0.3");
    CHECK(json::quantize(1.25, 1) == 1.3);
    CHECK(json::quantize(-0.0, 1) == 0.0);
    CHECK_FALSE(std::signbit(json::quantize(-0.01, 1)));
    CHECK(json::quote("a\"b\\c\n") == R"("a\"b\\c\n")");
}

TEST_CASE("round trip of random records") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 3000; ++i) {
        TelemetryRecord r;
        r.node = "node-" + std::to_string(gen() % 1000);
        r.ts_ms = static_cast<std::int64_t>(gen() % 4000000000000ULL);
        r.t_c = 50.0 * u(gen);
        r.rh_pct = 20.0 + 70.0 * u(gen);
        r.m_pct = static_cast<int>(gen() % 101);
        r.m_raw = static_cast<int>(gen() % 1024);
        r.rain = static_cast<int>(gen() % 2);
        r.lux_raw = static_cast<int>(gen() % 1024);
        r.p_kpa = 40.0 * u(gen);
        r.f_mlmin = 2000.0 * u(gen);
        r.vol_ml = 1e6 * u(gen);
        r.pump = static_cast<int>(gen() % 2);
        canonicalize(r);
        const auto line = serialize(r);
        const auto back = parse_telemetry_line(line + "\n");
        REQUIRE(back == r);
        REQUIRE(serialize(back) == line);
    }
}

TEST_CASE("parse accepts CRLF and reordered keys") {
    const auto line = serialize(sample());
    CHECK(parse_telemetry_line(line + "\r\n") == sample());
    const std::string reordered =
        R"({"pump":1,"node":"n1","v":1,"ts_ms":1767225600000,"t_c":25,"rh_pct":65,"m_pct":45,"m_raw":563,)"
        R"("rain":0,"lux_raw":1012,"p_kpa":11,"f_mlmin":135,"vol_ml":2.25})";
    CHECK(parse_telemetry_line(reordered) == sample());
}

TEST_CASE("parse errors") {
    const auto good = serialize(sample());
    auto replace = [&](std::string_view from, std::string_view to) {
        auto s = good;
        s.replace(s.find(from), from.size(), to);
        return s;
    };

    CHECK(fault_of("{not json") == ParseFault::Syntax);
    CHECK(fault_of("[1,2]") == ParseFault::Syntax);
    CHECK(fault_of("") == ParseFault::Syntax);
    CHECK(fault_of(replace("\"v\":1", "\"v\":2")) == ParseFault::UnknownVersion);
    CHECK(fault_of(replace("\"v\":1,", "")) == ParseFault::MissingKey);
    CHECK(fault_of(replace(",\"pump\":1", "")) == ParseFault::MissingKey);
    CHECK(fault_of(replace("\"m_pct\":45", "\"m_pct\":\"45\"")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"m_pct\":45", "\"m_pct\":45.5")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"m_pct\":45", "\"m_pct\":101")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"m_raw\":563", "\"m_raw\":1024")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"rain\":0", "\"rain\":2")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"pump\":1", "\"pump\":true")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"node\":\"n1\"", "\"node\":\"bad node\"")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"ts_ms\":1767225600000", "\"ts_ms\":-1")) == ParseFault::TypeError);
    CHECK(fault_of(replace("\"pump\":1}", "\"pump\":1,\"extra\":0}")) == ParseFault::UnknownKey);

    try {
        parse_telemetry_line(replace("\"rain\":0", "\"rain\":\"no\""));
    } catch (const ParseError& e) {
        CHECK(e.field() == "rain");
    }
}

TEST_CASE("node id rule") {
    CHECK(valid_node_id("n1"));
    CHECK(valid_node_id("A.b-c_9"));
    CHECK(valid_node_id(std::string(64, 'x')));
    CHECK_FALSE(valid_node_id(std::string(65, 'x')));
    CHECK_FALSE(valid_node_id(""));
    CHECK_FALSE(valid_node_id("a b"));
    CHECK_FALSE(valid_node_id("a/b"));
}
