#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "agrisim/error.hpp"
#include "agrisim/flow_meter.hpp"

using namespace agrisim::flow;

TEST_CASE("pulse counts to volume and rate") {
    CHECK(pulses_to_volume(0) == 0.0);
    CHECK(pulses_to_volume(1) == 2.25);
    CHECK(pulses_to_volume(1000) == 2250.0);
    CHECK(pulses_to_volume(4, FlowCalib{2.5}) == 10.0);

    CHECK(flow_rate(75, 60.0) == doctest::Approx(168.75));
    CHECK(flow_rate(4, 3.0) == doctest::Approx(180.0));
    CHECK(flow_rate(0, 1.0) == 0.0);
    CHECK_THROWS_AS(flow_rate(1, 0.0), agrisim::DomainError);
    CHECK_THROWS_AS(validate(FlowCalib{0.0}), agrisim::DomainError);
}

TEST_CASE("flow_to_pulses carries the remainder") {
    // 100 mL/min for 1 s is 1.6667 mL per tick.
    PulseAccumulator acc;
    const std::array<std::pair<std::uint64_t, double>, 3> want{{{0, 1.0 + 2.0 / 3.0}, {1, 1.0833333333333335}, {1, 0.5}}};
    for (const auto& [pulses, residual] : want) {
        const auto s = flow_to_pulses(100.0, 1.0, acc);
        CHECK(s.pulses == pulses);
        CHECK(s.acc.residual_ml == doctest::Approx(residual));
        acc = s.acc;
    }

    const auto idle = flow_to_pulses(0.0, 5.0, PulseAccumulator{1.0});
    CHECK(idle.pulses == 0);
    CHECK(idle.acc.residual_ml == 1.0);

    CHECK_THROWS_AS(flow_to_pulses(-1.0, 1.0, {}), agrisim::DomainError);
    CHECK_THROWS_AS(flow_to_pulses(1.0, 0.0, {}), agrisim::DomainError);
}

TEST_CASE("flow_to_pulses conserves volume") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> rate(0.0, 2000.0);
    std::uniform_real_distribution<double> dt(0.01, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        PulseAccumulator acc;
        std::uint64_t pulses = 0;
        double delivered = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const double r = rate(gen);
            const double d = dt(gen);
            delivered += r * d / 60.0;
            const auto s = flow_to_pulses(r, d, acc);
            acc = s.acc;
            pulses += s.pulses;
            REQUIRE(acc.residual_ml >= 0.0);
            REQUIRE(acc.residual_ml < 2.25);
        }
        CHECK(std::abs(pulses_to_volume(pulses) + acc.residual_ml - delivered) < 1e-6 * delivered + 1e-9);
        CHECK(delivered - pulses_to_volume(pulses) < 2.25 + 1e-6);
    }
}

TEST_CASE("FlowMeter accumulates") {
    FlowMeter m;
    const auto a = m.record(10, 1.0);
    CHECK(a.rate_ml_per_min == doctest::Approx(1350.0));
    CHECK(a.cumulative_ml == doctest::Approx(22.5));
    const auto b = m.record(990, 60.0);
    CHECK(b.cumulative_ml == doctest::Approx(2250.0));
    CHECK(m.total_pulses() == 1000);
    CHECK_THROWS_AS(FlowMeter(FlowCalib{-1.0}), agrisim::DomainError);
}
