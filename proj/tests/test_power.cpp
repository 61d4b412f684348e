#include <doctest.h>

#include <cmath>

#include "agrisim/error.hpp"
#include "agrisim/power.hpp"

using namespace agrisim::power;

TEST_CASE("transformer and rectifier for the 115 V chain") {
    CHECK(transformer_output_pp(115.0, 3.0) == 345.0);
    CHECK(rectifier_output(345.0) == 172.5);
    // The quoted "roughly 173" is within half a percent.
    CHECK(std::abs(172.5 - 173.0) / 173.0 < 0.005);

    CHECK_THROWS_AS(transformer_output_pp(0.0, 3.0), agrisim::DomainError);
    CHECK_THROWS_AS(transformer_output_pp(115.0, -1.0), agrisim::DomainError);
    CHECK_THROWS_AS(rectifier_output(0.0), agrisim::DomainError);
}

TEST_CASE("regulator headroom") {
    const auto ok = regulator_check(8.0, 7805);
    CHECK(ok.ok);
    CHECK(ok.v_out == 5.0);
    CHECK(ok.v_in_min == 8.0);
    CHECK_FALSE(regulator_check(7.999, 7805).ok);

    CHECK(regulator_check(15.0, 7812).ok);
    CHECK_FALSE(regulator_check(14.9, 7812).ok);
    CHECK(regulator_check(27.0, 7824).v_out == 24.0);

    for (int code : known_regulators()) {
        const double vout = code % 100;
        CHECK(regulator_check(vout + 3.0, code).ok);
        CHECK_FALSE(regulator_check(std::nextafter(vout + 3.0, 0.0), code).ok);
    }

    try {
        regulator_check(12.0, 7811);
        FAIL("expected DomainError");
    } catch (const agrisim::DomainError& e) {
        CHECK(e.field() == "reg");
    }
}

TEST_CASE("chain report") {
    const auto r = evaluate_chain({});
    CHECK(r.transformer_pp == 345.0);
    CHECK(r.rectified == 172.5);
    CHECK(r.regulator.ok);
    const auto text = format_report(r);
    CHECK(text.find("345.0") != std::string::npos);
    CHECK(text.find("172.5") != std::string::npos);
    CHECK(text.find("110") != std::string::npos);
    CHECK(text.find("7805") != std::string::npos);

    PowerChainSpec low;
    low.line_v = 4.0;
    low.turns_ratio = 3.0;
    const auto weak = evaluate_chain(low);
    CHECK(weak.rectified == 6.0);
    CHECK_FALSE(weak.regulator.ok);
    CHECK(format_report(weak).find("insufficient headroom") != std::string::npos);
}
