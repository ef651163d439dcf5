#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "oracles.hpp"
#include "wrd/rng.hpp"
#include "wrd/stats.hpp"

using namespace wrd;

TEST_CASE("bit accuracy counts matching positions") {
    const BitMessage m = BitMessage::from_hex("a5", 8);
    CHECK(bit_accuracy(m, m) == doctest::Approx(1.0));

    BitMessage flipped = m;
    for (auto& b : flipped.bits) b ^= 1;
    CHECK(bit_accuracy(m, flipped) == doctest::Approx(0.0));

    BitMessage two_off = m;
    two_off.bits[1] ^= 1;
    two_off.bits[6] ^= 1;
    CHECK(bit_accuracy(m, two_off) == doctest::Approx(0.75));

    CHECK_THROWS_AS(bit_accuracy(m, BitMessage::from_hex("a", 4)), std::invalid_argument);
}

TEST_CASE("hex serialization roundtrips") {
    for (int n : {1, 3, 4, 8, 64, 130}) {
        const BitMessage msg = BitMessage::random(1000 + n, n);
        const BitMessage back = BitMessage::from_hex(msg.to_hex(), n);
        CHECK(msg.bits == back.bits);
    }
    CHECK(BitMessage::from_hex("f", 4).bits == std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(BitMessage::from_hex("8", 4).bits == std::vector<std::uint8_t>{1, 0, 0, 0});
    CHECK_THROWS_AS(BitMessage::from_hex("zz", 8), std::invalid_argument);
    CHECK_THROWS_AS(BitMessage::from_hex("ff", 4), std::invalid_argument);
}

TEST_CASE("regularized incomplete beta identities") {
    for (double x : {0.0, 0.25, 1.0})
        CHECK(reg_inc_beta(x, 1.0, 1.0) == doctest::Approx(x).epsilon(1e-13));

    for (double a : {1.0, 2.0, 7.0})
        CHECK(std::abs(reg_inc_beta(0.5, a, a) - 0.5) <= 1e-12);

    // closed-form polynomial integral of t(1-t)^2 scaled by 1/B(2,3)
    CHECK(std::abs(reg_inc_beta(0.5, 2.0, 3.0) - 0.6875) <= 1e-12);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.next_double();
        const double a = 0.5 + 20.0 * rng.next_double();
        const double b = 0.5 + 20.0 * rng.next_double();
        CHECK(std::abs(reg_inc_beta(x, a, b) + reg_inc_beta(1.0 - x, b, a) - 1.0) <= 1e-12);
    }

    CHECK_THROWS_AS(reg_inc_beta(-0.1, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(reg_inc_beta(0.5, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("rho_value matches the exact binomial tail for n <= 32") {
    for (int n = 1; n <= 32; ++n) {
        for (int matches = 0; matches <= n; ++matches) {
            const double p = static_cast<double>(matches) / n;
            const double got = rho_value(n, p).value;
            const double want = oracle::binomial_tail(n, matches == 0 ? 0 : matches);
            if (want == 0.0) {
                CHECK(got == doctest::Approx(0.0));
            } else {
                CHECK(std::abs(got - want) / want <= 1e-12);
            }
        }
    }
}

TEST_CASE("rho_value spot values") {
    CHECK(rho_value(1, 1.0).value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(rho_value(16, 1.0).value - std::pow(2.0, -16)) /
              std::pow(2.0, -16) <=
          1e-12);

    // big-integer oracle for the half-accuracy case at payload 256
    const double want = oracle::binomial_tail(256, 128);
    const double got = rho_value(256, 0.5).value;
    CHECK(std::abs(got - want) / want <= 1e-9);
    CHECK(got == doctest::Approx(0.525).epsilon(1e-2));

    CHECK(rho_value(64, 0.0).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(rho_value(0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(rho_value(8, 1.5), std::invalid_argument);
}

TEST_CASE("rho_value of a perfect decode is 2^-n") {
    for (int n = 1; n <= 52; ++n) {
        const double want = std::pow(2.0, -n);
        CHECK(std::abs(rho_value(n, 1.0).value - want) / want <= 1e-12);
    }
    // log-space relative accuracy at payload 256
    const double log_got = std::log(rho_value(256, 1.0).value);
    const double log_want = -256.0 * std::log(2.0);
    CHECK(std::abs(log_got - log_want) / std::abs(log_want) <= 1e-9);
}

TEST_CASE("rho_value is non-increasing in p and >= 0.5 below coin accuracy") {
    for (int n : {5, 16, 64, 256}) {
        double prev = 2.0;
        for (int matches = 0; matches <= n; ++matches) {
            const double v = rho_value(n, static_cast<double>(matches) / n).value;
            CHECK(v <= prev + 1e-15);
            prev = v;
        }
        for (int matches = 0; 2 * matches <= n; ++matches)
            CHECK(rho_value(n, static_cast<double>(matches) / n).value >= 0.5 - 1e-12);
    }
}

TEST_CASE("attack_success uses a strict threshold") {
    CHECK_FALSE(attack_success(rho_value(256, 1.0)));
    CHECK(attack_success(rho_value(256, 0.5)));

    RhoValue boundary;
    boundary.value = 1e-6;
    CHECK_FALSE(attack_success(boundary));
    boundary.value = 1.0000001e-6;
    CHECK(attack_success(boundary));
    CHECK_THROWS_AS(attack_success(boundary, 0.0), std::invalid_argument);
}

TEST_CASE("asr is the mean of success indicators") {
    RhoValue survive;  // detected, attack failed
    survive.value = 1e-9;
    RhoValue removed;
    removed.value = 0.5;

    CHECK(asr({removed, removed, removed}) == doctest::Approx(1.0));
    CHECK(asr({survive, survive}) == doctest::Approx(0.0));
    CHECK(asr({removed, removed, removed, survive}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(asr({}), std::invalid_argument);
}
