#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ppcon/shamir.hpp"
#include "support/test_support.hpp"

using namespace ppcon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent oracle: direct power-sum evaluation (no Horner).
double power_sum_eval(const SecretPolynomial& poly, double theta) {
    double acc = poly.constant_term;
    for (std::size_t j = 0; j < poly.coefficients.size(); ++j)
        acc += poly.coefficients[j] * std::pow(theta, static_cast<double>(j + 1));
    return acc;
}

SecretPolynomial random_poly(RngStream& rng, std::size_t degree_bound, double secret_span) {
    SecretPolynomial poly;
    poly.constant_term = rng.next_real(-secret_span, secret_span);
    poly.coefficients.resize(degree_bound);
    for (double& a : poly.coefficients) a = rng.next_real(-1.0, 1.0);
    return poly;
}

} // namespace

TEST_CASE("eval_poly matches hand values and the power-sum oracle") {
    REQUIRE(eval_poly({5.0, {}}, 100.0) == 5.0);
    REQUIRE(eval_poly({5.0, {2.0}}, 1.0) == 7.0);

    SECTION("theta = 0 returns the constant term exactly") {
        RngStream rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            const SecretPolynomial poly = random_poly(rng, rng.next_int(0, 6), 100.0);
            REQUIRE(eval_poly(poly, 0.0) == poly.constant_term);
        }
    }

    SECTION("agrees with power-sum evaluation on random inputs") {
        RngStream rng(12);
        for (int trial = 0; trial < 200; ++trial) {
            const SecretPolynomial poly = random_poly(rng, rng.next_int(0, 7), 50.0);
            const double theta = rng.next_real(-20.0, 20.0);
            REQUIRE_THAT(eval_poly(poly, theta),
                         WithinRel(power_sum_eval(poly, theta), 1e-12) ||
                             WithinAbs(power_sum_eval(poly, theta), 1e-12));
        }
    }
}

TEST_CASE("share evaluates the polynomial at every key element in order") {
    const KeySequence key12({1, 2}, 10);
    const std::vector<Share> shares = share({5.0, {2.0}}, key12);
    REQUIRE(shares.size() == 2);
    REQUIRE(shares[0].point == 1);
    REQUIRE(shares[0].value == 7.0);
    REQUIRE(shares[1].point == 2);
    REQUIRE(shares[1].value == 9.0);

    SECTION("zero polynomial shares to zeros on the paper key") {
        const KeySequence key({4, 7, 15, 3}, 20);
        for (const Share& s : share({0.0, {0.0, 0.0, 0.0}}, key)) REQUIRE(s.value == 0.0);
    }

    SECTION("matches the power-sum oracle for random polynomials") {
        RngStream rng(13);
        const KeySequence key({4, 7, 15, 3}, 20);
        for (int trial = 0; trial < 100; ++trial) {
            const SecretPolynomial poly = random_poly(rng, 3, 200.0);
            const std::vector<Share> out = share(poly, key);
            for (std::size_t i = 0; i < out.size(); ++i)
                REQUIRE_THAT(out[i].value,
                             WithinRel(power_sum_eval(poly, key.elements()[i]), 1e-12) ||
                                 WithinAbs(power_sum_eval(poly, key.elements()[i]), 1e-12));
        }
    }
}

TEST_CASE("key sequence validation") {
    REQUIRE_THROWS_AS(KeySequence({1, 1}, 10), DuplicateKeyPoint);
    REQUIRE_THROWS_AS(KeySequence({0, 2}, 10), ConfigError);
    REQUIRE_THROWS_AS(KeySequence({1, 11}, 10), ConfigError);
    REQUIRE_THROWS_AS(KeySequence({1, 2}, 20'000), ConfigError);
    REQUIRE_THROWS_AS(KeySequence({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17},
                                  100),
                      ConfigError);
    REQUIRE_NOTHROW(KeySequence({4, 7, 15, 3}, 20));
}

TEST_CASE("lagrange weights at zero") {
    const KeySequence key({1, 2}, 10);
    REQUIRE_THAT(lagrange_weight_at_zero(1, key), WithinAbs(2.0, 1e-14));
    REQUIRE_THAT(lagrange_weight_at_zero(2, key), WithinAbs(-1.0, 1e-14));
    REQUIRE_THROWS_AS(lagrange_weight_at_zero(3, key), PointNotInKey);

    SECTION("partition of unity for random keys up to length 16, elements <= 1000") {
        // The identity is exact in real arithmetic; in doubles the rounded
        // weights each carry eps * |w|, so the testable tolerance has a
        // conditioning term on top of the 1e-12 budget.
        RngStream rng(14);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t len = rng.next_int(1, 16);
            const std::vector<int> pts = testing::random_distinct_points(rng, len, 1000);
            const KeySequence key_t(pts, 1000);
            double sum = 0.0, magnitude = 0.0;
            for (double w : key_t.lagrange_weights()) {
                sum += w;
                magnitude += std::abs(w);
            }
            REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12 + 32.0 * 2.22e-16 * magnitude));
        }
    }

    SECTION("partition of unity at 1e-12 in the protocol's operating range") {
        RngStream rng(19);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t len = rng.next_int(1, 8);
            const std::vector<int> pts = testing::random_distinct_points(rng, len, 20);
            const KeySequence key_t(pts, 20);
            double sum = 0.0;
            for (double w : key_t.lagrange_weights()) sum += w;
            REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("reconstruct recovers the constant term") {
    REQUIRE_THAT(reconstruct({{1, 7.0}, {2, 9.0}}), WithinAbs(5.0, 1e-12));
    REQUIRE_THAT(reconstruct({{4, 3.25}, {7, 3.25}, {15, 3.25}, {3, 3.25}}),
                 WithinAbs(3.25, 1e-9));
    REQUIRE_THROWS_AS(reconstruct({{1, 7.0}, {1, 9.0}}), DuplicateKeyPoint);
    REQUIRE_THROWS_AS(reconstruct({}), ValidationError);

    SECTION("round-trip: every p-subset of a sharing reconstructs the secret") {
        RngStream rng(15);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t p = rng.next_int(1, 5);
            const std::size_t n = rng.next_int(p, 8);
            const std::vector<int> pts = testing::random_distinct_points(rng, n, 10);
            const KeySequence key(pts, 10);
            SecretPolynomial poly = random_poly(rng, p - 1, 100.0);
            // keep the secret away from zero so the relative tolerance bites
            if (std::abs(poly.constant_term) < 10.0)
                poly.constant_term += poly.constant_term >= 0 ? 10.0 : -10.0;
            const std::vector<Share> shares = share(poly, key);
            for (const auto& subset : testing::subsets_of_size(n, p)) {
                std::vector<Share> picked;
                for (std::size_t idx : subset) picked.push_back(shares[idx]);
                const double got = reconstruct(picked);
                REQUIRE_THAT(got, WithinRel(poly.constant_term, 1e-9) ||
                                      WithinAbs(poly.constant_term, 1e-9));
            }
        }
    }

    SECTION("linearity: reconstruction of pointwise sums adds up") {
        RngStream rng(16);
        const KeySequence key({4, 7, 15, 3}, 20);
        for (int trial = 0; trial < 50; ++trial) {
            const SecretPolynomial a = random_poly(rng, 3, 100.0);
            const SecretPolynomial b = random_poly(rng, 2, 100.0);
            std::vector<Share> sa = share(a, key), sb = share(b, key), sum;
            for (std::size_t i = 0; i < sa.size(); ++i)
                sum.push_back({sa[i].point, sa[i].value + sb[i].value});
            REQUIRE_THAT(reconstruct(sum),
                         WithinRel(reconstruct(sa) + reconstruct(sb), 1e-9) ||
                             WithinAbs(reconstruct(sa) + reconstruct(sb), 1e-9));
        }
    }
}

TEST_CASE("underdetermination certificate") {
    SECTION("two shares of a degree-2 polynomial leave one dimension free") {
        const SecretPolynomial poly{3.0, {0.5, -0.25}};
        const KeySequence key({2, 5}, 10);
        const Certificate cert = underdetermination_certificate(share(poly, key), 2);
        REQUIRE_FALSE(cert.determined);
        REQUIRE(cert.free_dimension == 1);
    }

    SECTION("p shares of a degree p-1 polynomial are determined") {
        // Points stay within [1,8]: the 1e-8 rank threshold itself rejects
        // harshly clustered large-magnitude Vandermonde systems.
        RngStream rng(17);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t p = rng.next_int(1, 5);
            const std::vector<int> pts = testing::random_distinct_points(rng, p, 8);
            const KeySequence key(pts, 8);
            const SecretPolynomial poly = random_poly(rng, p - 1, 100.0);
            const Certificate cert =
                underdetermination_certificate(share(poly, key), static_cast<int>(p) - 1);
            REQUIRE(cert.determined);
            REQUIRE(cert.free_dimension == 0);
            REQUIRE_THAT(cert.constant, WithinRel(poly.constant_term, 1e-7) ||
                                            WithinAbs(poly.constant_term, 1e-7));
        }
    }

    SECTION("no shares, degree 0: constant free") {
        const Certificate cert = underdetermination_certificate({}, 0);
        REQUIRE_FALSE(cert.determined);
        REQUIRE(cert.free_dimension == 1);
    }

    SECTION("subthreshold share sets always stay free") {
        RngStream rng(18);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t p = rng.next_int(2, 5);
            const std::vector<int> pts = testing::random_distinct_points(rng, p, 10);
            const KeySequence key(pts, 10);
            const SecretPolynomial poly = random_poly(rng, p - 1, 100.0);
            const std::vector<Share> shares = share(poly, key);
            for (std::size_t k = 0; k < p; ++k) {
                for (const auto& subset : testing::subsets_of_size(p, k)) {
                    std::vector<Share> picked;
                    for (std::size_t idx : subset) picked.push_back(shares[idx]);
                    const Certificate cert =
                        underdetermination_certificate(picked, static_cast<int>(p) - 1);
                    REQUIRE_FALSE(cert.determined);
                    REQUIRE(cert.free_dimension >= 1);
                }
            }
        }
    }

    SECTION("duplicate observation points do not add rank") {
        const SecretPolynomial poly{4.0, {1.0}};
        const std::vector<Share> twice = {{3, eval_poly(poly, 3)}, {3, eval_poly(poly, 3)}};
        const Certificate cert = underdetermination_certificate(twice, 1);
        REQUIRE_FALSE(cert.determined);
        REQUIRE(cert.free_dimension == 1);
    }
}
