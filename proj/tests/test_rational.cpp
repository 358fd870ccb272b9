#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tubelab/prng.hpp"
#include "tubelab/rational.hpp"

using namespace tubelab;

TEST_CASE("rat arithmetic reduces") {
    Rat a(6, 4);
    CHECK(a.num == 3);
    CHECK(a.den == 2);
    CHECK((Rat(1, 3) + Rat(1, 6)) == Rat(1, 2));
    CHECK((Rat(2, 3) * Rat(3, 4)) == Rat(1, 2));
    CHECK(Rat(-4, -8) == Rat(1, 2));
    CHECK(Rat(4, -8) == Rat(-1, 2));
    CHECK(Rat(1, 3) < Rat(1, 2));
    CHECK(parse_rat("3/4") == Rat(3, 4));
    CHECK(parse_rat("0.25") == Rat(1, 4));
    CHECK(parse_rat("2") == Rat(2));
}

TEST_CASE("biguint multiply and compare") {
    BigUint a = BigUint::pow(2, 100);
    BigUint b = BigUint(1).shifted_left(100);
    CHECK(BigUint::cmp(a, b) == 0);
    BigUint c = BigUint::mul(BigUint::pow(3, 40), BigUint::pow(3, 24));
    CHECK(BigUint::cmp(c, BigUint::pow(3, 64)) == 0);
    CHECK(BigUint::cmp(BigUint::pow(3, 64), BigUint::pow(3, 63)) > 0);
    CHECK(BigUint(0).is_zero());
    CHECK(doctest::Approx(BigUint::pow(2, 100).log2_approx()) == 100.0);
}

TEST_CASE("dyadic power inequality is exact") {
    // 5 <= 1 * 2^(7/3)?  2^(7/3) = 5.0396...
    CHECK(dyadic_pow_le(Rat(5), Rat(1), 7, 3));
    // 6 <= 2^(7/3)? no
    CHECK_FALSE(dyadic_pow_le(Rat(6), Rat(1), 7, 3));
    // boundary: 8 <= 2^3 exactly
    CHECK(dyadic_pow_le(Rat(8), Rat(1), 3, 1));
    CHECK_FALSE(dyadic_pow_le(Rat(8) + Rat(1, 1000000), Rat(1), 3, 1));
    // negative exponents: 1/3 <= 2^(-3/2) = 0.3535...
    CHECK(dyadic_pow_le(Rat(1, 3), Rat(1), -3, 2));
    CHECK_FALSE(dyadic_pow_le(Rat(3, 8), Rat(1), -3, 2));
    // constant in front
    CHECK(dyadic_pow_le(Rat(10), Rat(5, 2), 2, 1));
    CHECK_FALSE(dyadic_pow_le(Rat(11), Rat(5, 2), 2, 1));
    // big exponents don't overflow
    CHECK(dyadic_pow_le(Rat(1ll << 40), Rat(1), 641, 16));
    CHECK_FALSE(dyadic_pow_le(Rat(1ll << 40), Rat(1), 639, 16));
}

TEST_CASE("floor of fractional powers of two") {
    CHECK(floor_pow2_frac(3, 1) == 8);
    CHECK(floor_pow2_frac(7, 3) == 5);   // 2^(7/3) = 5.0397
    CHECK(floor_pow2_frac(1, 2) == 1);   // sqrt 2
    CHECK(floor_pow2_frac(31, 2) == 46340);
    CHECK(floor_pow2_frac(0, 5) == 1);
}

TEST_CASE("exact power comparison agrees with floating point away from ties") {
    Prng rng(314);
    int checked = 0;
    while (checked < 300) {
        Rat a((long long)rng.below(1000000) + 1, (long long)rng.below(1000) + 1);
        Rat c((long long)rng.below(1000000) + 1, (long long)rng.below(1000) + 1);
        long long p = (long long)rng.below(200) - 100;
        long long q = (long long)rng.below(60) + 1;
        double gap = std::log2(a.to_double()) - std::log2(c.to_double()) -
                     (double)p / (double)q;
        if (std::fabs(gap) < 0.01) continue;  // too close to the boundary
        CHECK(dyadic_pow_le(a, c, p, q) == (gap < 0.0));
        ++checked;
    }
}
