#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tubelab/multiscale.hpp"
#include "tubelab/prng.hpp"
#include "tubelab/set_checks.hpp"

using namespace tubelab;

namespace {

LipschitzFn identity_fn(long long n) {
    std::vector<Rat> v;
    for (long long k = 0; k <= n; ++k) v.push_back(Rat(k, n));
    return LipschitzFn::make(n, std::move(v));
}

LipschitzFn zero_fn(long long n) {
    return LipschitzFn::make(n, std::vector<Rat>((size_t)n + 1, Rat(0)));
}

// flat on [0,1/2], slope 1 after
LipschitzFn hinge_fn(long long n) {
    std::vector<Rat> v;
    for (long long k = 0; k <= n; ++k) {
        Rat x(k, n);
        v.push_back(x < Rat(1, 2) ? Rat(0) : x - Rat(1, 2));
    }
    return LipschitzFn::make(n, std::move(v));
}

LipschitzFn random_monotone(long long n, uint64_t seed) {
    Prng rng(seed);
    std::vector<Rat> v{Rat(0)};
    for (long long k = 0; k < n; ++k)
        v.push_back(v.back() + Rat((long long)rng.below(9), 8 * n));
    return LipschitzFn::make(n, std::move(v));
}

}  // namespace

TEST_CASE("lipschitz function invariants") {
    CHECK_NOTHROW(identity_fn(64));
    std::vector<Rat> bad{Rat(0), Rat(1, 2), Rat(1, 4)};  // decreasing
    CHECK_THROWS(LipschitzFn::make(2, bad));
    std::vector<Rat> steep{Rat(0), Rat(1), Rat(1)};  // slope 2 on the first step
    CHECK_THROWS(LipschitzFn::make(2, steep));
}

TEST_CASE("hull decomposition of a line is the line") {
    auto dec = lip_decompose(identity_fn(1024), Rat(1, 10));
    CHECK(dec.sigma.size() == 1);
    CHECK(dec.sigma[0] == Rat(1));
    CHECK(dec.a.front() == Rat(0));
    CHECK(dec.a.back() == Rat(1));
}

TEST_CASE("hull decomposition of zero is flat") {
    auto dec = lip_decompose(zero_fn(1024), Rat(1, 10));
    CHECK(dec.sigma.size() == 1);
    CHECK(dec.sigma[0] == Rat(0));
}

TEST_CASE("hinge splits into exactly two pieces with vertex at one half") {
    auto dec = lip_decompose(hinge_fn(1024), Rat(1, 10));
    REQUIRE(dec.sigma.size() == 2);
    CHECK(dec.sigma[0] == Rat(0));
    CHECK(dec.sigma[1] == Rat(1));
    CHECK(dec.a[1] == Rat(1, 2));
}

TEST_CASE("grid too coarse for eps is rejected") {
    CHECK_THROWS(lip_decompose(identity_fn(16), Rat(1, 10)));
}

TEST_CASE("good intervals on the identity: one piece in the top class") {
    auto gp = good_intervals(identity_fn(1024), Rat(1, 10));
    REQUIRE(gp.ok);
    REQUIRE(gp.t.size() == 1);
    CHECK(gp.t[0] == Rat(9, 10));  // slope 1 lies in the top class [0.9, 1]
}

TEST_CASE("good intervals on zero: one flat piece") {
    auto gp = good_intervals(zero_fn(1024), Rat(1, 10));
    REQUIRE(gp.ok);
    REQUIRE(gp.t.size() == 1);
    CHECK(gp.t[0] == Rat(0));
}

TEST_CASE("good intervals: 200-seed property run with exact postconditions") {
    for (uint64_t seed = 0; seed < 200; ++seed) {
        auto f = random_monotone(1024, 1000 + seed);
        for (Rat eps : {Rat(1, 10), Rat(1, 5)}) {
            auto gp = good_intervals(f, eps);
            REQUIRE(gp.ok);
            CHECK(gp.check_min_length);
            CHECK(gp.check_lower_graph);
            CHECK(gp.check_upper_growth);
            CHECK(gp.check_first_slope);
            CHECK(gp.A.front() == Rat(0));
            CHECK(gp.A.back() == Rat(1));
            for (size_t l = 1; l < gp.t.size(); ++l) CHECK(gp.t[l - 1] < gp.t[l]);
        }
    }
}

TEST_CASE("good interval breakpoints coarsen the hull breakpoints") {
    auto f = random_monotone(1024, 4242);
    Rat eps(1, 10);
    auto gp = good_intervals(f, eps);
    REQUIRE(gp.ok);
    auto dec = lip_decompose(f, gp.eps0_used, gp.tau_used);
    for (long long A : gp.A_idx) {
        bool found = false;
        for (long long a : dec.a_idx) found = found || a == A;
        CHECK(found);
    }
}

TEST_CASE("decompose_family on structured inputs") {
    SUBCASE("ad-regular: single level with slope near s") {
        Family f = generate_ad_regular(Scale(8, 2), Rat(1, 2), 3);
        auto res = decompose_family(f, Rat(1, 8));
        REQUIRE(res.part.ok);
        CHECK(res.levels.size() == 1);
        CHECK(res.levels[0].t <= Rat(1, 2));
        CHECK(res.levels[0].t >= Rat(1, 2) - Rat(1, 8));
        CHECK(res.first_slope_ok);
        CHECK(res.all_growth_ok);
    }
    SUBCASE("full grid: single level near slope 1") {
        std::vector<Elem> all;
        for (long long i = 0; i < 256; ++i) all.push_back(Elem{i, 0});
        Family f = Family::make(Scale(8, 2), Kind::intervals, all);
        auto res = decompose_family(f, Rat(1, 8));
        REQUIRE(res.part.ok);
        CHECK(res.levels.size() == 1);
        CHECK(res.levels[0].t >= Rat(3, 4));
        CHECK(res.all_growth_ok);
    }
    SUBCASE("two-layer set: sparse top, dense bottom gives two increasing slopes") {
        // 4 sparse blocks, each filled solid in its low 64 indices
        Scale sc(12, 2);
        std::vector<Elem> v;
        for (long long hi = 0; hi < 4; ++hi)
            for (long long lo = 0; lo < 64; ++lo) v.push_back(Elem{(hi << 10) + lo, 0});
        Family f = Family::make(sc, Kind::intervals, v);
        REQUIRE(is_uniform(f));
        auto res = decompose_family(f, Rat(1, 8));
        REQUIRE(res.part.ok);
        CHECK(res.levels.size() == 2);
        CHECK(res.levels[0].t < res.levels[1].t);
    }
    SUBCASE("non-uniform input is rejected") {
        Family bad = Family::make(Scale(8, 2), Kind::intervals,
                                  {Elem{0, 0}, Elem{1, 0}, Elem{64, 0}});
        CHECK_THROWS(decompose_family(bad, Rat(1, 8)));
    }
}
