#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tubelab/constructions.hpp"
#include "tubelab/fft.hpp"
#include "tubelab/highlow.hpp"
#include "tubelab/prng.hpp"

using namespace tubelab;

namespace {

Family random_tubes(const Scale& sc, size_t count, uint64_t seed) {
    Prng rng(seed);
    std::vector<Elem> tubes;
    const long long side = sc.side();
    while (tubes.size() < count) {
        Elem t{(long long)rng.below((uint64_t)side + 1),
               (long long)rng.below(2 * (uint64_t)side) - side};
        if (tube_meets_unit_square(sc, Thickness{}, t)) tubes.push_back(t);
    }
    return Family::make(sc, Kind::tubes, std::move(tubes));
}

}  // namespace

TEST_CASE("fft round trip and parseval") {
    const size_t n = 64;
    Prng rng(5);
    std::vector<std::complex<double>> a(n * n), orig;
    for (auto& z : a) z = {rng.unit() - 0.5, 0.0};
    orig = a;
    double space = 0.0;
    for (auto& z : orig) space += std::norm(z);
    fft_2d(a, n, false);
    double freq = 0.0;
    for (auto& z : a) freq += std::norm(z);
    CHECK(doctest::Approx(freq / double(n * n)).epsilon(1e-12) == space);
    fft_2d(a, n, true);
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - orig[i]) < 1e-12);
}

TEST_CASE("fft threads do not change results") {
    const size_t n = 128;
    Prng rng(6);
    std::vector<std::complex<double>> a(n * n);
    for (auto& z : a) z = {rng.unit(), 0.0};
    auto b = a;
    fft_2d(a, n, false, 1);
    fft_2d(b, n, false, 8);
    CHECK(a == b);  // bitwise
}

TEST_CASE("fourier split basics") {
    Scale sc(8, 2);
    SUBCASE("empty family gives zero") {
        Family none = Family::make(sc, Kind::tubes, {});
        auto res = fourier_split(none, Rat(1, 2));
        CHECK(res.high_energy_l2 == 0.0);
        CHECK(res.low_sup == 0.0);
    }
    SUBCASE("single horizontal tube: bounded high part, tight recombination") {
        Family t = Family::make(sc, Kind::tubes, {Elem{0, 128}});
        auto res = fourier_split(t, Rat(1, 2));
        CHECK(res.energy_ratio > 0.0);
        CHECK(res.energy_ratio < 16.0);
        CHECK(res.parseval_rel_gap < 1e-9);
        double m = 0.0;
        for (size_t i = 0; i < res.f.size(); ++i)
            m = std::max(m, std::fabs(res.f[i] - res.f_low[i] - res.f_high[i]));
        CHECK(m == 0.0);  // f_high is defined as the pointwise remainder
    }
    SUBCASE("random family at moderate size keeps the energy bound") {
        Family tubes = random_tubes(sc, 200, 11);
        auto res = fourier_split(tubes, Rat(1, 2));
        CHECK(res.energy_ratio < 16.0);
        CHECK(res.parseval_rel_gap < 1e-9);
    }
    SUBCASE("thread count changes nothing") {
        Family tubes = random_tubes(sc, 64, 3);
        auto a = fourier_split(tubes, Rat(1, 2), 1);
        auto b = fourier_split(tubes, Rat(1, 2), 8);
        CHECK(a.f == b.f);
        CHECK(a.f_low == b.f_low);
        CHECK(a.high_energy_l2 == b.high_energy_l2);
    }
}

TEST_CASE("heavy ball scale on the train track") {
    const int e = 10;
    TrainTrack tt = train_track(e);
    const uint64_t r0 = 1ull << (e / 2 - 1);
    auto res = heavy_ball_scale(tt.tubes, r0, Rat(1, 2), Rat(0));
    REQUIRE(res.found);
    // scale <= 4 delta^(1/2)  <=>  exponent >= e/2 - 2
    CHECK(res.scale_exp >= e / 2 - 2);
    // the hypothesis needs r0 >= delta^-beta; at this r0 it is flagged off
    CHECK_FALSE(res.hypothesis_holds);
}

TEST_CASE("heavy ball scale on a single bush") {
    Scale sc(8, 2);
    std::vector<Elem> bush;
    for (long long a = 0; a <= 256; a += 16) {
        long long b = 128 - a / 2;  // through the center square
        bush.push_back(Elem{a, b});
    }
    Family tubes = Family::make(sc, Kind::tubes, bush);
    const uint64_t r0 = tubes.size();
    auto res = heavy_ball_scale(tubes, r0, Rat(1, 2), Rat(0), Rat(1, 8));
    REQUIRE(res.found);
    // the bush concentrates at its root: the smallest candidate already works
    CHECK(res.scale_exp == (int)(8 * 3 / 4));
}

TEST_CASE("ball nesting: per-candidate fractions never shrink with the scale") {
    TrainTrack tt = train_track(8);
    auto res = heavy_ball_scale(tt.tubes, 8, Rat(1, 2), Rat(0));
    REQUIRE(res.rows.size() >= 2);
    // rows run from the smallest scale to 1; with the threshold fixed at each
    // row this is not monotone, but the raw ball counts are nested, which
    // shows as: once the threshold is met at some scale with margin, doubling
    // the ball cannot lose tubes. Sanity-check the count nesting directly.
    const Family& tubes = tt.tubes;
    const long long n = tubes.scale.side();
    Elem q{n / 2, 8};
    auto count_at = [&](long long radius) {
        uint64_t cnt = 0;
        for (const Elem& t : tubes.elems) {
            __int128 lo = (__int128)t.x * std::max(0ll, q.x - radius) + (__int128)t.y * n - n;
            __int128 hi = (__int128)t.x * (std::min(n - 1, q.x + radius) + 1) +
                          (__int128)t.y * n + n;
            if (lo <= (__int128)(q.y + radius + 1) * n && (__int128)(q.y - radius) * n <= hi)
                ++cnt;
        }
        return cnt;
    };
    uint64_t prev = 0;
    for (long long radius = 1; radius <= n; radius *= 2) {
        uint64_t cur = count_at(radius);
        CHECK(cur >= prev);
        prev = cur;
    }
}
