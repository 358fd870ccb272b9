#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tubelab/constructions.hpp"
#include "tubelab/incidence.hpp"
#include "tubelab/set_checks.hpp"

using namespace tubelab;

TEST_CASE("balanced cantor hits the target size and stays uniform") {
    Family f = balanced_cantor(10, Rat(3, 4), 7);
    CHECK(f.size() == (1ull << 8));  // round(10 * 3/4) = 8 doubling bits
    CHECK(is_uniform(f));
    Family g = balanced_cantor(8, Rat(1, 2), 3);
    CHECK(g.size() == 16);
    CHECK(check_delta_set(g, Rat(1, 2), Rat(4)).ok);
}

TEST_CASE("bush example: counts and richness at the roots") {
    BushExample bush = bush_example(8, Rat(3, 4), 5);
    CHECK(bush.roots.size() == 4);        // 2^(e(1-s)) = 2^2
    CHECK(bush.directions.size() == 64);  // 2^(es) = 2^6
    Family flat = bush.tubes.flatten();
    CHECK(flat.size() + bush.snap_duplicates == 256);

    // every tube of a bush meets its root square, so richness there is |dirs|
    RichnessMap map = richness_map(flat);
    for (const Elem& root : bush.roots.elems)
        CHECK(map.at(root.x, root.y) >= bush.directions.size() - bush.snap_duplicates);

    // the direction set is checked, never trusted
    CHECK(check_delta_set(bush.directions, Rat(3, 4), Rat(8)).ok);
    CHECK(check_katz_tao(bush.directions, Rat(3, 4), Rat(8)).ok);
}

TEST_CASE("bush richness follows the power law at small r") {
    const int e = 8;
    const Rat s(3, 4);
    BushExample bush = bush_example(e, s, 11);
    RichnessMap map = richness_map(bush.tubes.flatten());
    RichnessHistogram h = richness_histogram(map);
    // measured |P_r| >= c * 2^(2e) r^(-(s+1)/s) at r in {2,4,8}: (s+1)/s = 7/3
    for (uint64_t r : {2ull, 4ull, 8ull}) {
        uint64_t count = map.count_at_least(r);
        double bound = std::exp2(2.0 * e) * std::pow((double)r, -7.0 / 3.0) / 8.0;
        CHECK((double)count >= bound);
    }
}

TEST_CASE("bush example rejects out-of-range s") {
    CHECK_THROWS(bush_example(8, Rat(1, 2), 1));
    CHECK_THROWS(bush_example(8, Rat(1), 1));
}

TEST_CASE("train track: counts, radius-one richness band, bad directions") {
    TrainTrack tt = train_track(8);
    CHECK(tt.directions.size() == 16);
    CHECK(tt.tubes.size() == 256);  // 16 bushes x 16 tubes
    RichnessMap map = richness_map(tt.tubes);
    // >= 2^e / 4 squares with richness within [2^(e/2-2), 2^(e/2+2)]
    uint64_t in_band = 0;
    const long long n = tt.tubes.scale.side();
    for (long long x = 0; x < n; ++x)
        for (long long y = 0; y < n; ++y) {
            uint32_t v = map.at(x, y);
            if (v >= 4 && v <= 64) ++in_band;
        }
    CHECK(in_band >= 64);
    // the tube family is a reasonable (delta,1) Katz-Tao set
    CHECK(check_katz_tao(tt.tubes, Rat(1), Rat(16)).ok);
    // the direction set is 2^(e/2) consecutive intervals: concentrated
    auto rep = check_delta_set(tt.directions, Rat(1, 2), Rat(4));
    CHECK_FALSE(rep.ok);
    CHECK_THROWS(train_track(7));
}

TEST_CASE("train track violates the ST-ratio shape") {
    TrainTrack tt = train_track(10);
    StRatio st = st_ratio(tt.tubes);
    CHECK(st.max_ratio.to_double() > 8.0);  // concentrated example: ratio blows up
}

TEST_CASE("area saturation regimes") {
    SUBCASE("supercritical t covers much of the grid") {
        AreaSaturation sat = area_saturation(8, Rat(3, 4), Rat(3, 4), 9);
        CHECK(sat.covered_fraction >= 0.5);
    }
    SUBCASE("critical t = 1-s stays away from full coverage") {
        AreaSaturation sat = area_saturation(8, Rat(3, 4), Rat(1, 4), 9);
        CHECK(sat.covered_fraction < 0.95);
    }
    SUBCASE("one tube per direction is sparse") {
        AreaSaturation sat = area_saturation(8, Rat(3, 4), Rat(0), 9);
        CHECK(sat.covered_fraction < 0.05);
    }
}
