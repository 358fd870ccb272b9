#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tubelab/augment.hpp"
#include "tubelab/prng.hpp"
#include "tubelab/set_checks.hpp"

using namespace tubelab;

namespace {

DirectedFamily single_tube(const Scale& sc) {
    DirectedFamily d;
    d.scale = sc;
    d.groups.push_back({sc.side() / 2, {0}});
    return d;
}

}  // namespace

TEST_CASE("translate augmentation from a single interval") {
    Scale sc(10, 2);
    Family S = Family::make(sc, Kind::intervals, {Elem{5, 0}});
    AugmentConfig cfg;
    cfg.log_mode = true;
    auto res = augment_translates(S, Rat(1, 2), Rat(1), cfg, 42);
    CHECK(res.checks.all());
    CHECK(res.translates.size() == 32);  // ~ 2^(e/2)
    CHECK(res.out.size() <= 4 * 32);
    CHECK(res.out.size() >= 8);
    CHECK(check_katz_tao(res.out, Rat(1, 2), Rat(4 * 10)).ok);
}

TEST_CASE("translate augmentation is a near identity when S is already full") {
    Scale sc(8, 2);
    Family S = generate_ad_regular(sc, Rat(1, 2), 3);  // size 16 ~ K 2^(es) / 2
    REQUIRE(check_katz_tao(S, Rat(1, 2), Rat(2)).ok);
    AugmentConfig cfg;
    cfg.log_mode = true;
    auto res = augment_translates(S, Rat(1, 2), Rat(2), cfg, 1);
    CHECK(res.translates.size() <= 2);  // N ~ 1: nothing substantial to add
    CHECK(res.out.size() <= 2 * S.size());
    CHECK(res.out.size() >= S.size());
}

TEST_CASE("translate augmentation in the power-loss mode") {
    Scale sc(10, 2);
    Family S = Family::make(sc, Kind::intervals, {Elem{100, 0}});
    AugmentConfig cfg;          // default: delta^-upsilon allowance
    cfg.upsilon = Rat(1, 2);    // generous enough for a desk grid
    auto res = augment_translates(S, Rat(1, 2), Rat(1), cfg, 4);
    CHECK(res.checks.all());
    CHECK(check_katz_tao_x(res.out, Rat(1, 2), Rat(4), 5, 1).ok);  // 4 * 2^(e/2)
}

TEST_CASE("translate augmentation determinism per seed") {
    Scale sc(10, 2);
    Family S = generate_ad_regular(sc, Rat(1, 2), 9);
    AugmentConfig cfg;
    cfg.log_mode = true;
    auto a = augment_translates(S, Rat(1, 2), Rat(4), cfg, 7);
    auto b = augment_translates(S, Rat(1, 2), Rat(4), cfg, 7);
    CHECK(a.out.elems == b.out.elems);
    CHECK(a.translates == b.translates);
    auto c = augment_translates(S, Rat(1, 2), Rat(4), cfg, 8);
    CHECK(c.out.elems != a.out.elems);
}

TEST_CASE("translate augmentation rejects bad inputs") {
    Scale sc(8, 2);
    AugmentConfig cfg;
    Family nonuniform = Family::make(sc, Kind::intervals, {Elem{0, 0}, Elem{1, 0}, Elem{64, 0}});
    CHECK_THROWS(augment_translates(nonuniform, Rat(1, 2), Rat(1), cfg, 1));
    Family run = Family::make(sc, Kind::intervals,
                              {Elem{0, 0}, Elem{1, 0}, Elem{2, 0}, Elem{3, 0}});
    // a 4-run is uniform but fails Katz-Tao at s=1/2 with K=1
    CHECK_THROWS(augment_translates(run, Rat(1, 2), Rat(1), cfg, 1));
}

TEST_CASE("rigid augmentation inflates a single tube to a full configuration") {
    Scale sc(10, 2);
    DirectedFamily seed = single_tube(sc);
    AugmentConfig cfg;
    cfg.log_mode = true;
    auto res = augment_rigid(seed, Rat(1, 2), Rat(1), Rat(1), cfg, 77);
    CHECK(res.all_ok());
    Family dirs = res.out.directions();
    CHECK(dirs.size() >= 8);       // ~ 2^(e/2) directions up to the allowance
    CHECK(dirs.size() <= 4 * 32);
    CHECK(check_katz_tao(dirs, Rat(1, 2), Rat(40)).ok);  // within the log allowance
    // the flattened family is a genuine tube family
    Family flat = res.out.flatten();
    CHECK(flat.size() == res.out.tube_count());
    CHECK(flat.size() >= 256);  // ~ delta^-1 up to allowance
}

TEST_CASE("rigid augmentation near identity on a maximal configuration") {
    Scale sc(8, 2);
    // AD-regular directions x AD-regular intercepts: already maximal
    Family dirs = generate_ad_regular(sc, Rat(1, 2), 5);
    DirectedFamily d;
    d.scale = sc;
    for (const Elem& a : dirs.elems) {
        Family ints = generate_ad_regular(sc, Rat(1, 2), derive_seed(50, (uint64_t)a.x));
        std::vector<long long> bs;
        for (const Elem& b : ints.elems) bs.push_back(b.x);
        d.groups.push_back({a.x, std::move(bs)});
    }
    AugmentConfig cfg;
    cfg.log_mode = true;
    auto res = augment_rigid(d, Rat(1, 2), Rat(2), Rat(2), cfg, 4);
    CHECK(res.slope_shifts.size() <= 2);       // N ~ 1 in both stages
    CHECK(res.intercept_translates.size() <= 2);
    CHECK(res.out.tube_count() >= d.tube_count());
    CHECK(res.out.tube_count() <= 4 * d.tube_count());
    CHECK(res.all_ok());
}

TEST_CASE("rigid augmentation seeds vary but keep passing") {
    Scale sc(8, 2);
    DirectedFamily seed = single_tube(sc);
    AugmentConfig cfg;
    cfg.log_mode = true;
    for (uint64_t s = 0; s < 10; ++s) {
        auto res = augment_rigid(seed, Rat(1, 2), Rat(1), Rat(1), cfg, 100 + s);
        CHECK(res.all_ok());
        CHECK(res.attempts <= cfg.retries);
    }
}
