#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tubelab/grid.hpp"
#include "tubelab/prng.hpp"
#include "tubelab/set_checks.hpp"

using namespace tubelab;

namespace {

Family full_intervals(const Scale& sc) {
    std::vector<Elem> v;
    for (long long i = 0; i < sc.side(); ++i) v.push_back(Elem{i, 0});
    return Family::make(sc, Kind::intervals, std::move(v));
}

Family consecutive_intervals(const Scale& sc, long long count) {
    std::vector<Elem> v;
    for (long long i = 0; i < count; ++i) v.push_back(Elem{i, 0});
    return Family::make(sc, Kind::intervals, std::move(v));
}

Family random_squares(const Scale& sc, size_t n, uint64_t seed) {
    Prng rng(seed);
    std::vector<Elem> v;
    const uint64_t side = (uint64_t)sc.side();
    for (uint64_t p : rng.sample_distinct(side * side, n))
        v.push_back(Elem{(long long)(p / side), (long long)(p % side)});
    return Family::make(sc, Kind::squares, std::move(v));
}

}  // namespace

TEST_CASE("delta-set checker on the full interval grid") {
    Scale sc(6, 2);
    Family f = full_intervals(sc);
    auto rep = check_delta_set(f, Rat(1), Rat(4));
    CHECK(rep.ok);
    CHECK(rep.achieved_constant >= Rat(1));
}

TEST_CASE("single element families") {
    Scale sc(6, 2);
    Family f = Family::make(sc, Kind::intervals, {Elem{17, 0}});
    auto rep = check_delta_set(f, Rat(1, 2), Rat(1));
    CHECK(rep.ok);
    CHECK(rep.achieved_constant == Rat(1));
    auto kt = check_katz_tao(f, Rat(1, 3), Rat(1));
    CHECK(kt.ok);
}

TEST_CASE("consecutive run fails s=1/2 at the half scale") {
    Scale sc(8, 2);
    Family f = consecutive_intervals(sc, 16);  // 2^(e/2) consecutive
    // at r = 2^-(e/2): count = 16 = |A| but bound = C 2^(-e/4) |A|
    auto rep = check_delta_set(f, Rat(1, 2), Rat(1));
    CHECK_FALSE(rep.ok);
    auto kt = check_katz_tao(f, Rat(1, 2), Rat(1));
    CHECK_FALSE(kt.ok);  // at r = 2^-(e/2) count is (r/d)^1 not (r/d)^(1/2)
    // full grid is Katz-Tao at s=1 with room
    auto kt1 = check_katz_tao(full_intervals(Scale(6, 2)), Rat(1), Rat(2));
    CHECK(kt1.ok);
}

TEST_CASE("ad-regular generator passes both checkers") {
    Scale sc(8, 2);
    Family f = generate_ad_regular(sc, Rat(1, 2), 11);
    CHECK(f.size() == 16);
    CHECK(check_delta_set(f, Rat(1, 2), Rat(4)).ok);
    CHECK(check_katz_tao(f, Rat(1, 2), Rat(4)).ok);
    CHECK(is_uniform(f));
    Family g = generate_ad_regular(sc, Rat(1, 2), 12);
    CHECK(g.size() == 16);
    CHECK(check_delta_set(g, Rat(1, 2), Rat(4)).ok);
    CHECK(g.elems != f.elems);  // seeds differ
    CHECK_THROWS(generate_ad_regular(sc, Rat(1, 3), 1));  // s*T not integral
}

TEST_CASE("ad-regular squares variant") {
    Scale sc(6, 2);
    Family f = generate_ad_regular(sc, Rat(1), 3, Kind::squares);
    CHECK(f.size() == 64);  // 2^(e*s)
    CHECK(check_katz_tao(f, Rat(1), Rat(8)).ok);
    CHECK(is_uniform(f));
}

TEST_CASE("random frostman sampler") {
    Scale sc(8, 2);
    Family f = generate_random_frostman(sc, Rat(1), 21, Rat(1));
    CHECK(f.size() == 256);  // s = d accepts the target size outright
    Family g = generate_random_frostman(sc, Rat(1, 2), 22, Rat(1));
    CHECK(check_katz_tao(g, Rat(1, 2), Rat(2)).ok);
    CHECK(g.size() >= 8);
    CHECK(g.size() <= 32);  // within factor 2 of 2^(es) = 16
}

TEST_CASE("a maximal K accepts any set outright") {
    // K = 2^(e(1-s)) makes the target size the whole grid, and every set is
    // Katz-Tao at that constant
    Scale sc(8, 2);
    Family f = generate_random_frostman(sc, Rat(1, 2), 77, Rat(16));
    CHECK(f.size() == 256);
    CHECK(check_katz_tao(f, Rat(1, 2), Rat(32)).ok);
}

TEST_CASE("uniformity checker and spread") {
    Scale sc(6, 2);
    CHECK(is_uniform(full_intervals(sc)));
    CHECK(is_uniform(Family::make(sc, Kind::intervals, {Elem{5, 0}})));
    Family bad = Family::make(sc, Kind::intervals, {Elem{0, 0}, Elem{1, 0}, Elem{16, 0}});
    CHECK_FALSE(is_uniform(bad));
    // exactly uniform families stay within 2^(dT) spread at *every* dyadic scale
    Family ad = generate_ad_regular(Scale(8, 2), Rat(1, 2), 31);
    CHECK(uniformity_spread(ad) <= Rat(1ll << 2));
}

TEST_CASE("extract_uniform yields exact uniformity") {
    Scale sc(8, 2);
    SUBCASE("full grid is already uniform") {
        Family f = full_intervals(sc);
        auto ex = extract_uniform(f, 1);
        CHECK(ex.out.size() == f.size());
        CHECK(ex.retained_ratio == Rat(1));
    }
    SUBCASE("single element") {
        Family f = Family::make(sc, Kind::intervals, {Elem{3, 0}});
        auto ex = extract_uniform(f, 1);
        CHECK(ex.out.size() == 1);
    }
    SUBCASE("extraction is deterministic per seed") {
        Family f = random_squares(sc, 777, 3);
        auto a = extract_uniform(f, 42);
        auto b = extract_uniform(f, 42);
        CHECK(a.out.elems == b.out.elems);
    }
    SUBCASE("random squares") {
        Family f = random_squares(sc, 1000, 9);
        auto ex = extract_uniform(f, 77);
        CHECK(is_uniform(ex.out));
        CHECK(ex.out.size() >= 1);
        CHECK(ex.retained_ratio >= ex.guaranteed_ratio);
        // the pigeonhole floor: the retained ratio is measured and reported
        CHECK(ex.retained_ratio > Rat(1, 1ll << 8));
    }
}

TEST_CASE("partition into exact Katz-Tao pieces") {
    Scale sc(6, 2);
    SUBCASE("already thin input stays whole") {
        Family f = generate_ad_regular(sc, Rat(1, 2), 4);
        auto kt = check_katz_tao(f, Rat(1, 2), Rat(1));
        if (kt.ok) {
            auto parts = partition_katz_tao(f, Rat(1, 2));
            CHECK(parts.size() == 1);
        }
    }
    SUBCASE("full grid splits and every part passes the dyadic bound") {
        Family f = full_intervals(sc);
        auto parts = partition_katz_tao(f, Rat(1, 2));
        size_t total = 0;
        const Rat bound(1ll << (2 * sc.T));
        for (const auto& p : parts) {
            total += p.size();
            CHECK(check_katz_tao_dyadic(p, Rat(1, 2), bound).ok);
        }
        CHECK(total == f.size());
        // part count <= K * 2^m with K the achieved KT constant of the input
        auto in_kt = check_katz_tao(f, Rat(1, 2), Rat(1));
        double cap = std::exp2(in_kt.achieved_log2) * std::exp2((double)sc.levels());
        CHECK((double)parts.size() <= cap + 1e-9);
    }
    SUBCASE("non-uniform input is rejected") {
        Family bad = Family::make(sc, Kind::intervals, {Elem{0, 0}, Elem{1, 0}, Elem{16, 0}});
        CHECK_THROWS(partition_katz_tao(bad, Rat(1, 2)));
    }
}

TEST_CASE("partition into uniform pieces") {
    Scale sc(8, 2);
    SUBCASE("uniform input returns itself") {
        Family f = generate_ad_regular(sc, Rat(1, 2), 6);
        auto parts = partition_uniform(f, 3);
        CHECK(parts.size() == 1);
        CHECK(parts[0].elems == f.elems);
    }
    SUBCASE("random input: parts uniform, union equals input") {
        Family f = random_squares(sc, 500, 15);
        auto parts = partition_uniform(f, 8);
        std::vector<Elem> merged;
        for (const auto& p : parts) {
            CHECK(is_uniform(p));
            merged.insert(merged.end(), p.elems.begin(), p.elems.end());
        }
        std::sort(merged.begin(), merged.end());
        CHECK(merged == f.elems);
    }
}

TEST_CASE("branching profiles") {
    Scale sc(8, 2);
    Family full = full_intervals(sc);
    auto bp = branching(full);
    for (int j = 0; j <= bp.levels(); ++j) CHECK(bp.beta[j] == Rat(j));  // beta(j) = j
    Family single = Family::make(sc, Kind::intervals, {Elem{0, 0}});
    auto bs = branching(single);
    for (auto& b : bs.beta) CHECK(b == Rat(0));
    Family ad = generate_ad_regular(sc, Rat(1, 2), 2);
    auto ba = branching(ad);
    for (int j = 0; j <= ba.levels(); ++j) CHECK(ba.beta[j] == Rat(j, 2));  // beta(j) = j/2
}

TEST_CASE("coarsened uniform delta-sets keep the bound") {
    // uniform F passing check_delta_set(s, C1): coarsening stays a delta-set
    // with constant <= 2^(4T) C1 and size >= rho^-s / (C1 2^(2T))
    Scale sc(8, 2);
    Family f = generate_ad_regular(sc, Rat(1, 2), 19);
    Rat C1(4);
    REQUIRE(check_delta_set(f, Rat(1, 2), C1).ok);
    for (int j = 1; j < sc.levels(); ++j) {
        int rho_exp = j * sc.T;
        Family coarse = coarsen(f, rho_exp);
        Rat c2 = Rat(1ll << (4 * sc.T)) * C1;
        CHECK(check_delta_set(coarse, Rat(1, 2), c2).ok);
        // |F_rho| >= rho^-s / (C1 2^(2T)):  |F_rho| * C1 * 2^(2T) >= 2^(rho_exp * s)
        Rat lhs = Rat((long long)coarse.size()) * C1 * Rat(1ll << (2 * sc.T));
        CHECK(dyadic_pow_le(Rat(1), lhs, -(long long)rho_exp * 1, 2));
    }
}
