#include "tubelab/constructions.hpp"

#include <algorithm>
#include <cmath>

#include "tubelab/incidence.hpp"
#include "tubelab/prng.hpp"

namespace tubelab {

Family DirectedFamily::directions() const {
    std::vector<Elem> v;
    for (const auto& [a, bs] : groups)
        if (!bs.empty()) v.push_back(Elem{a, 0});
    return Family::make(scale, Kind::intervals, std::move(v));
}

Family DirectedFamily::group_family(size_t i) const {
    // intercepts live on the [-1,1) chart; shift to [0, 2^(e+1)) interval
    // indices at a one-finer scale so interval tooling applies
    const auto& bs = groups.at(i).second;
    std::vector<Elem> v;
    const long long n = scale.side();
    for (long long b : bs) v.push_back(Elem{b + n, 0});
    return Family::make(Scale(scale.e + 1, 1), Kind::intervals, std::move(v));
}

Family DirectedFamily::flatten() const {
    std::vector<Elem> v;
    for (const auto& [a, bs] : groups)
        for (long long b : bs) v.push_back(Elem{a, b});
    return Family::make(scale, Kind::tubes, std::move(v), c);
}

size_t DirectedFamily::tube_count() const {
    size_t n = 0;
    for (const auto& [a, bs] : groups) n += bs.size();
    return n;
}

Family balanced_cantor(int e, const Rat& dim, uint64_t seed) {
    if (dim.num <= 0 || Rat(1) < dim)
        throw std::invalid_argument("balanced_cantor: dim must lie in (0,1]");
    // levels that branch: Bresenham spread of round(e*dim) doubling bits,
    // branching early in each stride so the set spreads at coarse scales
    Rat total = dim * Rat(e);
    long long bits = (2 * total.num + total.den) / (2 * total.den);  // round(e*dim)
    bits = std::min<long long>(std::max<long long>(bits, 1), e);
    std::vector<int> branch((size_t)e, 0);
    long long acc = 0;
    for (int j = 0; j < e; ++j) {
        long long want = ((long long)(j + 1) * bits + e - 1) / e;
        if (want > acc) { branch[(size_t)j] = 1; ++acc; }
    }
    std::vector<long long> nodes{0};
    for (int j = 0; j < e; ++j) {
        std::vector<long long> next;
        next.reserve(nodes.size() << branch[(size_t)j]);
        for (long long node : nodes) {
            if (branch[(size_t)j]) {
                next.push_back(node << 1);
                next.push_back((node << 1) | 1);
            } else {
                uint64_t bit = derive_seed(seed, (uint64_t)j + 1, (uint64_t)node) & 1;
                next.push_back((node << 1) | (long long)bit);
            }
        }
        nodes = std::move(next);
    }
    std::vector<Elem> v(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) v[i] = Elem{nodes[i], 0};
    return Family::make(Scale(e, 1), Kind::intervals, std::move(v));
}

BushExample bush_example(int e, const Rat& s, uint64_t seed) {
    if (!(Rat(1, 2) < s && s < Rat(1)))
        throw std::invalid_argument("bush_example: s must lie in (1/2, 1)");
    Scale sc(e, 1);
    const long long n = sc.side();

    BushExample out;
    Family cols = balanced_cantor(e, Rat(1) - s, derive_seed(seed, 1));
    std::vector<Elem> roots;
    for (const Elem& c : cols.elems) roots.push_back(Elem{c.x, 0});
    out.roots = Family::make(sc, Kind::squares, std::move(roots));
    out.directions = balanced_cantor(e, s, derive_seed(seed, 2));

    out.tubes.scale = sc;
    std::vector<Elem> all;
    for (const Elem& root : out.roots.elems) {
        for (const Elem& dir : out.directions.elems) {
            // through the root center (col+1/2, 1/2)*delta:
            // b = (1/2)delta - a (col+1/2) delta, snapped to the grid
            long long num = n - dir.x * (2 * root.x + 1);  // b_idx * 2n = num... b = num/(2n) * delta
            long long b = (num >= 0 ? (num + n) : (num - n)) / (2 * n);
            all.push_back(Elem{dir.x, b});
        }
    }
    size_t raw = all.size();
    Family flat = Family::make(sc, Kind::tubes, std::move(all));
    out.snap_duplicates = raw - flat.size();
    // regroup by slope
    for (const Elem& t : flat.elems) {
        if (out.tubes.groups.empty() || out.tubes.groups.back().first != t.x)
            out.tubes.groups.push_back({t.x, {}});
        out.tubes.groups.back().second.push_back(t.y);
    }
    return out;
}

TrainTrack train_track(int e) {
    if (e % 2 != 0) throw std::invalid_argument("train_track: e must be even");
    Scale sc(e, 1);
    const long long n = sc.side();
    const long long half = 1ll << (e / 2);

    TrainTrack out;
    out.rect_col_lo = n / 2 - half / 2;
    std::vector<Elem> tubes;
    std::vector<Elem> dirs;
    const long long xc2 = 2 * (n / 2) + 1;  // 2*x_center in delta units... center col n/2
    for (long long a = 0; a < half; ++a) {
        dirs.push_back(Elem{a, 0});
        for (long long k = 0; k < half; ++k) {
            // through the rectangle center ((n+1)/2 * delta, (k*half+1/2)*delta)
            long long b = k * half - (a * xc2 + n) / (2 * n);
            tubes.push_back(Elem{a, b});
        }
    }
    out.tubes = Family::make(sc, Kind::tubes, std::move(tubes));
    out.directions = Family::make(sc, Kind::intervals, std::move(dirs));
    return out;
}

AreaSaturation area_saturation(int e, const Rat& s, const Rat& t, uint64_t seed) {
    // the saturation phenomenon needs t > 1-s; smaller t is allowed so the
    // sparse regimes can be reported too
    if (t.is_negative() || Rat(1) < t)
        throw std::invalid_argument("area_saturation: need 0 <= t <= 1");
    Scale sc(e, 1);
    const long long n = sc.side();
    double per_dir_d = std::exp2(double(e) * t.to_double());
    double ndirs_d = std::exp2(double(e) * s.to_double());
    if (per_dir_d * ndirs_d > 4e7) throw budget_error("area_saturation: family too large");
    const long long per_dir = (long long)std::llround(per_dir_d);
    Family dirs = balanced_cantor(e, s, derive_seed(seed, 1));

    AreaSaturation out;
    out.tubes.scale = sc;
    for (const Elem& d : dirs.elems) {
        Prng rng(derive_seed(seed, 2, (uint64_t)d.x));
        // intercepts with the strip meeting the unit square: b in [-a, 1)
        long long lo = -d.x, hi = n;
        std::vector<uint64_t> picks =
            rng.sample_distinct((uint64_t)(hi - lo), (uint64_t)std::min(per_dir, hi - lo));
        std::vector<long long> bs(picks.size());
        for (size_t i = 0; i < picks.size(); ++i) bs[i] = lo + (long long)picks[i];
        std::sort(bs.begin(), bs.end());
        out.tubes.groups.push_back({d.x, std::move(bs)});
    }
    Family flat = out.tubes.flatten();
    RichnessMap map = richness_map(flat);
    out.richness_threshold = (uint64_t)std::max<long long>(1, (long long)(ndirs_d / 4));
    out.covered_fraction =
        (double)map.count_at_least(out.richness_threshold) / ((double)n * (double)n);
    return out;
}

}  // namespace tubelab
