#include "tubelab/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tubelab/parallel.hpp"

namespace tubelab {

namespace {

// rows covered by the strip of `tube` over column x, clamped to the grid;
// exact division with the half-open overlap convention of `incident`
std::pair<long long, long long> row_span(const Scale& sc, const Thickness& c,
                                         const Elem& tube, long long x) {
    const long long n = sc.side();
    const __int128 cd = c.den, cn = c.num;
    __int128 lo = cd * ((__int128)tube.x * x + (__int128)tube.y * n) - cn * n;
    __int128 hi = cd * ((__int128)tube.x * (x + 1) + (__int128)tube.y * n) + cn * n;
    const __int128 unit = cd * (__int128)n;
    // smallest row with (row+1)*unit > lo is floor(lo/unit); largest row with
    // row*unit < hi is ceil(hi/unit)-1
    long long r0 = (long long)(lo >= 0 ? lo / unit : -((-lo + unit - 1) / unit));
    long long r1 = (long long)(hi > 0 ? (hi - 1) / unit : -((-hi + unit) / unit + 1));
    r0 = std::max(r0, 0ll);
    r1 = std::min(r1, n - 1);
    return {r0, r1};
}

}  // namespace

uint32_t RichnessMap::at(long long col, long long row) const {
    const long long n = scale.side();
    if (col < 0 || col >= n || row < 0 || row >= n) return 0;
    if (dense) return grid[(size_t)(col * n + row)];
    const auto& bucket = columns[(size_t)col];
    auto it = std::lower_bound(bucket.begin(), bucket.end(),
                               std::make_pair(row, (uint32_t)0));
    if (it != bucket.end() && it->first == row) return it->second;
    return 0;
}

uint64_t RichnessMap::total() const {
    uint64_t t = 0;
    if (dense)
        for (uint32_t v : grid) t += v;
    else
        for (const auto& col : columns)
            for (const auto& [row, v] : col) t += v;
    return t;
}

uint64_t RichnessMap::support() const {
    uint64_t s = 0;
    if (dense) {
        for (uint32_t v : grid) s += v > 0;
    } else {
        for (const auto& col : columns) s += col.size();
    }
    return s;
}

uint64_t RichnessMap::count_at_least(uint64_t r) const {
    uint64_t s = 0;
    if (dense) {
        for (uint32_t v : grid) s += v >= r;
    } else {
        for (const auto& col : columns)
            for (const auto& [row, v] : col) s += v >= r;
    }
    return s;
}

RichnessMap richness_map(const Family& tubes, int threads, bool force_sparse) {
    if (tubes.kind != Kind::tubes)
        throw std::invalid_argument("richness_map: expects a tube family");
    RichnessMap map;
    map.scale = tubes.scale;
    const long long n = tubes.scale.side();
    map.dense = tubes.scale.e <= 12 && !force_sparse;
    if (map.dense) {
        map.grid.assign((size_t)(n * n), 0);
        // per-column parallelism: each tube writes one contiguous row span per
        // column; partition work by column so writes never race
        parallel_for(n, threads, [&](int64_t x) {
            for (const Elem& t : tubes.elems) {
                auto [r0, r1] = row_span(tubes.scale, tubes.c, t, x);
                for (long long row = r0; row <= r1; ++row)
                    map.grid[(size_t)(x * n + row)] += 1;
            }
        });
    } else {
        map.columns.resize((size_t)n);
        parallel_for(n, threads, [&](int64_t x) {
            std::map<long long, uint32_t> acc;
            for (const Elem& t : tubes.elems) {
                auto [r0, r1] = row_span(tubes.scale, tubes.c, t, x);
                for (long long row = r0; row <= r1; ++row) acc[row] += 1;
            }
            auto& bucket = map.columns[(size_t)x];
            bucket.assign(acc.begin(), acc.end());
        });
    }
    return map;
}

RichnessHistogram richness_histogram(const RichnessMap& map) {
    RichnessHistogram h;
    h.bin_counts.assign(40, 0);
    auto add = [&](uint32_t v) {
        if (v == 0) return;
        int bin = 63 - __builtin_clzll((uint64_t)v);
        h.bin_counts[(size_t)bin] += 1;
        h.support += 1;
    };
    if (map.dense) {
        for (uint32_t v : map.grid) add(v);
    } else {
        for (const auto& col : map.columns)
            for (const auto& [row, v] : col) add(v);
    }
    while (!h.bin_counts.empty() && h.bin_counts.back() == 0) h.bin_counts.pop_back();
    return h;
}

Family rich_band(const RichnessMap& map, uint64_t r) {
    std::vector<Elem> sq;
    const long long n = map.scale.side();
    if (map.dense) {
        for (long long x = 0; x < n; ++x)
            for (long long y = 0; y < n; ++y) {
                uint32_t v = map.grid[(size_t)(x * n + y)];
                if (v >= r && v < 2 * r) sq.push_back(Elem{x, y});
            }
    } else {
        for (long long x = 0; x < n; ++x)
            for (const auto& [y, v] : map.columns[(size_t)x])
                if (v >= r && v < 2 * r) sq.push_back(Elem{x, y});
    }
    return Family::make(map.scale, Kind::squares, std::move(sq));
}

std::pair<Family, RichnessHistogram> rich_squares(const Family& tubes, uint64_t r,
                                                  const RichnessMap& map) {
    if (r < 1) throw std::invalid_argument("rich_squares: r must be >= 1");
    std::vector<Elem> sq;
    const long long n = map.scale.side();
    if (map.dense) {
        for (long long x = 0; x < n; ++x)
            for (long long y = 0; y < n; ++y)
                if (map.grid[(size_t)(x * n + y)] >= r) sq.push_back(Elem{x, y});
    } else {
        for (long long x = 0; x < n; ++x)
            for (const auto& [y, v] : map.columns[(size_t)x])
                if (v >= r) sq.push_back(Elem{x, y});
    }
    return {Family::make(tubes.scale, Kind::squares, std::move(sq)),
            richness_histogram(map)};
}

IncidenceReport incidence_count(const Family& squares, const Family& tubes,
                                const RichnessMap* map) {
    if (squares.kind != Kind::squares || tubes.kind != Kind::tubes)
        throw std::invalid_argument("incidence_count: want squares and tubes");
    if (squares.scale != tubes.scale)
        throw std::invalid_argument("incidence_count: scale mismatch");
    IncidenceReport rep;
    RichnessMap local;
    const RichnessMap* m = map;
    if (!m && !tubes.empty()) {
        local = richness_map(tubes);
        m = &local;
    }
    if (m)
        for (const Elem& p : squares.elems) rep.incidences += m->at(p.x, p.y);
    const double pt = (double)squares.size() * (double)tubes.size();
    if (pt > 0) {
        rep.ratio_to_st_form = (double)rep.incidences / std::pow(pt, 2.0 / 3.0);
        rep.ratio_to_trivial =
            rep.ratio_to_st_form / std::exp2((double)tubes.scale.e / 3.0);
    }
    return rep;
}

StRatio st_ratio(const Family& tubes, const RichnessMap* map, int threads) {
    StRatio out;
    if (tubes.empty()) return out;
    RichnessMap local;
    if (!map) {
        local = richness_map(tubes, threads);
        map = &local;
    }
    RichnessHistogram h = richness_histogram(*map);
    const Rat t2((long long)tubes.size() * (long long)tubes.size());
    for (size_t bin = 0; bin < h.bin_counts.size(); ++bin) {
        if (h.bin_counts[bin] == 0) continue;
        if (bin > 20) throw budget_error("st_ratio: richness beyond 2^20");
        StRatioRow row;
        row.r = 1ull << bin;
        row.count = h.bin_counts[bin];
        Rat num((long long)row.count);
        row.ratio = num * Rat((long long)(row.r * row.r) * (long long)row.r) / t2;
        if (out.max_ratio < row.ratio) {
            out.max_ratio = row.ratio;
            out.argmax_r = row.r;
        }
        out.table.push_back(row);
    }
    // the main regime has |T| comparable to delta^-1
    out.small_family = (long long)tubes.size() * 4 < tubes.scale.side();
    return out;
}

PigeonholeSplit pigeonhole_split(const std::vector<Family>& parts, uint64_t r) {
    if (parts.empty()) throw std::invalid_argument("pigeonhole_split: no parts");
    const Scale sc = parts.front().scale;
    for (const auto& p : parts)
        if (p.kind != Kind::tubes || !(p.scale == sc))
            throw std::invalid_argument("pigeonhole_split: parts must be tubes at one scale");
    // disjointness
    std::vector<Elem> all;
    for (const auto& p : parts) all.insert(all.end(), p.elems.begin(), p.elems.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw std::invalid_argument("pigeonhole_split: parts are not disjoint");

    Family whole = Family::make(sc, Kind::tubes, std::move(all), parts.front().c);
    RichnessMap total = richness_map(whole);
    std::vector<RichnessMap> maps;
    maps.reserve(parts.size());
    for (const auto& p : parts) maps.push_back(richness_map(p));

    std::vector<Elem> rich;
    const long long n = sc.side();
    for (long long x = 0; x < n; ++x)
        for (long long y = 0; y < n; ++y)
            if (total.at(x, y) >= r) rich.push_back(Elem{x, y});
    if (rich.empty()) throw std::invalid_argument("pigeonhole_split: no r-rich squares");

    const long long loge = sc.e;
    // per square: dyadic class pigeonholing over part richness, then pick the
    // dominant M across squares
    std::map<uint64_t, std::vector<Elem>> by_m;
    for (const Elem& q : rich) {
        std::map<int, uint64_t> class_count;
        for (const auto& m : maps) {
            uint32_t v = m.at(q.x, q.y);
            if (v == 0) continue;
            class_count[63 - __builtin_clzll((uint64_t)v)] += 1;
        }
        int best_cls = 0;
        unsigned __int128 best_score = 0;
        for (auto& [cls, cnt] : class_count) {
            unsigned __int128 score = ((unsigned __int128)cnt) << cls;
            if (score > best_score) { best_score = score; best_cls = cls; }
        }
        uint64_t ratio = (r >> best_cls) > 0 ? (r >> best_cls) : 1;
        uint64_t M = 1;
        while (M < ratio) M <<= 1;
        by_m[M].push_back(q);
    }
    uint64_t bestM = 1;
    size_t best_sz = 0;
    for (auto& [M, v] : by_m)
        if (v.size() > best_sz) { best_sz = v.size(); bestM = M; }

    PigeonholeSplit out;
    out.M = bestM;
    out.rich_total = rich.size();
    out.P = Family::make(sc, Kind::squares, by_m[bestM]);
    // machine checks
    out.size_ok = out.P.size() * 2 * (uint64_t)loge >= out.rich_total;
    out.member_ok = true;
    const uint64_t need_parts = ((bestM + 2 * (uint64_t)loge - 1) / (2 * (uint64_t)loge));
    const uint64_t thresh = (r + bestM - 1) / bestM;  // ceil(r / M)
    for (const Elem& q : out.P.elems) {
        uint64_t cnt = 0;
        for (const auto& m : maps) cnt += m.at(q.x, q.y) >= thresh;
        if (cnt < need_parts) out.member_ok = false;
    }
    return out;
}

}  // namespace tubelab
