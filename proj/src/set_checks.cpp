#include "tubelab/set_checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "tubelab/prng.hpp"

namespace tubelab {

double ToleranceProfile::eps0_nominal(const Rat& eps) {
    return std::exp2((2.0 / eps.to_double()) * std::log2(eps.to_double()));
}

namespace {

// Rat >= 2^(p/q), within 2^-20 relative. Report helper only.
Rat rat_pow2_upper(long long p, long long q) {
    long double x = (long double)p / (long double)q;
    if (x > 40.0L) return Rat(1ll << 40);
    if (x < -40.0L) return Rat(1, 1ll << 40);
    long long whole = (long long)std::floor(x);
    long double frac = x - (long double)whole;
    long long mant = (long long)std::ceil(std::exp2(frac) * (1ll << 20));
    Rat r(mant, 1ll << 20);
    if (whole >= 0) return r * Rat(1ll << whole);
    return r / Rat(1ll << (-whole));
}

// Ball-count backend: sorted 1-D search for intervals, prefix-sum grid for
// planar kinds when it fits, per-column binary search otherwise.
struct BallCounter {
    const Family& f;
    bool planar;
    long long x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<uint32_t> prefix;               // (w+1)*(h+1) when used
    std::vector<long long> cols;                // distinct x, fallback path
    std::vector<std::pair<size_t, size_t>> col_range;  // [lo,hi) into elems

    explicit BallCounter(const Family& fam) : f(fam) {
        planar = f.kind != Kind::intervals;
        if (!planar) return;
        const long long n = f.scale.side();
        x0 = 0;
        y0 = f.kind == Kind::tubes ? -n : 0;
        w = f.kind == Kind::tubes ? n + 1 : n;
        h = f.kind == Kind::tubes ? 2 * n : n;
        if ((w + 1) * (h + 1) <= (1ll << 26)) {
            prefix.assign((size_t)(w + 1) * (h + 1), 0);
            for (const Elem& el : f.elems)
                prefix[idx(el.x - x0 + 1, el.y - y0 + 1)] += 1;
            for (long long i = 1; i <= w; ++i)
                for (long long j = 1; j <= h; ++j)
                    prefix[idx(i, j)] += prefix[idx(i - 1, j)] + prefix[idx(i, j - 1)] -
                                         prefix[idx(i - 1, j - 1)];
        } else {
            for (size_t i = 0; i < f.elems.size();) {
                size_t j = i;
                while (j < f.elems.size() && f.elems[j].x == f.elems[i].x) ++j;
                cols.push_back(f.elems[i].x);
                col_range.emplace_back(i, j);
                i = j;
            }
        }
    }

    size_t idx(long long i, long long j) const { return (size_t)(i * (h + 1) + j); }

    uint64_t rect(long long xa, long long xb, long long ya, long long yb) const {
        // counts elements with x in [xa,xb], y in [ya,yb], clamped
        xa = std::max(xa, x0);
        ya = std::max(ya, y0);
        xb = std::min(xb, x0 + w - 1);
        yb = std::min(yb, y0 + h - 1);
        if (xa > xb || ya > yb) return 0;
        long long ia = xa - x0, ib = xb - x0 + 1, ja = ya - y0, jb = yb - y0 + 1;
        return (uint64_t)prefix[idx(ib, jb)] - prefix[idx(ia, jb)] - prefix[idx(ib, ja)] +
               prefix[idx(ia, ja)];
    }

    // open Chebyshev ball: index distance strictly below `radius`
    uint64_t count(const Elem& center, long long radius) const {
        const long long r = radius - 1;
        if (!planar) {
            Elem lo{center.x - r, 0}, hi{center.x + r + 1, 0};
            auto a = std::lower_bound(f.elems.begin(), f.elems.end(), lo);
            auto b = std::lower_bound(f.elems.begin(), f.elems.end(), hi);
            return (uint64_t)(b - a);
        }
        if (!prefix.empty())
            return rect(center.x - r, center.x + r, center.y - r, center.y + r);
        uint64_t total = 0;
        auto clo = std::lower_bound(cols.begin(), cols.end(), center.x - r);
        auto chi = std::upper_bound(cols.begin(), cols.end(), center.x + r);
        for (auto it = clo; it != chi; ++it) {
            size_t ci = (size_t)(it - cols.begin());
            auto lo = f.elems.begin() + col_range[ci].first;
            auto hi = f.elems.begin() + col_range[ci].second;
            Elem a{*it, center.y - r}, b{*it, center.y + r};
            auto la = std::lower_bound(lo, hi, a);
            auto lb = std::upper_bound(lo, hi, b);
            total += (uint64_t)(lb - la);
        }
        return total;
    }
};

enum class CheckMode { delta_set, katz_tao };

SetReport run_check(const Family& f, CheckMode mode, const Rat& s, const Rat& C,
                    long long extra_num, long long extra_den) {
    if (f.empty()) throw std::invalid_argument("set check: empty family");
    if (s.num <= 0) throw std::invalid_argument("set check: s must be positive");
    BallCounter bc(f);
    const int e = f.scale.e;
    const long long base = mode == CheckMode::delta_set ? (long long)f.size() : 1;

    SetReport rep;
    rep.worst_center = f.elems.front();
    rep.worst_radius_exp = 0;
    double worst = 0.0;  // a lone point never witnesses concentration
    bool have_worst = false;
    for (const Elem& center : f.elems) {
        for (int k = 0; k <= e; ++k) {
            uint64_t cnt = bc.count(center, 1ll << (e - k));
            if (cnt <= 1) continue;
            // bound: C * 2^(P/Q) * base
            long long kk = mode == CheckMode::delta_set ? -(long long)k : (long long)(e - k);
            long long P = kk * s.num * extra_den + extra_num * s.den;
            long long Q = s.den * extra_den;
            Rat bound_const = C * Rat(base);
            if (!dyadic_pow_le(Rat((long long)cnt), bound_const, P, Q)) rep.ok = false;
            double gap = std::log2((double)cnt) - double(P) / double(Q) -
                         std::log2((double)base);
            if (!have_worst || gap > worst) {
                worst = gap;
                have_worst = true;
                rep.worst_center = center;
                rep.worst_radius_exp = k;
            }
        }
    }
    rep.achieved_log2 = worst;
    if (!have_worst) {
        rep.achieved_constant = Rat(1);
        return rep;
    }
    // needed constant at the worst pair, dyadic upper rounding
    {
        uint64_t cnt = bc.count(rep.worst_center, 1ll << (e - rep.worst_radius_exp));
        long long kk = mode == CheckMode::delta_set ? -(long long)rep.worst_radius_exp
                                                    : (long long)(e - rep.worst_radius_exp);
        long long P = kk * s.num * extra_den + extra_num * s.den;
        long long Q = s.den * extra_den;
        rep.achieved_constant = Rat((long long)cnt, base) * rat_pow2_upper(-P, Q);
    }
    return rep;
}

}  // namespace

SetReport check_delta_set(const Family& f, const Rat& s, const Rat& C) {
    return run_check(f, CheckMode::delta_set, s, C, 0, 1);
}

SetReport check_katz_tao(const Family& f, const Rat& s, const Rat& K) {
    return run_check(f, CheckMode::katz_tao, s, K, 0, 1);
}

SetReport check_delta_set_x(const Family& f, const Rat& s, const Rat& C, long long x_num,
                            long long x_den) {
    return run_check(f, CheckMode::delta_set, s, C, x_num, x_den);
}

SetReport check_katz_tao_x(const Family& f, const Rat& s, const Rat& K, long long x_num,
                           long long x_den) {
    return run_check(f, CheckMode::katz_tao, s, K, x_num, x_den);
}

SetReport check_katz_tao_dyadic(const Family& f, const Rat& s, const Rat& K) {
    if (f.empty()) throw std::invalid_argument("set check: empty family");
    const int e = f.scale.e;
    SetReport rep;
    rep.quantifier = "cells=dyadic radii=dyadic";
    double worst = -1e300;
    std::vector<Elem> keys(f.elems.size());
    for (int k = 0; k <= e; ++k) {
        const int shift = e - k;
        for (size_t i = 0; i < keys.size(); ++i) keys[i] = ancestor(f.elems[i], shift);
        std::sort(keys.begin(), keys.end());
        for (size_t i = 0; i < keys.size();) {
            size_t j = i;
            while (j < keys.size() && keys[j] == keys[i]) ++j;
            uint64_t cnt = j - i;
            long long P = (long long)(e - k) * s.num;
            if (!dyadic_pow_le(Rat((long long)cnt), K, P, s.den)) rep.ok = false;
            double gap = std::log2((double)cnt) - double(P) / double(s.den);
            if (gap > worst) {
                worst = gap;
                rep.worst_center = Elem{keys[i].x << shift, keys[i].y << shift};
                rep.worst_radius_exp = k;
            }
            i = j;
        }
    }
    rep.achieved_log2 = worst;
    {
        long long wh = (long long)std::floor(worst);
        wh = std::max(-40ll, std::min(40ll, wh));
        long long mant = (long long)std::ceil(std::exp2(worst - std::floor(worst)) * (1 << 20));
        Rat r(mant, 1ll << 20);
        rep.achieved_constant = wh >= 0 ? r * Rat(1ll << wh) : r / Rat(1ll << (-wh));
    }
    return rep;
}

uint64_t ball_count(const Family& f, const Elem& center, int radius_exp) {
    if (radius_exp < 0 || radius_exp > f.scale.e)
        throw std::invalid_argument("ball_count: radius exponent out of range");
    BallCounter bc(f);
    return bc.count(center, 1ll << (f.scale.e - radius_exp));
}

Family generate_ad_regular(const Scale& sc, const Rat& s, uint64_t seed, Kind kind) {
    const int T = sc.T, m = sc.levels();
    const int d = kind == Kind::intervals ? 1 : 2;
    if (s.num <= 0 || Rat(d) < s)
        throw std::invalid_argument("generate_ad_regular: s out of (0, d]");
    if (((__int128)T * s.num) % s.den != 0)
        throw std::invalid_argument(
            "generate_ad_regular: s*T must be an integer; adjust the block size T");
    const int keep_bits = (int)((long long)T * s.num / s.den);

    if (kind == Kind::intervals) {
        const long long keep = 1ll << keep_bits;
        const long long stride = 1ll << (T - keep_bits);
        std::vector<long long> nodes{0};
        for (int j = 0; j < m; ++j) {
            std::vector<long long> next;
            next.reserve(nodes.size() * (size_t)keep);
            for (long long node : nodes) {
                uint64_t off = derive_seed(seed, (uint64_t)j + 1, (uint64_t)node) % (1ull << T);
                for (long long i = 0; i < keep; ++i) {
                    long long v = (long long)((off + (uint64_t)i * stride) % (1ull << T));
                    next.push_back((node << T) | v);
                }
            }
            nodes = std::move(next);
        }
        std::vector<Elem> elems(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) elems[i] = Elem{nodes[i], 0};
        return Family::make(sc, kind, std::move(elems));
    }

    // planar: kept children on a seeded sublattice of the 2^T x 2^T block
    const int bx = (keep_bits + 1) / 2, by = keep_bits / 2;
    const long long kx = 1ll << bx, ky = 1ll << by;
    const long long sx = 1ll << (T - bx), sy = 1ll << (T - by);
    std::vector<Elem> nodes{Elem{0, 0}};
    for (int j = 0; j < m; ++j) {
        std::vector<Elem> next;
        next.reserve(nodes.size() * (size_t)(kx * ky));
        for (const Elem& node : nodes) {
            uint64_t h = derive_seed(seed, (uint64_t)j + 1,
                                     (uint64_t)(node.x * 0x1f123bb5ull) ^ (uint64_t)node.y);
            uint64_t ox = h % (1ull << T), oy = (h >> 32) % (1ull << T);
            for (long long i = 0; i < kx; ++i)
                for (long long l = 0; l < ky; ++l)
                    next.push_back(Elem{(node.x << T) | (long long)((ox + (uint64_t)i * sx) % (1ull << T)),
                                        (node.y << T) | (long long)((oy + (uint64_t)l * sy) % (1ull << T))});
        }
        nodes = std::move(next);
    }
    return Family::make(sc, kind, std::move(nodes));
}

Family generate_random_frostman(const Scale& sc, const Rat& s, uint64_t seed, const Rat& K,
                                Kind kind, int retries) {
    if (K < Rat(1)) throw std::invalid_argument("generate_random_frostman: K >= 1 required");
    const int d = kind == Kind::intervals ? 1 : 2;
    const long long n = sc.side();
    const uint64_t domain = kind == Kind::intervals ? (uint64_t)n : (uint64_t)n * (uint64_t)n;
    // target K * 2^(e*s), clamped to the grid
    double tgt = K.to_double() * std::exp2(double(sc.e) * s.to_double());
    uint64_t N = (uint64_t)std::llround(std::min(tgt, (double)domain));
    if (N == 0) N = 1;
    const Rat pass_const = K * Rat(2);

    for (int attempt = 0; attempt < retries; ++attempt) {
        Prng rng(derive_seed(seed, (uint64_t)attempt));
        std::vector<uint64_t> picks = rng.sample_distinct(domain, N);
        std::vector<Elem> elems(picks.size());
        for (size_t i = 0; i < picks.size(); ++i) {
            if (kind == Kind::intervals)
                elems[i] = Elem{(long long)picks[i], 0};
            else
                elems[i] = Elem{(long long)(picks[i] / (uint64_t)n),
                                (long long)(picks[i] % (uint64_t)n)};
        }
        Family f = Family::make(sc, kind, std::move(elems));
        if (Rat(d) == s) return f;  // full-dimension sets are Katz-Tao outright
        if (check_katz_tao(f, s, pass_const).ok) return f;
    }
    throw budget_error("generate_random_frostman: rejection budget exceeded");
}

namespace {

struct LevelGroups {
    // elements sorted by (parent key, child key); group boundaries
    std::vector<size_t> order;             // indices into elems
    std::vector<size_t> parent_starts;     // offsets into order
};

LevelGroups group_by(const std::vector<Elem>& elems, int shift_parent, int shift_child) {
    LevelGroups g;
    g.order.resize(elems.size());
    for (size_t i = 0; i < elems.size(); ++i) g.order[i] = i;
    std::sort(g.order.begin(), g.order.end(), [&](size_t a, size_t b) {
        Elem pa = ancestor(elems[a], shift_parent), pb = ancestor(elems[b], shift_parent);
        if (!(pa == pb)) return pa < pb;
        Elem ca = ancestor(elems[a], shift_child), cb = ancestor(elems[b], shift_child);
        if (!(ca == cb)) return ca < cb;
        return elems[a] < elems[b];
    });
    for (size_t i = 0; i < g.order.size(); ++i) {
        if (i == 0 || !(ancestor(elems[g.order[i]], shift_parent) ==
                        ancestor(elems[g.order[i - 1]], shift_parent)))
            g.parent_starts.push_back(i);
    }
    g.parent_starts.push_back(g.order.size());
    return g;
}

}  // namespace

bool is_uniform(const Family& f) {
    if (f.size() <= 1) return true;
    const int e = f.scale.e, T = f.scale.T, m = f.scale.levels();
    std::vector<Elem> keys(f.elems.size());
    for (int j = 1; j <= m; ++j) {
        const int shift = e - j * T;
        for (size_t i = 0; i < keys.size(); ++i) keys[i] = ancestor(f.elems[i], shift);
        std::sort(keys.begin(), keys.end());
        size_t first_run = 0;
        size_t i = 0;
        while (i < keys.size()) {
            size_t j2 = i;
            while (j2 < keys.size() && keys[j2] == keys[i]) ++j2;
            if (first_run == 0)
                first_run = j2 - i;
            else if (j2 - i != first_run)
                return false;
            i = j2;
        }
    }
    return true;
}

Rat uniformity_spread(const Family& f) {
    if (f.empty()) return Rat(1);
    Rat worst(1);
    std::vector<Elem> keys(f.elems.size());
    for (int k = 1; k <= f.scale.e; ++k) {
        const int shift = f.scale.e - k;
        for (size_t i = 0; i < keys.size(); ++i) keys[i] = ancestor(f.elems[i], shift);
        std::sort(keys.begin(), keys.end());
        uint64_t mx = 0, mn = UINT64_MAX;
        size_t i = 0;
        while (i < keys.size()) {
            size_t j = i;
            while (j < keys.size() && keys[j] == keys[i]) ++j;
            mx = std::max<uint64_t>(mx, j - i);
            mn = std::min<uint64_t>(mn, j - i);
            i = j;
        }
        Rat ratio((long long)mx, (long long)mn);
        if (worst < ratio) worst = ratio;
    }
    return worst;
}

UniformExtract extract_uniform(const Family& f, uint64_t seed) {
    if (f.empty()) throw std::invalid_argument("extract_uniform: empty family");
    const int e = f.scale.e, T = f.scale.T, m = f.scale.levels();
    std::vector<Elem> survivors = f.elems;
    Rat guarantee(1);

    // fine to coarse: trimming whole subtrees at coarser levels preserves the
    // equal-child-count property already enforced below them
    for (int j = m; j >= 1; --j) {
        const int shift_par = e - (j - 1) * T;
        const int shift_ch = e - j * T;
        LevelGroups g = group_by(survivors, shift_par, shift_ch);
        const size_t nparents = g.parent_starts.size() - 1;

        // per parent: number of distinct children
        std::vector<uint64_t> child_count(nparents, 0);
        std::vector<uint64_t> mass(nparents, 0);
        for (size_t p = 0; p < nparents; ++p) {
            size_t lo = g.parent_starts[p], hi = g.parent_starts[p + 1];
            mass[p] = hi - lo;
            Elem prev{INT64_MIN, INT64_MIN};
            for (size_t i = lo; i < hi; ++i) {
                Elem ch = ancestor(survivors[g.order[i]], shift_ch);
                if (!(ch == prev)) { ++child_count[p]; prev = ch; }
            }
        }
        // dyadic classes of child count; keep the class with largest mass
        std::map<int, uint64_t> class_mass;
        for (size_t p = 0; p < nparents; ++p) {
            int cls = 63 - __builtin_clzll(child_count[p]);
            class_mass[cls] += mass[p];
        }
        int best_cls = 0;
        uint64_t best_mass = 0;
        for (auto& [cls, ms] : class_mass)
            if (ms > best_mass) { best_mass = ms; best_cls = cls; }

        uint64_t keep_n = UINT64_MAX;
        for (size_t p = 0; p < nparents; ++p) {
            int cls = 63 - __builtin_clzll(child_count[p]);
            if (cls == best_cls) keep_n = std::min(keep_n, child_count[p]);
        }

        std::vector<Elem> next;
        next.reserve(survivors.size());
        for (size_t p = 0; p < nparents; ++p) {
            int cls = 63 - __builtin_clzll(child_count[p]);
            if (cls != best_cls) continue;
            size_t lo = g.parent_starts[p], hi = g.parent_starts[p + 1];
            // distinct children in key order
            std::vector<std::pair<size_t, size_t>> child_spans;
            size_t i = lo;
            while (i < hi) {
                size_t j2 = i;
                Elem ch = ancestor(survivors[g.order[i]], shift_ch);
                while (j2 < hi && ancestor(survivors[g.order[j2]], shift_ch) == ch) ++j2;
                child_spans.emplace_back(i, j2);
                i = j2;
            }
            Elem pkey = ancestor(survivors[g.order[lo]], shift_par);
            Prng rng(derive_seed(seed, (uint64_t)j,
                                 (uint64_t)(pkey.x * 0x9e3779b9ull) ^ (uint64_t)(pkey.y + 1)));
            std::vector<size_t> which(child_spans.size());
            for (size_t t = 0; t < which.size(); ++t) which[t] = t;
            rng.shuffle(which);
            which.resize((size_t)keep_n);
            for (size_t t : which)
                for (size_t i2 = child_spans[t].first; i2 < child_spans[t].second; ++i2)
                    next.push_back(survivors[g.order[i2]]);
        }
        std::sort(next.begin(), next.end());
        survivors = std::move(next);
        guarantee = guarantee * Rat(1, 2 * (long long)class_mass.size());
    }

    UniformExtract res;
    res.out = Family::make(f.scale, f.kind, survivors, f.c);
    res.retained_ratio = Rat((long long)res.out.size(), (long long)f.size());
    res.guaranteed_ratio = guarantee;
    return res;
}

std::vector<Family> partition_katz_tao(const Family& f, const Rat& s) {
    if (!is_uniform(f)) throw std::invalid_argument("partition_katz_tao: input not uniform");
    const int e = f.scale.e, T = f.scale.T, m = f.scale.levels();

    // per-level child counts of the uniform tree: n[j] = children of a
    // level-(j-1) cell at level j
    std::vector<uint64_t> level_count(m + 1);
    for (int j = 0; j <= m; ++j) level_count[j] = covering_number(f, j * T);

    struct Split {
        int level_coarse;   // j
        int level_fine;     // prev
        uint64_t group_sz;  // B
    };
    std::vector<Split> splits;
    int prev = m;
    for (int j = m - 1; j >= 0; --j) {
        uint64_t per_cell = level_count[prev] / level_count[j];  // fine cells per coarse cell
        long long P = (long long)(prev - j) * T * s.num;
        // split when per_cell > 2^((prev-j)T*s)
        if (!dyadic_pow_le(Rat((long long)per_cell), Rat(1), P, s.den)) {
            uint64_t B = floor_pow2_frac(P, s.den);
            if (B == 0) B = 1;
            splits.push_back(Split{j, prev, B});
            prev = j;
        }
    }
    if (splits.empty()) return {f};

    // rank of each element's fine cell among its siblings inside the coarse cell
    std::vector<uint64_t> part_id(f.size(), 0);
    uint64_t stride = 1;
    for (const Split& sp : splits) {
        const int shift_c = e - sp.level_coarse * T;
        const int shift_f = e - sp.level_fine * T;
        LevelGroups g = group_by(f.elems, shift_c, shift_f);
        for (size_t p = 0; p + 1 < g.parent_starts.size(); ++p) {
            size_t lo = g.parent_starts[p], hi = g.parent_starts[p + 1];
            uint64_t rank = 0;
            Elem prev_child{INT64_MIN, INT64_MIN};
            bool first = true;
            for (size_t i = lo; i < hi; ++i) {
                Elem ch = ancestor(f.elems[g.order[i]], shift_f);
                if (first || !(ch == prev_child)) {
                    if (!first) ++rank;
                    prev_child = ch;
                    first = false;
                }
                part_id[g.order[i]] += stride * (rank / sp.group_sz);
            }
        }
        uint64_t per_cell = level_count[sp.level_fine] / level_count[sp.level_coarse];
        uint64_t chunks = (per_cell + sp.group_sz - 1) / sp.group_sz;
        stride *= chunks;
    }

    std::map<uint64_t, std::vector<Elem>> buckets;
    for (size_t i = 0; i < f.size(); ++i) buckets[part_id[i]].push_back(f.elems[i]);
    std::vector<Family> parts;
    parts.reserve(buckets.size());
    for (auto& [id, elems] : buckets)
        parts.push_back(Family::make(f.scale, f.kind, std::move(elems), f.c));
    return parts;
}

std::vector<Family> partition_uniform(const Family& f, uint64_t seed) {
    std::vector<Family> parts;
    std::vector<Elem> rest = f.elems;
    uint64_t round = 0;
    while (!rest.empty()) {
        Family cur = Family::make(f.scale, f.kind, rest, f.c);
        UniformExtract ex = extract_uniform(cur, derive_seed(seed, round++));
        parts.push_back(ex.out);
        std::vector<Elem> next;
        next.reserve(rest.size() - ex.out.size());
        std::set_difference(rest.begin(), rest.end(), ex.out.elems.begin(),
                            ex.out.elems.end(), std::back_inserter(next));
        rest = std::move(next);
    }
    return parts;
}

BranchingProfile branching(const Family& f) {
    if (f.empty()) throw std::invalid_argument("branching: empty family");
    const int T = f.scale.T, m = f.scale.levels();
    BranchingProfile bp;
    bp.T = T;
    bp.dim = f.kind == Kind::intervals ? 1 : 2;
    bp.counts.resize(m + 1);
    for (int j = 0; j <= m; ++j) bp.counts[j] = covering_number(f, j * T);
    bp.beta.assign(m + 1, Rat(0));
    const long long Q = 1ll << 20;
    for (int j = 0; j < m; ++j) {
        long double ratio = (long double)bp.counts[j + 1] / (long double)bp.counts[j];
        long long p = (long long)std::floor(std::log2(ratio) * (long double)Q);
        p = std::max(0ll, std::min(p, (long long)bp.dim * T * Q));
        bp.beta[j + 1] = bp.beta[j] + Rat(p, Q * T);
    }
    return bp;
}

}  // namespace tubelab
