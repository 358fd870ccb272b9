#include "tubelab/two_ends.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tubelab/multiscale.hpp"
#include "tubelab/prng.hpp"

namespace tubelab {

void TubeSquareSystem::validate() const {
    scale.validate();
    if (squares.size() != tubes_per_square.size())
        throw std::invalid_argument("TubeSquareSystem: ragged square/tube lists");
    std::set<Elem> seen;
    for (size_t i = 0; i < squares.size(); ++i) {
        if (!seen.insert(squares[i]).second)
            throw std::invalid_argument("TubeSquareSystem: duplicate square");
        for (const Elem& t : tubes_per_square[i])
            if (!incident(scale, c, squares[i], t))
                throw std::invalid_argument("TubeSquareSystem: listed tube misses its square");
    }
}

uint64_t TubeSquareSystem::edge_count() const {
    uint64_t n = 0;
    for (const auto& v : tubes_per_square) n += v.size();
    return n;
}

std::map<Elem, std::vector<size_t>> TubeSquareSystem::tube_to_squares() const {
    std::map<Elem, std::vector<size_t>> m;
    for (size_t i = 0; i < squares.size(); ++i)
        for (const Elem& t : tubes_per_square[i]) m[t].push_back(i);
    return m;
}

namespace {

// exponent of 2 in the two-ends bound c (rho'/rho)^eps (rho/delta)^(5 eps^3)
// at rho' = 2^-k, rho = 2^-g
std::pair<long long, long long> two_ends_exponent(const Rat& eps, int e, int k, int g) {
    Rat ex = Rat(g - k) * eps + Rat(5ll * (e - g)) * eps * eps * eps;
    return {ex.num, ex.den};
}

uint64_t open_ball_count(const std::vector<Elem>& pts, const Elem& center, long long radius) {
    uint64_t n = 0;
    for (const Elem& p : pts)
        if (std::llabs(p.x - center.x) < radius && std::llabs(p.y - center.y) < radius) ++n;
    return n;
}

}  // namespace

TwoEndsVerdict is_two_ends(const Scale& sc, const std::vector<Elem>& squares_on_tube,
                           const Rat& eps, const Rat& cconst) {
    if (squares_on_tube.empty())
        throw std::invalid_argument("is_two_ends: empty square list");
    TwoEndsVerdict v;
    v.worst_center = squares_on_tube.front();
    const int e = sc.e;
    const Rat total((long long)squares_on_tube.size());
    double worst = -1e300;
    for (int k = 1; k < e; ++k) {
        const long long radius = 1ll << (e - k);
        for (const Elem& center : squares_on_tube) {
            uint64_t cnt = open_ball_count(squares_on_tube, center, radius);
            if (cnt <= 1) continue;  // one square cannot witness concentration
            auto [p, q] = two_ends_exponent(eps, e, k, 0);
            if (!dyadic_pow_le(Rat((long long)cnt), cconst * total, p, q)) v.ok = false;
            double gap = std::log2((double)cnt) - double(p) / double(q) -
                         std::log2(total.to_double());
            if (gap > worst) {
                worst = gap;
                v.worst_rho_exp = k;
                v.worst_center = center;
            }
        }
    }
    v.needed_constant_log2 = worst == -1e300 ? 0.0 : worst;
    return v;
}

CoverReport covering_lower_check(const Family& squares, const Rat& s, const Rat& eps) {
    (void)eps;  // the achieved slack is reported in units of e = log2(1/delta)
    if (squares.empty()) throw std::invalid_argument("covering_lower_check: empty family");
    CoverReport rep;
    rep.min_ratio_log2 = 1e300;
    for (int k = 0; k <= squares.scale.e; ++k) {
        CoverRow row;
        row.rho_exp = k;
        row.covering = covering_number(squares, k);
        row.ratio_log2 = std::log2((double)row.covering) - (double)k * s.to_double();
        rep.min_ratio_log2 = std::min(rep.min_ratio_log2, row.ratio_log2);
        rep.rows.push_back(row);
    }
    rep.slack_exponent = std::max(0.0, -rep.min_ratio_log2 / (double)squares.scale.e);
    return rep;
}

RefineResult two_ends_refine(const TubeSquareSystem& sys, const Rat& eps, uint64_t seed,
                             const Rat& cconst) {
    sys.validate();
    RefineResult res;
    const int e = sys.scale.e, m = sys.scale.levels();

    // per-square slope families must be exactly uniform with a common profile
    std::vector<uint64_t> profile;
    for (size_t i = 0; i < sys.squares.size(); ++i) {
        std::vector<Elem> slopes;
        for (const Elem& t : sys.tubes_per_square[i]) slopes.push_back(Elem{t.x, 0});
        std::sort(slopes.begin(), slopes.end());
        slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());
        if (slopes.size() != sys.tubes_per_square[i].size())
            throw std::invalid_argument("two_ends_refine: repeated slopes at one square");
        Family f = Family::make(sys.scale, Kind::intervals, std::move(slopes));
        if (!is_uniform(f))
            throw std::invalid_argument("two_ends_refine: a tube set is not uniform");
        BranchingProfile bp = branching(f);
        if (profile.empty())
            profile = bp.counts;
        else if (profile != bp.counts)
            throw std::invalid_argument("two_ends_refine: branching profiles differ");
    }

    // hypothesis: sum |T_p| >= delta^(-2 eps) |union T_p|
    auto tmap = sys.tube_to_squares();
    const uint64_t edges = sys.edge_count();
    const uint64_t distinct = tmap.size();
    res.hypothesis_ok = dyadic_pow_le(Rat((long long)distinct), Rat((long long)edges),
                                      -2ll * e * eps.num, eps.den);
    res.stages.push_back({"input", sys.squares.size(), distinct, edges});
    if (!res.hypothesis_ok) {
        res.diagnostic = "hypothesis failed: not enough tube sharing";
        return res;
    }

    // stage 1: degree regularization with quarter-average floors fixed from
    // the input graph; total discarded edges stay below half
    std::vector<char> sq_alive(sys.squares.size(), 1);
    std::map<Elem, char> tube_alive;
    for (auto& [t, v] : tmap) tube_alive[t] = 1;
    const Rat floor_p = Rat((long long)edges, 4 * (long long)sys.squares.size());
    const Rat floor_t = Rat((long long)edges, 4 * (long long)distinct);
    for (;;) {
        bool changed = false;
        for (size_t i = 0; i < sys.squares.size(); ++i) {
            if (!sq_alive[i]) continue;
            long long d = 0;
            for (const Elem& t : sys.tubes_per_square[i]) d += tube_alive[t];
            if (Rat(d) < floor_p) { sq_alive[i] = 0; changed = true; }
        }
        for (auto& [t, alive] : tube_alive) {
            if (!alive) continue;
            long long d = 0;
            for (size_t i : tmap[t]) d += sq_alive[i];
            if (Rat(d) < floor_t) { alive = 0; changed = true; }
        }
        if (!changed) break;
    }
    {
        uint64_t E = 0, P = 0, Tn = 0;
        for (size_t i = 0; i < sys.squares.size(); ++i) {
            if (!sq_alive[i]) continue;
            ++P;
            for (const Elem& t : sys.tubes_per_square[i]) E += tube_alive[t];
        }
        for (auto& [t, alive] : tube_alive) Tn += alive;
        res.stages.push_back({"regularized", P, Tn, E});
        if (P == 0 || Tn == 0) {
            res.diagnostic = "regularization emptied the system";
            return res;
        }
    }

    // stage 2: uniformize the squares along each surviving tube, group the
    // branching vectors by dyadic class, keep the heaviest group
    std::map<std::vector<int>, std::vector<Elem>> groups;
    std::map<Elem, uint64_t> ysize;
    std::map<std::vector<int>, std::vector<Rat>> group_beta_sum;
    uint64_t tube_tag = 0;
    for (auto& [t, alive] : tube_alive) {
        if (!alive) continue;
        std::vector<Elem> ys;
        for (size_t i : tmap[t])
            if (sq_alive[i]) ys.push_back(sys.squares[i]);
        if (ys.empty()) continue;
        Family yf = Family::make(sys.scale, Kind::squares, std::move(ys));
        UniformExtract ex = extract_uniform(yf, derive_seed(seed, 0xB0, tube_tag++));
        BranchingProfile bp = branching(ex.out);
        std::vector<int> cls(bp.counts.size());
        for (size_t j = 0; j < bp.counts.size(); ++j)
            cls[j] = 63 - __builtin_clzll(bp.counts[j]);
        auto& beta_sum = group_beta_sum[cls];
        if (beta_sum.empty()) beta_sum.assign(bp.beta.size(), Rat(0));
        for (size_t j = 0; j < bp.beta.size(); ++j)
            beta_sum[j] = beta_sum[j] + bp.beta[j];
        groups[cls].push_back(t);
        ysize[t] = ex.out.size();
    }
    if (groups.empty()) {
        res.diagnostic = "no surviving tubes after regularization";
        return res;
    }
    const std::vector<int>* best_cls = nullptr;
    uint64_t best_mass = 0;
    for (auto& [cls, tubes] : groups) {
        uint64_t mass = 0;
        for (const Elem& t : tubes) mass += ysize[t];
        if (mass > best_mass) { best_mass = mass; best_cls = &cls; }
    }
    const std::vector<Elem>& kept_tubes_list = groups.at(*best_cls);
    std::set<Elem> kept_tubes(kept_tubes_list.begin(), kept_tubes_list.end());
    res.stages.push_back(
        {"profile-pigeonhole", sys.squares.size(), kept_tubes_list.size(), best_mass});

    // the group's mean branching function, rescaled to [0,1]; squares branch
    // at up to rate 2 per level so the chart is normalized by 2m
    {
        const size_t members = kept_tubes_list.size();
        std::vector<Rat> beta = group_beta_sum.at(*best_cls);
        for (Rat& b : beta) b = b / Rat((long long)members);
        const long long K = std::max(1ll, (long long)((1024 + m - 1) / m));
        const long long n = (long long)m * K;
        std::vector<Rat> vals((size_t)n + 1);
        for (long long i = 0; i <= n; ++i) {
            long long j = i / K, r = i % K;
            Rat b = r == 0 ? beta[(size_t)j]
                           : beta[(size_t)j] + (beta[(size_t)j + 1] - beta[(size_t)j]) * Rat(r, K);
            vals[(size_t)i] = b / Rat(2 * m);
        }
        LipschitzFn fn = LipschitzFn::make(n, std::move(vals));
        ScalePartition part = good_intervals(fn, eps * eps, std::nullopt, K);
        if (!part.ok) {
            res.diagnostic = "inner decomposition failed: " + part.diagnostic;
            return res;
        }
        // smallest breakpoint whose slope, on the per-level chart, reaches eps
        Rat b(1);
        for (size_t l = 0; l < part.t.size(); ++l) {
            if (!(part.t[l] * Rat(2) < eps)) {
                b = part.A[l];
                break;
            }
        }
        Rat ge = b * Rat(e);
        res.rho_exp = (int)(ge.num / ge.den);
    }
    const int g = res.rho_exp;
    res.rho_in_range = Rat(g) <= Rat(e) * (Rat(1) - eps);

    // stage 3: prune to segments of the kept tubes and verify everything
    const int shift_cell = e - g;
    uint64_t all_segments_sum = 0;
    res.kept_segments.assign(sys.squares.size(), {});
    for (size_t i = 0; i < sys.squares.size(); ++i) {
        std::set<Segment> segs_all, segs_kept;
        Elem cell = ancestor(sys.squares[i], shift_cell);
        for (const Elem& t : sys.tubes_per_square[i]) {
            Segment u{ancestor(t, g), cell};
            segs_all.insert(u);
            if (sq_alive[i] && tube_alive[t] && kept_tubes.count(t)) segs_kept.insert(u);
        }
        all_segments_sum += segs_all.size();
        res.kept_segments[i].assign(segs_kept.begin(), segs_kept.end());
        for (const Segment& u : res.kept_segments[i]) res.segment_squares[u].push_back(i);
    }
    uint64_t kept_sum = 0;
    for (const auto& v : res.kept_segments) kept_sum += v.size();
    res.stages.push_back(
        {"segments", sys.squares.size(), res.segment_squares.size(), kept_sum});
    if (res.segment_squares.empty()) {
        res.diagnostic = "no segments survived";
        return res;
    }

    // double-count identity between the two views of the segment graph
    uint64_t via_segments = 0;
    for (auto& [u, v] : res.segment_squares) via_segments += v.size();
    res.double_count_ok = via_segments == kept_sum;

    // (post 1) two-ends bound for every surviving segment
    res.post_two_ends = true;
    double worst = -1e300;
    for (auto& [u, members] : res.segment_squares) {
        std::vector<Elem> pts;
        pts.reserve(members.size());
        for (size_t i : members) pts.push_back(sys.squares[i]);
        const Rat total((long long)pts.size());
        for (int k = std::max(g, 1); k <= e; ++k) {
            const long long radius = 1ll << (e - k);
            for (const Elem& centr : pts) {
                uint64_t cnt = open_ball_count(pts, centr, radius);
                if (cnt <= 1) continue;
                auto [p, q] = two_ends_exponent(eps, e, k, g);
                if (!dyadic_pow_le(Rat((long long)cnt), cconst * total, p, q))
                    res.post_two_ends = false;
                worst = std::max(worst, std::log2((double)cnt) - double(p) / double(q) -
                                            std::log2(total.to_double()));
            }
        }
    }
    res.two_ends_needed_log2 = worst == -1e300 ? 0.0 : worst;

    // (post 2) mass preservation: kept >= (delta/rho)^(eps^3) * all / c
    {
        Rat e3 = eps * eps * eps * Rat(e - g);
        res.post_mass = dyadic_pow_le(Rat((long long)all_segments_sum),
                                      cconst * Rat((long long)kept_sum), e3.num, e3.den);
        res.mass_ratio = (double)kept_sum / (double)all_segments_sum;
    }

    // (post 3) density: per-segment incidence averages dominate per-tube ones
    {
        Rat lhs = Rat((long long)edges) / Rat((long long)distinct);
        Rat rhs = Rat((long long)all_segments_sum) /
                  Rat((long long)res.segment_squares.size());
        res.post_density = !(rhs * cconst < lhs);
        res.density_lhs = lhs.to_double();
        res.density_rhs = rhs.to_double();
    }
    return res;
}

DichotomyResult dichotomy_audit(const TubeSquareSystem& sys, const Rat& s, const Rat& eps,
                                const Rat& eta, const Rat& cconst) {
    sys.validate();
    DichotomyResult res;
    const int e = sys.scale.e;

    // hypothesis: each T_p is a (delta,s)-set with a moderate constant and
    // the per-square degrees are comparable
    std::vector<uint64_t> degs;
    res.hypothesis_ok = true;
    double worstc = 0.0;
    for (size_t i = 0; i < sys.squares.size(); ++i) {
        if (sys.tubes_per_square[i].empty())
            throw std::invalid_argument("dichotomy_audit: empty tube set at a square");
        Family tf = Family::make(sys.scale, Kind::tubes, sys.tubes_per_square[i], sys.c);
        auto rep = check_delta_set(tf, s, cconst);
        if (!rep.ok) res.hypothesis_ok = false;
        worstc = std::max(worstc, rep.achieved_log2);
        degs.push_back(tf.size());
    }
    res.worst_Tp_constant_log2 = worstc;
    std::sort(degs.begin(), degs.end());
    res.r_median = degs[degs.size() / 2];
    if (degs.back() > 2 * res.r_median || 2 * degs.front() < res.r_median)
        res.hypothesis_ok = false;

    // item 1: |P| r^2 <= c 2^(e(eps+eta)) delta^s |T|^2
    std::set<Elem> all_tubes;
    for (const auto& v : sys.tubes_per_square) all_tubes.insert(v.begin(), v.end());
    {
        Rat lhs = Rat((long long)sys.squares.size()) *
                  Rat((long long)res.r_median) * Rat((long long)res.r_median);
        Rat rhs =
            cconst * Rat((long long)all_tubes.size()) * Rat((long long)all_tubes.size());
        Rat expo = (eps + eta - s) * Rat(e);
        res.item1 = dyadic_pow_le(lhs, rhs, expo.num, expo.den);
        res.item1_ratio_log2 = std::log2(lhs.to_double() / (rhs.to_double() / cconst.to_double())) +
                               (double)e * s.to_double();
    }

    // item 2: search all Delta >= delta^(1 - sqrt eps) for heavy Delta-cells
    // covering a delta^(eps+eta)-fraction of P; the per-cell threshold
    // (Delta/delta)^(2-s+eps^(1/4)) is evaluated in long double, rounded up
    const int Gmax = (int)std::floor((double)e * (1.0 - std::sqrt(eps.to_double())));
    const long double q4 = powl((long double)eps.to_double(), 0.25L);
    for (int G = Gmax; G >= 0; --G) {
        const int shift = e - G;
        std::map<Elem, uint64_t> cells;
        for (const Elem& p : sys.squares) cells[ancestor(p, shift)] += 1;
        long double thr =
            exp2l((long double)(e - G) * (2.0L - (long double)s.to_double() + q4)) /
            (long double)cconst.to_double();
        uint64_t thresh = (uint64_t)ceill(thr);
        uint64_t covered = 0, heavy = 0;
        for (auto& [cell, cnt] : cells)
            if (cnt >= thresh) { covered += cnt; ++heavy; }
        if (heavy == 0) continue;
        Rat expo = (eps + eta) * Rat(e);
        bool frac_ok = dyadic_pow_le(Rat((long long)sys.squares.size()),
                                     cconst * Rat((long long)covered), expo.num, expo.den);
        double frac = (double)covered / (double)sys.squares.size();
        if (frac_ok && frac > res.item2_fraction) {
            res.item2 = true;
            res.item2_Delta_exp = G;
            res.item2_fraction = frac;
            res.item2_cells = heavy;
        }
    }
    return res;
}

void save_system_file(const TubeSquareSystem& sys, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "#system e=" << sys.scale.e << " T=" << sys.scale.T << " c=" << sys.c.num << "/"
        << sys.c.den << "\n";
    for (size_t i = 0; i < sys.squares.size(); ++i) {
        out << sys.squares[i].x << "," << sys.squares[i].y << "|";
        for (size_t j = 0; j < sys.tubes_per_square[i].size(); ++j) {
            if (j) out << ";";
            out << sys.tubes_per_square[i][j].x << "," << sys.tubes_per_square[i][j].y;
        }
        out << "\n";
    }
}

TubeSquareSystem load_system_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("#system", 0) != 0)
        throw std::invalid_argument("system file: missing #system header");
    TubeSquareSystem sys;
    {
        std::istringstream hs(header.substr(8));
        std::string tok;
        int e = -1, T = -1;
        while (hs >> tok) {
            auto eq = tok.find('=');
            std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "e") e = std::stoi(val);
            else if (key == "T") T = std::stoi(val);
            else if (key == "c") {
                auto slash = val.find('/');
                sys.c.num = std::stoll(val.substr(0, slash));
                sys.c.den = std::stoll(val.substr(slash + 1));
            }
        }
        sys.scale = Scale(e, T);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto bar = line.find('|');
        if (bar == std::string::npos)
            throw std::invalid_argument("system file: missing | separator");
        auto comma = line.find(',');
        Elem sq{std::stoll(line.substr(0, comma)),
                std::stoll(line.substr(comma + 1, bar - comma - 1))};
        std::vector<Elem> tubes;
        std::istringstream ts(line.substr(bar + 1));
        std::string item;
        while (std::getline(ts, item, ';')) {
            auto c2 = item.find(',');
            tubes.push_back(Elem{std::stoll(item.substr(0, c2)), std::stoll(item.substr(c2 + 1))});
        }
        sys.squares.push_back(sq);
        sys.tubes_per_square.push_back(std::move(tubes));
    }
    sys.validate();
    return sys;
}

TubeSquareSystem lattice_bush_system(int e, uint64_t seed) {
    Scale sc(e, 2);
    const long long n = sc.side();
    const long long step = 1ll << (e / 2);
    TubeSquareSystem sys;
    sys.scale = sc;
    sys.c = Thickness{step, 1};
    Prng rng(seed);
    const long long spacing = 10;
    for (long long x = spacing / 2; x + 1 < n; x += spacing) {
        for (long long y = spacing / 2; y + 1 < n; y += spacing) {
            Elem p{x + (long long)rng.below(3) - 1, y + (long long)rng.below(3) - 1};
            std::vector<Elem> tubes;
            for (long long a = 0; a < n; a += step) {
                long long num = n * (2 * p.y + 1) - a * (2 * p.x + 1);
                long long j = (num >= 0 ? num + n * step : num - n * step) / (2 * n * step);
                tubes.push_back(Elem{a, j * step});
            }
            sys.squares.push_back(p);
            sys.tubes_per_square.push_back(std::move(tubes));
        }
    }
    sys.validate();
    return sys;
}

}  // namespace tubelab
