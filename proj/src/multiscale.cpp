#include "tubelab/multiscale.hpp"

#include <algorithm>
#include <cmath>

namespace tubelab {

LipschitzFn LipschitzFn::make(long long n, std::vector<Rat> values, Rat C) {
    if (n < 1 || (long long)values.size() != n + 1)
        throw std::invalid_argument("LipschitzFn: need n+1 samples");
    if (C.num <= 0) throw std::invalid_argument("LipschitzFn: C must be positive");
    if (values.front().is_negative())
        throw std::invalid_argument("LipschitzFn: f(0) must be >= 0");
    Rat step = C / Rat(n);
    for (long long k = 0; k < n; ++k) {
        Rat d = values[(size_t)k + 1] - values[(size_t)k];
        if (d.is_negative()) throw std::invalid_argument("LipschitzFn: not nondecreasing");
        if (step < d) throw std::invalid_argument("LipschitzFn: increment exceeds C/n");
    }
    LipschitzFn f;
    f.n = n;
    f.v = std::move(values);
    f.C = C;
    return f;
}

LipDecomposition lip_decompose(const LipschitzFn& f, const Rat& eps,
                               std::optional<Rat> tau_override, long long snap_steps) {
    if (eps.num <= 0) throw std::invalid_argument("lip_decompose: eps must be positive");
    // pre: grid fine enough for the requested accuracy
    if (Rat(1, f.n) > eps / (Rat(4) * f.C))
        throw std::invalid_argument("lip_decompose: grid too coarse for eps (need 1/n <= eps/4C)");
    if (snap_steps < 1 || f.n % snap_steps != 0)
        throw std::invalid_argument("lip_decompose: snap_steps must divide n");

    // tau-grid: smallest grid multiple of snap_steps at or above the surrogate
    // eps^(2/eps)/eps (ordinarily far below the grid, so tau = one snap step)
    Rat tau;
    if (tau_override) {
        tau = *tau_override;
    } else {
        double e = eps.to_double();
        double surrogate = std::exp2((2.0 / e) * std::log2(e)) / e;
        long long steps = (long long)std::ceil(surrogate * double(f.n) / double(snap_steps));
        steps = std::max(1ll, steps);
        tau = Rat(steps * snap_steps, f.n);
    }
    long long tau_steps = (long long)((__int128)tau.num * f.n / tau.den);
    if (tau_steps < 1 || (__int128)tau.num * f.n % tau.den != 0 || tau_steps % snap_steps != 0)
        throw std::invalid_argument("lip_decompose: tau must be a grid multiple of snap_steps");

    // tau-grid points; the final step absorbs the remainder so every gap >= tau
    std::vector<long long> grid;
    for (long long g = 0; g + tau_steps <= f.n; g += tau_steps) grid.push_back(g);
    grid.push_back(f.n);

    // lower convex hull (monotone chain), merging equal slopes
    std::vector<long long> hull;
    for (long long g : grid) {
        while (hull.size() >= 2) {
            long long a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            // keep b only if slope(a,b) < slope(b,g), exact cross comparison
            Rat lhs = (f.at(b) - f.at(a)) * Rat(g - b);
            Rat rhs = (f.at(g) - f.at(b)) * Rat(b - a);
            if (lhs < rhs) break;
            hull.pop_back();
        }
        hull.push_back(g);
    }

    LipDecomposition out;
    out.tau = tau;
    out.a_idx = hull;
    for (long long h : hull) out.a.push_back(Rat(h, f.n));
    for (size_t j = 0; j + 1 < hull.size(); ++j)
        out.sigma.push_back((f.at(hull[j + 1]) - f.at(hull[j])) / Rat(hull[j + 1] - hull[j], f.n));

    // machine checks
    for (size_t j = 0; j + 1 < hull.size(); ++j) {
        if (out.a[j + 1] - out.a[j] < tau)
            throw std::logic_error("lip_decompose: breakpoint gap below tau");
        if (j > 0 && !(out.sigma[j - 1] < out.sigma[j]))
            throw std::logic_error("lip_decompose: slopes not strictly increasing");
        if (f.C < out.sigma[j]) throw std::logic_error("lip_decompose: slope above C");
        if (out.sigma[j].is_negative()) throw std::logic_error("lip_decompose: negative slope");
        // (ii) exact at hull vertices
        Rat seg = out.sigma[j] * (out.a[j + 1] - out.a[j]);
        if (seg != f.at(hull[j + 1]) - f.at(hull[j]))
            throw std::logic_error("lip_decompose: piece identity broken");
        // (iii) on every grid point of the piece
        Rat slack = Rat(2) * f.C * tau;
        for (long long x = hull[j]; x <= hull[j + 1]; ++x) {
            Rat line = f.at(hull[j]) + out.sigma[j] * Rat(x - hull[j], f.n);
            if (f.at(x) < line - slack)
                throw std::logic_error("lip_decompose: lower graph bound violated");
        }
    }
    return out;
}

namespace {

struct Run {
    long long lo, hi;  // grid indices
    long long cls;
    bool alive = true;
};

}  // namespace

ScalePartition good_intervals(const LipschitzFn& f, const Rat& eps,
                              std::optional<Rat> eps0_user, long long snap_steps) {
    ScalePartition out;
    out.eps = eps;
    if (!(Rat(0) < eps && eps < Rat(1, 2)))
        throw std::invalid_argument("good_intervals: eps must lie in (0, 1/2)");

    const double eps_d = eps.to_double();
    out.eps0_nominal = ToleranceProfile::eps0_nominal(eps);
    Rat clamp_floor = Rat(4, f.n);  // the grid-level stand-in for eps^(2/eps)
    if (eps0_user) {
        out.eps0_used = *eps0_user;
        if (out.eps0_used < clamp_floor) {
            out.eps0_used = clamp_floor;
            out.eps0_clamped = true;
        }
    } else {
        // nominal value underflows any desk grid; the clamp is the default
        out.eps0_used = clamp_floor;
        out.eps0_clamped = out.eps0_nominal < clamp_floor.to_double();
    }
    if (eps * eps < out.eps0_used) {
        out.diagnostic = "eps0 too large for the grid (need eps0 <= eps^2); refine the grid";
        return out;
    }

    // hull on the eps0/eps grid: every class run then has length >= eps0/eps
    Rat min_len = out.eps0_used / eps;
    long long tau_steps =
        (long long)(((((__int128)min_len.num * f.n + min_len.den - 1) / min_len.den) +
                     snap_steps - 1) / snap_steps) * snap_steps;
    tau_steps = std::max(tau_steps, snap_steps);
    if (tau_steps > f.n / 2) {
        out.diagnostic = "grid too coarse: hull grid would have fewer than 3 points";
        return out;
    }
    Rat tau(tau_steps, f.n);
    out.tau_used = tau;
    LipDecomposition dec = lip_decompose(f, out.eps0_used, tau, snap_steps);

    // slope classes s_k = eps*k; top class includes the right endpoint
    const long long kmax = (long long)std::ceil(f.C.to_double() / eps_d) - 1;
    auto class_of = [&](const Rat& slope) {
        // floor(slope/eps), clamped into [0, kmax]
        __int128 q = (__int128)slope.num * eps.den / ((__int128)slope.den * eps.num);
        long long c = (long long)q;
        return std::min(std::max(c, 0ll), kmax);
    };

    std::vector<Run> runs;
    for (size_t j = 0; j < dec.sigma.size(); ++j) {
        long long cls = class_of(dec.sigma[j]);
        if (!runs.empty() && runs.back().cls == cls)
            runs.back().hi = dec.a_idx[j + 1];
        else
            runs.push_back(Run{dec.a_idx[j], dec.a_idx[j + 1], cls, true});
    }

    // repeatedly take the longest remaining run, absorb strictly shorter
    // neighbors (< eps^2 of the core), emit the merged interval
    struct Emitted {
        long long lo, hi, cls;
    };
    std::vector<Emitted> emitted;
    size_t remaining = runs.size();
    while (remaining > 0) {
        size_t best = runs.size();
        long long best_len = -1;
        for (size_t i = 0; i < runs.size(); ++i) {
            if (!runs[i].alive) continue;
            long long len = runs[i].hi - runs[i].lo;
            if (len > best_len) { best_len = len; best = i; }
        }
        Run& core = runs[best];
        long long lo = core.lo, hi = core.hi;
        Rat threshold = eps * eps * Rat(best_len, f.n);
        core.alive = false;
        --remaining;
        for (size_t i = best; i-- > 0;) {
            if (!runs[i].alive || !(Rat(runs[i].hi - runs[i].lo, f.n) < threshold)) break;
            lo = runs[i].lo;
            runs[i].alive = false;
            --remaining;
        }
        for (size_t i = best + 1; i < runs.size(); ++i) {
            if (!runs[i].alive || !(Rat(runs[i].hi - runs[i].lo, f.n) < threshold)) break;
            hi = runs[i].hi;
            runs[i].alive = false;
            --remaining;
        }
        emitted.push_back(Emitted{lo, hi, core.cls});
    }
    std::sort(emitted.begin(), emitted.end(),
              [](const Emitted& a, const Emitted& b) { return a.lo < b.lo; });

    out.A_idx.push_back(0);
    for (const Emitted& em : emitted) {
        out.A_idx.push_back(em.hi);
        out.t.push_back(eps * Rat(em.cls));
    }
    for (long long idx : out.A_idx) out.A.push_back(Rat(idx, f.n));

    // postconditions, all exact
    out.check_min_length = true;
    out.check_lower_graph = true;
    out.check_upper_growth = true;
    Rat slack_hull = Rat(2) * f.C * tau;
    for (size_t l = 0; l + 1 < out.A_idx.size(); ++l) {
        long long lo = out.A_idx[l], hi = out.A_idx[l + 1];
        Rat len(hi - lo, f.n);
        if (len < min_len) out.check_min_length = false;
        Rat fl = f.at(lo);
        for (long long x = lo; x <= hi; ++x) {
            Rat line = fl + out.t[l] * Rat(x - lo, f.n) - eps * len - slack_hull;
            if (f.at(x) < line) out.check_lower_graph = false;
        }
        if (fl + (out.t[l] + Rat(3) * eps) * len < f.at(hi)) out.check_upper_growth = false;
        if (l > 0 && !(out.t[l - 1] < out.t[l]))
            throw std::logic_error("good_intervals: slopes not strictly increasing");
    }
    out.check_first_slope = !(f.v.back() - f.v.front() + eps < out.t.front());
    out.ok = out.check_min_length && out.check_lower_graph && out.check_upper_growth &&
             out.check_first_slope;
    if (!out.ok && out.diagnostic.empty())
        out.diagnostic = "postcondition failure; eps0 likely too large for this grid";
    return out;
}

FamilyDecomposition decompose_family(const Family& f, const Rat& eps) {
    if (!is_uniform(f)) throw std::invalid_argument("decompose_family: input not uniform");
    if (f.kind == Kind::squares)
        throw std::invalid_argument(
            "decompose_family: expects intervals or slope-parameterized tubes");
    Family base = f;
    if (f.kind == Kind::tubes) {
        // tubes through a common square are parameterized by slope
        std::vector<Elem> slopes;
        for (const Elem& el : f.elems) {
            if (el.x >= f.scale.side())
                throw std::invalid_argument("decompose_family: slope chart edge unsupported");
            slopes.push_back(Elem{el.x, 0});
        }
        base = Family::make(f.scale, Kind::intervals, std::move(slopes));
        if (base.size() != f.size())
            throw std::invalid_argument("decompose_family: tubes must have distinct slopes");
    }

    const int e = base.scale.e, T = base.scale.T, m = base.scale.levels();
    BranchingProfile bp = branching(base);

    // rescale beta to [0,1] on a refined grid; breakpoints snap to block levels
    const long long K = std::max(1ll, (long long)((1024 + m - 1) / m));
    const long long n = (long long)m * K;
    std::vector<Rat> vals((size_t)n + 1);
    for (long long i = 0; i <= n; ++i) {
        long long j = i / K, r = i % K;
        Rat b = r == 0 ? bp.beta[(size_t)j]
                       : bp.beta[(size_t)j] +
                             (bp.beta[(size_t)j + 1] - bp.beta[(size_t)j]) * Rat(r, K);
        vals[(size_t)i] = b / Rat(m);
    }
    LipschitzFn fn = LipschitzFn::make(n, std::move(vals));

    FamilyDecomposition out;
    out.part = good_intervals(fn, eps, std::nullopt, K);
    if (!out.part.ok) return out;

    // per-level verification against the class slope
    out.all_growth_ok = true;
    for (size_t l = 0; l + 1 < out.part.A_idx.size(); ++l) {
        LevelReport rep;
        rep.j_lo = (int)(out.part.A_idx[l] / K);
        rep.j_hi = (int)(out.part.A_idx[l + 1] / K);
        rep.t = out.part.t[l];
        const int dj = rep.j_hi - rep.j_lo;
        const int bits = dj * T;
        rep.child_count = bp.counts[(size_t)rep.j_hi] / bp.counts[(size_t)rep.j_lo];
        rep.t_measured = std::log2((double)rep.child_count) / (double)bits;

        // growth: N(j_hi)/N(j_lo) <= 2^(e (t+3eps) dA),  dA = dj/m
        Rat ratio((long long)rep.child_count, 1);
        Rat expo = (rep.t + Rat(3) * eps) * Rat((long long)e * dj, m);
        rep.growth_ok = dyadic_pow_le(ratio, Rat(1), expo.num, expo.den);
        if (!rep.growth_ok) out.all_growth_ok = false;

        if (bits >= 2) {
            rep.delta_checked = true;
            const int shift_par = e - rep.j_lo * T;
            const int shift_ch = e - rep.j_hi * T;
            std::vector<Elem> parents;
            for (const Elem& el : base.elems) parents.push_back(ancestor(el, shift_par));
            std::sort(parents.begin(), parents.end());
            parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
            double worst = 0.0;
            for (const Elem& p : parents) {
                std::vector<Elem> kids;
                for (const Elem& el : base.elems)
                    if (ancestor(el, shift_par) == p) {
                        long long rel = (el.x >> shift_ch) - (p.x << (shift_par - shift_ch));
                        kids.push_back(Elem{rel, 0});
                    }
                std::sort(kids.begin(), kids.end());
                kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
                Family child = Family::make(Scale(bits, T), Kind::intervals, std::move(kids));
                auto cr =
                    check_delta_set(child, rep.t.num <= 0 ? Rat(1, 1000000) : rep.t, Rat(1));
                worst = std::max(worst, cr.achieved_log2);
            }
            rep.max_needed_constant_log2 = worst;
            rep.phi_measured = worst / ((double)bits);
        }
        out.levels.push_back(rep);
    }

    // t_1 <= log_{1/delta}|F| + eps:  1 <= |F| * 2^(e(eps - t1))
    Rat expo = (eps - out.part.t.front()) * Rat(e);
    out.first_slope_ok = dyadic_pow_le(Rat(1), Rat((long long)base.size()), expo.num, expo.den);
    return out;
}

}  // namespace tubelab
