#include "tubelab/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tubelab/prng.hpp"
#include "tubelab/set_checks.hpp"

namespace tubelab {

namespace {

// allowance factor: constant (and exponent pair) for c * delta^-upsilon or
// the log-loss replacement c * log2(1/delta)
struct Allowance {
    Rat constant;
    long long x_num = 0;  // extra dyadic exponent x_num/x_den
    long long x_den = 1;
};

Allowance allowance(const AugmentConfig& cfg, int e) {
    Allowance a;
    if (cfg.log_mode) {
        a.constant = cfg.implicit_const * Rat(e);
    } else {
        a.constant = cfg.implicit_const;
        a.x_num = (long long)e * cfg.upsilon.num;
        a.x_den = cfg.upsilon.den;
    }
    return a;
}

// size window checks for |A| against the target K * 2^(e*s)
void check_size(AugmentChecks& ck, uint64_t size, const Rat& K, const Rat& s, int e,
                const Allowance& al, const Rat& c) {
    // upper: |A| <= c * K * 2^(es)
    ck.size_upper = dyadic_pow_le(Rat((long long)size), c * K, (long long)e * s.num, s.den);
    // lower: K * 2^(es) <= allowance * |A| * 2^(x)  (x = e*upsilon, or 0 in log mode)
    long long p = -(long long)e * s.num * al.x_den + al.x_num * s.den;
    long long q = (long long)s.den * al.x_den;
    ck.size_lower = dyadic_pow_le(K, al.constant * Rat((long long)size), p, q);
}

uint64_t max_cell_multiplicity(const std::vector<long long>& cells) {
    uint64_t best = 0, run = 0;
    for (size_t i = 0; i < cells.size(); ++i) {
        run = (i > 0 && cells[i] == cells[i - 1]) ? run + 1 : 1;
        best = std::max(best, run);
    }
    return best;
}

}  // namespace

std::string AugmentChecks::failed() const {
    std::string s;
    if (!size_lower) s += "size-lower ";
    if (!size_upper) s += "size-upper ";
    if (!katz_tao) s += "katz-tao ";
    if (!multiplicity) s += "multiplicity ";
    return s;
}

TranslateResult augment_translates(const Family& S, const Rat& s, const Rat& K,
                                   const AugmentConfig& cfg, uint64_t seed) {
    if (S.kind != Kind::intervals)
        throw std::invalid_argument("augment_translates: expects intervals");
    if (!is_uniform(S)) throw std::invalid_argument("augment_translates: S must be uniform");
    if (!check_katz_tao(S, s, K).ok)
        throw std::invalid_argument("augment_translates: S fails the (s,K) Katz-Tao bound");
    const int e = S.scale.e;
    const long long n = S.scale.side();
    const Allowance al = allowance(cfg, e);

    // N ~ K 2^(es) / |S|
    double N_d = K.to_double() * std::exp2((double)e * s.to_double()) / (double)S.size();
    uint64_t N = (uint64_t)std::max(1.0, std::min(std::llround(N_d) * 1.0, (double)n));

    TranslateResult res;
    for (int attempt = 0; attempt < cfg.retries; ++attempt) {
        res.attempts = attempt + 1;
        Prng rng(derive_seed(seed, (uint64_t)attempt, 0xA06));
        std::vector<uint64_t> ts = rng.sample_distinct((uint64_t)n, N);
        res.translates.assign(ts.begin(), ts.end());

        std::vector<long long> cells;
        cells.reserve(S.size() * ts.size());
        for (uint64_t t : ts)
            for (const Elem& el : S.elems) cells.push_back((el.x + (long long)t) % n);
        std::sort(cells.begin(), cells.end());
        res.checks.max_multiplicity = max_cell_multiplicity(cells);
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        std::vector<Elem> elems(cells.size());
        for (size_t i = 0; i < cells.size(); ++i) elems[i] = Elem{cells[i], 0};
        res.out = Family::make(S.scale, Kind::intervals, std::move(elems));

        check_size(res.checks, res.out.size(), K, s, e, al, cfg.implicit_const);
        res.checks.katz_tao =
            check_katz_tao_x(res.out, s, al.constant * K, al.x_num, al.x_den).ok;
        res.checks.multiplicity = dyadic_pow_le(Rat((long long)res.checks.max_multiplicity),
                                                al.constant, al.x_num, al.x_den);
        if (res.checks.all()) return res;
    }
    throw budget_error("augment_translates: retries exhausted; failing checks: " +
                       res.checks.failed());
}

RigidResult augment_rigid(const DirectedFamily& in, const Rat& s, const Rat& K1,
                          const Rat& K2, const AugmentConfig& cfg, uint64_t seed) {
    const Scale sc = in.scale;
    const int e = sc.e;
    const long long n = sc.side();
    const Allowance al = allowance(cfg, e);

    Family dirs = in.directions();
    if (dirs.empty()) throw std::invalid_argument("augment_rigid: no directions");
    if (!is_uniform(dirs))
        throw std::invalid_argument("augment_rigid: direction set must be uniform");
    if (!check_katz_tao(dirs, s, K1).ok)
        throw std::invalid_argument("augment_rigid: directions fail the (s,K1) bound");
    size_t min_g = SIZE_MAX, max_g = 0;
    for (size_t i = 0; i < in.groups.size(); ++i) {
        Family g = in.group_family(i);
        if (!is_uniform(g))
            throw std::invalid_argument("augment_rigid: a direction group is not uniform");
        if (!check_katz_tao(g, Rat(1) - s, K2).ok)
            throw std::invalid_argument("augment_rigid: a group fails the (1-s,K2) bound");
        min_g = std::min(min_g, g.size());
        max_g = std::max(max_g, g.size());
    }
    if (max_g > 2 * min_g)
        throw std::invalid_argument("augment_rigid: group sizes not comparable");

    double N1_d = K1.to_double() * std::exp2((double)e * s.to_double()) / (double)dirs.size();
    uint64_t N1 = (uint64_t)std::max(1.0, std::min(std::llround(N1_d) * 1.0, (double)n));
    double N2_d =
        K2.to_double() * std::exp2((double)e * (1.0 - s.to_double())) / (double)max_g;
    uint64_t N2 = (uint64_t)std::max(1.0, std::min(std::llround(N2_d) * 1.0, (double)(2 * n)));

    RigidResult res;
    for (int attempt = 0; attempt < cfg.retries; ++attempt) {
        res.attempts = attempt + 1;
        Prng rng(derive_seed(seed, (uint64_t)attempt, 0xA16));
        std::vector<uint64_t> shifts = rng.sample_distinct((uint64_t)n, N1);
        std::vector<uint64_t> trans = rng.sample_distinct((uint64_t)(2 * n), N2);
        res.slope_shifts.assign(shifts.begin(), shifts.end());
        res.intercept_translates.assign(trans.begin(), trans.end());

        // stage 1: directions
        std::vector<long long> dcells;
        for (uint64_t r : shifts)
            for (const auto& [a, bs] : in.groups)
                dcells.push_back((a + (long long)r) % n);
        std::sort(dcells.begin(), dcells.end());
        res.direction_checks.max_multiplicity = max_cell_multiplicity(dcells);

        // stage 2: tubes, multiplicity tracked per final tube; intercepts wrap
        // cyclically inside the valid window [-a, n) of their direction so
        // every produced tube still meets the unit square
        std::map<std::pair<long long, long long>, uint32_t> tube_mult;
        for (uint64_t r : shifts) {
            for (const auto& [a, bs] : in.groups) {
                long long a_new = (a + (long long)r) % n;
                const long long window = n + a_new;
                for (uint64_t t : trans)
                    for (long long b : bs) {
                        long long v = (b + a_new + (long long)t) % window;
                        if (v < 0) v += window;
                        tube_mult[{a_new, v - a_new}] += 1;
                    }
            }
        }

        res.out = DirectedFamily{};
        res.out.scale = sc;
        res.out.c = in.c;
        res.max_tube_multiplicity = 0;
        for (const auto& [key, mult] : tube_mult) {
            res.max_tube_multiplicity = std::max<uint64_t>(res.max_tube_multiplicity, mult);
            if (res.out.groups.empty() || res.out.groups.back().first != key.first)
                res.out.groups.push_back({key.first, {}});
            res.out.groups.back().second.push_back(key.second);
        }

        // direction checks
        Family new_dirs = res.out.directions();
        check_size(res.direction_checks, new_dirs.size(), K1, s, e, al, cfg.implicit_const);
        res.direction_checks.katz_tao =
            check_katz_tao_x(new_dirs, s, al.constant * K1, al.x_num, al.x_den).ok;
        res.direction_checks.multiplicity =
            dyadic_pow_le(Rat((long long)res.direction_checks.max_multiplicity), al.constant,
                          al.x_num, al.x_den);

        // per-direction tube checks: worst over directions
        res.tube_checks = AugmentChecks{};
        res.tube_checks.size_lower = res.tube_checks.size_upper = true;
        res.tube_checks.katz_tao = res.tube_checks.multiplicity = true;
        for (size_t i = 0; i < res.out.groups.size(); ++i) {
            Family g = res.out.group_family(i);
            AugmentChecks ck;
            check_size(ck, g.size(), K2, Rat(1) - s, e, al, cfg.implicit_const);
            ck.katz_tao =
                check_katz_tao_x(g, Rat(1) - s, al.constant * K2, al.x_num, al.x_den).ok;
            res.tube_checks.size_lower &= ck.size_lower;
            res.tube_checks.size_upper &= ck.size_upper;
            res.tube_checks.katz_tao &= ck.katz_tao;
        }
        res.tube_multiplicity_ok = dyadic_pow_le(Rat((long long)res.max_tube_multiplicity),
                                                 al.constant, al.x_num, al.x_den);
        res.tube_checks.max_multiplicity = res.max_tube_multiplicity;
        res.tube_checks.multiplicity = res.tube_multiplicity_ok;
        if (res.all_ok()) return res;
    }
    throw budget_error("augment_rigid: retries exhausted; dir[" +
                       res.direction_checks.failed() + "] tube[" + res.tube_checks.failed() +
                       "]");
}

}  // namespace tubelab
