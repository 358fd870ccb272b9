#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"

namespace tubelab {

// The tolerance knobs gathered in one place. eps0 defaults to eps^(2/eps)
// clamped above delta; upsilon/eta drive the randomized allowances and the
// audits; implicit_constant is carried into every reported bound.
struct ToleranceProfile {
    Rat eps{1, 4};
    Rat eps0{0};  // 0 = derive from eps at use time
    Rat upsilon{1, 10};
    Rat eta{1, 10};
    Rat implicit_constant{4};

    // the nominal eps^(2/eps); callers clamp it to their grid or scale
    static double eps0_nominal(const Rat& eps);
};

// Verdict of a non-concentration check. Quantifier grid: ball centers at the
// family's own elements, dyadic radii 2^-k for 0 <= k <= e, open Chebyshev
// balls on index centers; ball counts <= 1 pass unconditionally (one point
// cannot witness concentration). The restriction moves constants by at most
// 4 relative to arbitrary centers and radii.
struct SetReport {
    bool ok = true;
    Elem worst_center;
    int worst_radius_exp = 0;
    // smallest constant that would pass on this quantifier grid, as a dyadic
    // upper rounding; exact pass/fail is decided by integer arithmetic
    Rat achieved_constant{1};
    double achieved_log2 = 0.0;  // log2 of the same
    std::string quantifier = "centers=elements radii=dyadic metric=chebyshev";
};

// |F ∩ B(x,r)| <= C * r^s * |F| for all element centers x, dyadic r in [delta, 1].
SetReport check_delta_set(const Family& f, const Rat& s, const Rat& C);

// |F ∩ B(x,r)| <= K * (r/delta)^s likewise.
SetReport check_katz_tao(const Family& f, const Rat& s, const Rat& K);

// Same tests with an extra dyadic factor 2^(x_num/x_den) on the constant
// (used for delta^-upsilon style allowances).
SetReport check_delta_set_x(const Family& f, const Rat& s, const Rat& C,
                            long long x_num, long long x_den);
SetReport check_katz_tao_x(const Family& f, const Rat& s, const Rat& K,
                           long long x_num, long long x_den);

// Katz-Tao bound over dyadic cells instead of balls: for every dyadic r-cell
// Q, |F ∩ Q| <= K (r/delta)^s, all r = 2^-k down to delta.
SetReport check_katz_tao_dyadic(const Family& f, const Rat& s, const Rat& K);

// Cardinality of F inside the open Chebyshev ball of radius 2^-k about `center`.
uint64_t ball_count(const Family& f, const Elem& center, int radius_exp);

// Ahlfors-David regular Cantor family: per block level every surviving node
// keeps 2^(sT) children, placed with a fixed stride and a seeded cyclic
// offset. Requires s*T integral. |F| = 2^(e*s), exactly uniform.
Family generate_ad_regular(const Scale& sc, const Rat& s, uint64_t seed,
                           Kind kind = Kind::intervals);

// Rejection sampler for generic (delta,s,K)-Katz-Tao inputs: uniform random
// family of size ~ K * 2^(es) that passes check_katz_tao(s, 2K).
Family generate_random_frostman(const Scale& sc, const Rat& s, uint64_t seed,
                                const Rat& K, Kind kind = Kind::intervals,
                                int retries = 64);

// Exact uniformity: for every block level, all nonempty cells hold equally
// many elements.
bool is_uniform(const Family& f);

// max over all dyadic scales (not only block levels) of max/min nonzero cell
// count; exact uniformity bounds this by 2^(dT).
Rat uniformity_spread(const Family& f);

struct UniformExtract {
    Family out;
    Rat retained_ratio;    // |out| / |f|
    Rat guaranteed_ratio;  // product of per-level pigeonhole bounds
};

// Coarse-to-fine pigeonholing: bucket parents by the dyadic class of their
// child count, keep the class with the most surviving mass (ties to the lower
// class), trim every kept parent to the minimum kept child count.
UniformExtract extract_uniform(const Family& f, uint64_t seed);

// Partition an exactly uniform family into Katz-Tao pieces by splitting, from
// the bottom of the tree upward, every level whose per-cell count exceeds
// (rho/rho_prev)^s. Each part obeys |S_i ∩ Q| <= 2^(dT) (r/delta)^s over
// dyadic cells.
std::vector<Family> partition_katz_tao(const Family& f, const Rat& s);

// Repeated uniform extraction until nothing is left; parts are exactly
// uniform and disjoint, their union is f.
std::vector<Family> partition_uniform(const Family& f, uint64_t seed);

// beta(j) = log2 |F|_{2^-jT} / T, recorded with exact covering counts and a
// dyadic-rational approximation of beta (increments rounded down at 2^-20).
struct BranchingProfile {
    int T = 1;
    int dim = 1;
    std::vector<uint64_t> counts;  // m+1 covering numbers, coarse to fine
    std::vector<Rat> beta;         // m+1 values, beta[0] = 0

    int levels() const { return (int)counts.size() - 1; }
};

BranchingProfile branching(const Family& f);

}  // namespace tubelab
