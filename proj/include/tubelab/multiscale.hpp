#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"
#include "tubelab/set_checks.hpp"

namespace tubelab {

// Nondecreasing C-Lipschitz function sampled on the uniform grid k/n.
struct LipschitzFn {
    long long n = 1;
    std::vector<Rat> v;  // n+1 values
    Rat C{1};

    static LipschitzFn make(long long n, std::vector<Rat> values, Rat C = Rat(1));
    const Rat& at(long long k) const { return v[(size_t)k]; }
};

// Lower convex hull of the samples restricted to a tau-grid.
// Guarantees, all machine-checked before returning:
//   (i)   a[j+1] - a[j] >= tau, slopes strictly increasing, <= C
//   (ii)  sum of slope*(length) telescopes exactly to the value differences
//   (iii) f(x) >= f(a[j]) + sigma[j] (x - a[j]) - 2 C tau on every grid x
struct LipDecomposition {
    std::vector<Rat> a;      // J+1 breakpoints, 0 = a[0] < ... < a[J] = 1
    std::vector<Rat> sigma;  // J slopes
    Rat tau;
    std::vector<long long> a_idx;  // breakpoints as grid indices
};

LipDecomposition lip_decompose(const LipschitzFn& f, const Rat& eps,
                               std::optional<Rat> tau_override = std::nullopt,
                               long long snap_steps = 1);

// Partition of [0,1] into good intervals with slopes on the eps-class grid.
struct ScalePartition {
    bool ok = false;
    std::string diagnostic;
    std::vector<Rat> A;  // L+1 breakpoints
    std::vector<Rat> t;  // L class slopes, strictly increasing
    std::vector<long long> A_idx;
    Rat eps;
    Rat eps0_used;          // after clamping
    double eps0_nominal;    // eps^(2/eps)
    bool eps0_clamped = false;
    Rat tau_used;           // hull grid constant; slack 2*C*tau in the checks
    // machine-checked postconditions
    bool check_min_length = false;   // A[l+1]-A[l] >= eps0/eps
    bool check_lower_graph = false;  // f >= f(A_l) + t_l (x-A_l) - eps*len - 2C tau
    bool check_upper_growth = false; // f(A_{l+1}) <= f(A_l) + (t_l+3eps) len
    bool check_first_slope = false;  // t_1 <= f(1)-f(0)+eps
};

ScalePartition good_intervals(const LipschitzFn& f, const Rat& eps,
                              std::optional<Rat> eps0_user = std::nullopt,
                              long long snap_steps = 1);

// Multiscale decomposition of an exactly uniform family of intervals (or
// tubes through a fixed square, parameterized by slope). Applies
// good_intervals to the rescaled branching function and verifies, per level,
// the rescaled child families against the class slope.
struct LevelReport {
    int j_lo = 0, j_hi = 0;        // block levels delta^(A_l) .. delta^(A_{l+1})
    Rat t;                          // class slope
    bool delta_checked = false;     // per-parent check ran (needs >= 2 bits)
    double max_needed_constant_log2 = 0.0;  // max over parents
    double phi_measured = 0.0;      // constant exponent per unit scale gap
    uint64_t child_count = 0;       // children per parent (uniform)
    double t_measured = 0.0;        // log2(child_count) / (bits)
    bool growth_ok = false;         // count ratio <= 2^(e (t+3eps) dA)
};

struct FamilyDecomposition {
    ScalePartition part;
    std::vector<LevelReport> levels;
    bool first_slope_ok = false;    // t_1 <= log_{1/delta}|F| + eps
    bool all_growth_ok = false;
};

FamilyDecomposition decompose_family(const Family& f, const Rat& eps);

}  // namespace tubelab
