#pragma once

#include <cstdint>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"

namespace tubelab {

// Frequency split of the tube-sum function f = sum_T phi_T on the 2^e x 2^e
// sample grid. phi_T is a flat-top raised-cosine cross-profile (1 on the tube
// strip, cosine taper to zero at twice the width) so phi_T >= 1_T with unit
// height. The split applies a radial raised-cosine frequency cutoff between
// 2^(e(1-beta/2)) and twice that; f_high = f - f_low pointwise.
struct SplitResult {
    int e = 0;
    std::vector<double> f, f_low, f_high;
    double high_energy_l2 = 0.0;    // delta^2 * sum f_high^2, the integral proxy
    double low_sup = 0.0;           // max |f_low|
    double energy_ratio = 0.0;      // high_energy_l2 / (delta^(1-beta) |T|)
    double parseval_rel_gap = 0.0;  // |sum f^2 - sum fl^2 - sum fh^2 - cross| rel
};

SplitResult fourier_split(const Family& tubes, const Rat& beta, int threads = 1);

// Direct combinatorial search for the smallest dyadic scale at which at
// least half of the r0-rich squares see >= c r0 (scale/delta) tubes meeting
// the scale-sized ball around their center.
struct HeavyBallRow {
    int scale_exp;      // candidate = 2^-scale_exp
    double fraction;    // heavy squares among the r0-rich ones
};

struct HeavyBallResult {
    bool hypothesis_holds = false;  // |P_r0| >= delta^(-2-beta) / r0
    bool found = false;
    int scale_exp = 0;              // smallest passing candidate (largest exp)
    uint64_t rich_count = 0;
    std::vector<HeavyBallRow> rows;
};

HeavyBallResult heavy_ball_scale(const Family& tubes, uint64_t r0, const Rat& beta,
                                 const Rat& upsilon, const Rat& c = Rat(1, 8),
                                 int threads = 1);

}  // namespace tubelab
