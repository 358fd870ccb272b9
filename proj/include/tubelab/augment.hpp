#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubelab/constructions.hpp"
#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"

namespace tubelab {

// Loss allowance for the randomized constructions: either delta^-upsilon or
// the log2(1/delta) replacement. Implicit constants default to 4 and are
// carried into every reported bound.
struct AugmentConfig {
    Rat upsilon{1, 10};
    bool log_mode = false;
    Rat implicit_const{4};
    int retries = 5;
};

struct AugmentChecks {
    bool size_lower = false;
    bool size_upper = false;
    bool katz_tao = false;
    bool multiplicity = false;
    uint64_t max_multiplicity = 0;

    bool all() const { return size_lower && size_upper && katz_tao && multiplicity; }
    std::string failed() const;
};

struct TranslateResult {
    Family out;
    std::vector<long long> translates;
    int attempts = 1;
    AugmentChecks checks;
};

// Random circular translates inflating a uniform Katz-Tao set of intervals to
// size ~ K * delta^-s while keeping the Katz-Tao bound up to the allowance.
// Resamples until the three checks pass or retries run out.
TranslateResult augment_translates(const Family& S, const Rat& s, const Rat& K,
                                   const AugmentConfig& cfg, uint64_t seed);

struct RigidResult {
    DirectedFamily out;
    std::vector<long long> slope_shifts;
    std::vector<long long> intercept_translates;  // shared across directions
    int attempts = 1;
    AugmentChecks direction_checks;
    AugmentChecks tube_checks;        // worst over directions
    uint64_t max_tube_multiplicity = 0;
    bool tube_multiplicity_ok = false;

    bool all_ok() const {
        return direction_checks.all() && tube_checks.all() && tube_multiplicity_ok;
    }
};

// Two-stage motion set: circular shifts on the slope chart, then one shared
// intercept translate set. Rotations are realized as slope-index shifts (the
// shear model); the non-concentration checks are translation invariant on the
// chart, which is all the construction uses.
RigidResult augment_rigid(const DirectedFamily& in, const Rat& s, const Rat& K1,
                          const Rat& K2, const AugmentConfig& cfg, uint64_t seed);

}  // namespace tubelab
