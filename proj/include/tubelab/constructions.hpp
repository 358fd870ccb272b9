#pragma once

#include <cstdint>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"

namespace tubelab {

// Tube family organized by direction: slope index -> sorted intercepts.
struct DirectedFamily {
    Scale scale;
    Thickness c;
    std::vector<std::pair<long long, std::vector<long long>>> groups;

    Family directions() const;          // slope indices as an interval family
    Family group_family(size_t i) const;  // intercepts of one direction
    Family flatten() const;             // all tubes as one family
    size_t tube_count() const;
};

// Cantor set with per-bit keep-1-or-2 pattern balanced to hit ~2^(e*dim)
// elements for any rational dim; exactly uniform at block size 1. Used by the
// sharpness constructions when dim*T has no integral block realization.
Family balanced_cantor(int e, const Rat& dim, uint64_t seed);

// Bush configuration: roots on the bottom row at a (delta,1-s)-spread of
// columns, one tube per (root, direction) with directions from a Cantor set
// of dimension s, snapped through the root center.
struct BushExample {
    Family roots;        // squares on row 0
    Family directions;   // interval family on the slope chart
    DirectedFamily tubes;
    uint64_t snap_duplicates = 0;  // tubes merged by grid snapping
};

BushExample bush_example(int e, const Rat& s, uint64_t seed);

// Train track: 2^(e/2) bushes of 2^(e/2) nearly-horizontal tubes through
// delta x delta^(1/2) rectangles with delta^(1/2) vertical separation.
struct TrainTrack {
    Family tubes;
    Family directions;   // the 2^(e/2) consecutive slope intervals
    long long rect_col_lo = 0;  // rectangle column range [lo, lo + 2^(e/2))
};

TrainTrack train_track(int e);

// Random family with |T_theta| ~ 2^(e*t) intercepts in each of ~2^(e*s)
// directions; reports the fraction of the grid reaching richness >= 2^(e*s)/4.
struct AreaSaturation {
    DirectedFamily tubes;
    double covered_fraction = 0.0;   // squares with richness >= threshold
    uint64_t richness_threshold = 0;
};

AreaSaturation area_saturation(int e, const Rat& s, const Rat& t, uint64_t seed);

}  // namespace tubelab
