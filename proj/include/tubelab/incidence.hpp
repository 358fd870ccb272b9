#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"

namespace tubelab {

// Exact per-square tube counts. Dense grid up to e = 12; sparse column
// buckets above that. Both representations must agree bit for bit.
struct RichnessMap {
    Scale scale;
    bool dense = true;
    std::vector<uint32_t> grid;  // dense: side*side, row-major by column
    // sparse: per column, (row, count) sorted by row
    std::vector<std::vector<std::pair<long long, uint32_t>>> columns;

    uint32_t at(long long col, long long row) const;
    uint64_t total() const;                 // sum of all counts = total incidences
    uint64_t support() const;               // squares with count >= 1
    uint64_t count_at_least(uint64_t r) const;
};

// Column sweep, O(|T| * 2^e). threads only affects speed, never a bit of
// output. force_sparse exercises the sparse representation at small e; the
// two representations must agree count for count.
RichnessMap richness_map(const Family& tubes, int threads = 1, bool force_sparse = false);

struct RichnessHistogram {
    // bin i holds squares with count in [2^i, 2^(i+1))
    std::vector<uint64_t> bin_counts;
    uint64_t support = 0;
};

RichnessHistogram richness_histogram(const RichnessMap& map);

// Squares with richness >= r as a family, plus the dyadic histogram.
// Convention: "~r" bins are [r, 2r); ">= r" is the returned family.
std::pair<Family, RichnessHistogram> rich_squares(const Family& tubes, uint64_t r,
                                                  const RichnessMap& map);
Family rich_band(const RichnessMap& map, uint64_t r);  // counts in [r, 2r)

struct IncidenceReport {
    uint64_t incidences = 0;
    double ratio_to_trivial = 0.0;   // I / (delta^{-1/3} (|P||T|)^{2/3})
    double ratio_to_st_form = 0.0;   // I / (|P||T|)^{2/3}
};

IncidenceReport incidence_count(const Family& squares, const Family& tubes,
                                const RichnessMap* map = nullptr);

struct StRatioRow {
    uint64_t r = 1;
    uint64_t count = 0;   // |P_{[r,2r)}|
    Rat ratio{0};         // count * r^3 / |T|^2, exact
};

struct StRatio {
    Rat max_ratio{0};
    uint64_t argmax_r = 1;
    std::vector<StRatioRow> table;
    bool small_family = false;  // |T| << delta^-1: outside the main regime
};

StRatio st_ratio(const Family& tubes, const RichnessMap* map = nullptr, int threads = 1);

// Dyadic pigeonholing across disjoint tube collections: a dyadic M and a
// subset P of the r-rich squares such that every p in P is r/M-rich for at
// least M/(2 log2(1/delta)) of the parts. Verified before returning.
struct PigeonholeSplit {
    uint64_t M = 1;
    Family P;
    uint64_t rich_total = 0;  // |P_{>=r}(union)|
    bool size_ok = false;     // |P| >= rich_total / (2 log2(1/delta))
    bool member_ok = false;   // per-square membership condition re-checked
};

PigeonholeSplit pigeonhole_split(const std::vector<Family>& parts, uint64_t r);

}  // namespace tubelab
