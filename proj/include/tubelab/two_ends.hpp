#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"
#include "tubelab/set_checks.hpp"

namespace tubelab {

// Squares with per-square tube sets; every listed tube meets its square.
// The dual view P_T = { p : T in T_p } is derived, and the double-count
// identity sum |T_p| = sum |P_T| is maintained through every refinement.
struct TubeSquareSystem {
    Scale scale;
    Thickness c;
    std::vector<Elem> squares;
    std::vector<std::vector<Elem>> tubes_per_square;

    void validate() const;
    uint64_t edge_count() const;
    std::map<Elem, std::vector<size_t>> tube_to_squares() const;
};

struct TwoEndsVerdict {
    bool ok = true;
    int worst_rho_exp = 0;
    Elem worst_center;
    double needed_constant_log2 = 0.0;
};

// |P_T ∩ B_rho| <= c rho^eps delta^(-5 eps^3) |P_T| over dyadic rho in
// (delta, 1), ball centers at the squares themselves.
TwoEndsVerdict is_two_ends(const Scale& sc, const std::vector<Elem>& squares_on_tube,
                           const Rat& eps, const Rat& cconst);

struct CoverRow {
    int rho_exp;
    uint64_t covering;
    double ratio_log2;  // log2( |P|_rho / rho^-s )
};

struct CoverReport {
    std::vector<CoverRow> rows;
    double min_ratio_log2 = 0.0;
    double slack_exponent = 0.0;  // the achieved delta^(O(eps)) exponent
};

CoverReport covering_lower_check(const Family& squares, const Rat& s, const Rat& eps);

// A delta x rho segment: the piece of a tube inside one rho-cell, keyed by
// the tube's coarse parent and the cell.
struct Segment {
    Elem tube_parent;  // ancestor on the dual chart at scale delta/rho
    Elem cell;         // the rho-square

    friend bool operator<(const Segment& a, const Segment& b) {
        if (!(a.tube_parent == b.tube_parent)) return a.tube_parent < b.tube_parent;
        return a.cell < b.cell;
    }
    friend bool operator==(const Segment& a, const Segment& b) {
        return a.tube_parent == b.tube_parent && a.cell == b.cell;
    }
};

struct RefineStage {
    std::string name;
    uint64_t squares = 0, tubes = 0, edges = 0;
};

struct RefineResult {
    bool hypothesis_ok = false;   // sum |T_p| >= delta^(-2 eps) |union T_p|
    int rho_exp = 0;              // the selected scale 2^-rho_exp
    bool rho_in_range = false;    // rho >= delta^(1-eps)
    // surviving segments per square index, and segment -> squares
    std::vector<std::vector<Segment>> kept_segments;
    std::map<Segment, std::vector<size_t>> segment_squares;
    // machine-checked postconditions (constant cconst on each)
    bool post_two_ends = false;
    bool post_mass = false;
    bool post_density = false;
    double two_ends_needed_log2 = 0.0;
    double mass_ratio = 0.0;      // sum|kept| / sum|all segments|
    double density_lhs = 0.0, density_rhs = 0.0;
    std::vector<RefineStage> stages;
    bool double_count_ok = false;
    std::string diagnostic;
};

RefineResult two_ends_refine(const TubeSquareSystem& sys, const Rat& eps, uint64_t seed,
                             const Rat& cconst = Rat(4));

struct DichotomyResult {
    bool hypothesis_ok = false;   // every T_p a delta-set at the stated s
    double worst_Tp_constant_log2 = 0.0;
    uint64_t r_median = 0;
    bool item1 = false;
    double item1_ratio_log2 = 0.0;  // log2( |P| r^2 / (delta^s |T|^2) )
    bool item2 = false;
    int item2_Delta_exp = 0;
    double item2_fraction = 0.0;
    uint64_t item2_cells = 0;
};

// Empirical audit of the spread-or-concentrated dichotomy: either |P| obeys
// the Szemeredi-Trotter-shaped bound, or some scale Delta >= delta^(1-sqrt eps)
// concentrates a delta^(O(eps+eta)) fraction of P in heavy Delta-squares.
DichotomyResult dichotomy_audit(const TubeSquareSystem& sys, const Rat& s, const Rat& eps,
                                const Rat& eta, const Rat& cconst = Rat(4));

// System file: "#system e=<e> T=<T> c=<num>/<den>" then one line per square,
// "px,py|a1,b1;a2,b2;...". Round-trips exactly.
void save_system_file(const TubeSquareSystem& sys, const std::string& path);
TubeSquareSystem load_system_file(const std::string& path);

// The lattice-of-squares fixture over a coarse grid of thick tubes: jittered
// spread roots, one tube per slope each, heavy sharing by construction.
TubeSquareSystem lattice_bush_system(int e, uint64_t seed);

}  // namespace tubelab
