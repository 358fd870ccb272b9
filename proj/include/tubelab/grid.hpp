#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tubelab/rational.hpp"

namespace tubelab {

// Raised when a documented compute/memory cap is exceeded (CLI exit code 3).
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dyadic resolution delta = 2^-e with uniformity block size T, T | e.
// Block levels are 2^(-jT) for j = 0..m, m = e/T.
struct Scale {
    int e = 2;
    int T = 1;

    Scale() = default;
    Scale(int e_, int T_) : e(e_), T(T_) { validate(); }

    void validate() const;
    int levels() const { return e / T; }
    long long side() const { return 1ll << e; }  // grid cells per axis

    friend bool operator==(const Scale& a, const Scale& b) {
        return a.e == b.e && a.T == b.T;
    }
    friend bool operator!=(const Scale& a, const Scale& b) { return !(a == b); }
};

// The epsilon a block size T corresponds to, via T^-1 log2(2T) = eps.
double eps_for_block(int T);
int block_for_eps(double eps);

enum class Kind { intervals, squares, tubes };

const char* kind_name(Kind k);

// One grid element. intervals: (idx, 0). squares: (col, row).
// tubes: (slope_idx, intercept_idx) with slope a = x*delta on the chart
// a in [0,1] (x in [0, 2^e]) and intercept b = y*delta in [-1, 1).
struct Elem {
    long long x = 0;
    long long y = 0;

    friend bool operator==(const Elem& a, const Elem& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator<(const Elem& a, const Elem& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
};

// Tube thickness factor c: the strip is |y - (ax+b)| <= c*delta.
struct Thickness {
    long long num = 1;
    long long den = 1;

    friend bool operator==(const Thickness& a, const Thickness& b) {
        return (__int128)a.num * b.den == (__int128)b.num * a.den;
    }
};

// Deduplicated sorted element set sharing one scale.
struct Family {
    Scale scale;
    Kind kind = Kind::intervals;
    Thickness c;
    std::vector<Elem> elems;

    static Family make(Scale s, Kind k, std::vector<Elem> e, Thickness c = {});

    size_t size() const { return elems.size(); }
    bool empty() const { return elems.empty(); }
    void validate() const;
};

// Exact incidence: does the strip of T over the square's x-extent, taken as a
// half-open y-interval, overlap the square's half-open y-interval?  All
// quantities are integer multiples of delta^2 (times the thickness
// denominator), so the test is exact.
bool incident(const Scale& sc, const Thickness& c, const Elem& square, const Elem& tube);

// Whether the tube strip meets the unit square at all.
bool tube_meets_unit_square(const Scale& sc, const Thickness& c, const Elem& tube);

// Ancestor cell of an element at a coarser dyadic scale 2^-rho_exp.
inline Elem ancestor(const Elem& el, int shift) {
    // arithmetic shift floors negative intercepts, matching dyadic cells of
    // the [-1,1) intercept chart
    return Elem{el.x >> shift, el.y >> shift};
}

// Smallest number of 2^-rho_exp dyadic cells meeting the family (for tubes:
// distinct coarse tubes under the dual chart). Equals |F| at rho_exp = e.
uint64_t covering_number(const Family& f, int rho_exp);

// Distinct ancestors at a block level as a family at the coarser scale.
// rho_exp must be a multiple of T (so the coarser scale keeps the block).
Family coarsen(const Family& f, int rho_exp);

// Index-identity duality between squares and tubes (elements keep their
// indices, the kind flips). Mapping tubes -> squares requires indices inside
// the square range.
Family dual(const Family& f);

// Dyadic ancestry at block levels j in [0, m].
Elem parent_at_level(const Family& f, const Elem& el, int j);
std::vector<Elem> children_of(const Family& f, const Elem& parent, int j);

// Family file format:
//   #kind=<squares|tubes|intervals> e=<e> T=<T> c=<num>/<den>
//   one element per line, comma-separated indices
// Round-trips bit-exactly.
void save_family(const Family& f, std::ostream& out);
Family load_family(std::istream& in);
void save_family_file(const Family& f, const std::string& path);
Family load_family_file(const std::string& path);

}  // namespace tubelab
