#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tubelab/grid.hpp"
#include "tubelab/rational.hpp"
#include "tubelab/set_checks.hpp"

namespace tubelab {

enum class CurveKind { parabola, circle_arc, poly };
enum class SampleKind { cantor, random_frostman };

// delta-separated points on a curved graph, in delta units; y is snapped to
// the grid so every point sits within delta of the curve.
struct CurvePoint {
    long long xi = 0, yi = 0;
};

struct CurveSet {
    Scale scale;
    CurveKind curve = CurveKind::parabola;
    std::vector<Rat> coeffs;  // poly only
    std::vector<CurvePoint> pts;
    SetReport frostman;       // ball-count check at the declared dimension
    double min_curvature = 0.0;
};

// Evaluate the curve at x in [0,1].
double curve_eval(CurveKind kind, const std::vector<Rat>& coeffs, double x);

CurveSet sample_curve_set(CurveKind kind, const std::vector<Rat>& coeffs, const Scale& sc,
                          const Rat& s, uint64_t seed, SampleKind sample);

// Ordered-tuple additive energy: six-tuples whose two triple sums are cdelta
// close. Grid binning brackets the sup-norm condition: lower counts same-cell
// pairs, upper counts pairs over 3x3 neighborhoods.
struct EnergyResult {
    uint64_t lower = 0;
    uint64_t upper = 0;
    uint64_t triples = 0;
};

EnergyResult energy3(const CurveSet& S, const Rat& c);

// Nonnegative cell masses at resolution 2^-R_exp.
struct GridMeasure {
    int R_exp = 4;
    std::vector<std::pair<Elem, Rat>> cells;  // sorted by cell

    Rat total() const;
    long long side() const { return 1ll << R_exp; }
};

// Equal-mass measure on a Cantor subset of the curve, with its Frostman
// report (never assumed, always measured).
struct CurveMeasure {
    GridMeasure mu;
    SetReport frostman;
};

CurveMeasure cantor_measure_on_curve(CurveKind kind, const std::vector<Rat>& coeffs,
                                     int R_exp, const Rat& s, uint64_t seed);

// p-th absolute moment of the DFT over the full integer frequency window
// [-R/2, R/2)^2, plus the exact-in-theory Parseval identity as a measured
// relative gap. Normalization: muhat(0) = total mass.
struct MomentResult {
    double moment = 0.0;
    double sup = 0.0;            // max |muhat|
    double parseval_rel_gap = 0.0;
};

MomentResult mu_hat_moments(const GridMeasure& mu, int p, int threads = 1);

// Least squares fit of log2 Y against log2 X.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

FitResult exponent_fit(const std::vector<std::pair<double, double>>& xy);

}  // namespace tubelab
