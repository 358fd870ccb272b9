#include "tubelab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include "tubelab/constructions.hpp"
#include "tubelab/fft.hpp"
#include "tubelab/parallel.hpp"
#include "tubelab/prng.hpp"

namespace tubelab {

double curve_eval(CurveKind kind, const std::vector<Rat>& coeffs, double x) {
    switch (kind) {
        case CurveKind::parabola: return x * x;
        case CurveKind::circle_arc: return std::sqrt(4.0 - x * x) - 1.0;  // radius-2 arc
        case CurveKind::poly: {
            double v = 0.0;
            for (size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i].to_double();
            return v;
        }
    }
    return 0.0;
}

namespace {

double curve_second_derivative(CurveKind kind, const std::vector<Rat>& coeffs, double x) {
    switch (kind) {
        case CurveKind::parabola: return 2.0;
        case CurveKind::circle_arc: {
            double t = 4.0 - x * x;
            return -4.0 / (t * std::sqrt(t));
        }
        case CurveKind::poly: {
            double v = 0.0;
            for (size_t i = coeffs.size(); i-- > 2;)
                v = v * x + coeffs[i].to_double() * (double)i * (double)(i - 1);
            return v;
        }
    }
    return 0.0;
}

// snap gamma(x) to the row grid, clamped into [0, 2^e)
long long snap_row(CurveKind kind, const std::vector<Rat>& coeffs, long long xi,
                   long long n) {
    double x = ((double)xi + 0.5) / (double)n;
    double y = curve_eval(kind, coeffs, x);
    long long yi = (long long)std::llround(y * (double)n - 0.5);
    return std::max(0ll, std::min(n - 1, yi));
}

}  // namespace

CurveSet sample_curve_set(CurveKind kind, const std::vector<Rat>& coeffs, const Scale& sc,
                          const Rat& s, uint64_t seed, SampleKind sample) {
    const long long n = sc.side();
    CurveSet out;
    out.scale = sc;
    out.curve = kind;
    out.coeffs = coeffs;

    // curvature must stay away from zero across the parameter range
    out.min_curvature = 1e300;
    bool sign_flip = false;
    double first = curve_second_derivative(kind, coeffs, 0.5 / (double)n);
    for (long long i = 0; i < n; ++i) {
        double g2 = curve_second_derivative(kind, coeffs, ((double)i + 0.5) / (double)n);
        out.min_curvature = std::min(out.min_curvature, std::fabs(g2));
        if (g2 * first <= 0.0) sign_flip = true;
    }
    if (out.min_curvature <= 0.0 || sign_flip)
        throw std::invalid_argument("sample_curve_set: curvature vanishes on [0,1]");

    Family xs = sample == SampleKind::cantor
                    ? generate_ad_regular(sc, s, seed)
                    : generate_random_frostman(sc, s, seed, Rat(1));
    for (const Elem& el : xs.elems)
        out.pts.push_back(CurvePoint{el.x, snap_row(kind, coeffs, el.x, n)});

    std::vector<Elem> planar(out.pts.size());
    for (size_t i = 0; i < out.pts.size(); ++i)
        planar[i] = Elem{out.pts[i].xi, out.pts[i].yi};
    Family pf = Family::make(sc, Kind::squares, std::move(planar));
    out.frostman = check_katz_tao(pf, s, Rat(4));
    return out;
}

EnergyResult energy3(const CurveSet& S, const Rat& c) {
    const uint64_t N = S.pts.size();
    if (N == 0) throw std::invalid_argument("energy3: empty set");
    if (N * N * N > 100000000ull)
        throw budget_error("energy3: |S|^3 beyond the triple budget; lower e");
    if (c.num <= 0) throw std::invalid_argument("energy3: c must be positive");

    EnergyResult res;
    res.triples = N * N * N;
    // triple sums, then cell counts at side c (in delta units)
    std::map<std::pair<long long, long long>, uint64_t> cells;
    for (uint64_t a = 0; a < N; ++a)
        for (uint64_t b = 0; b < N; ++b)
            for (uint64_t d = 0; d < N; ++d) {
                long long sx = S.pts[a].xi + S.pts[b].xi + S.pts[d].xi;
                long long sy = S.pts[a].yi + S.pts[b].yi + S.pts[d].yi;
                // cell = floor(coord / c) exactly
                long long cx = (long long)(((__int128)sx * c.den) / c.num);
                long long cy = (long long)(((__int128)sy * c.den) / c.num);
                cells[{cx, cy}] += 1;
            }
    for (auto& [cell, m] : cells) {
        res.lower += m * m;
        uint64_t nb = 0;
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = cells.find({cell.first + dx, cell.second + dy});
                if (it != cells.end()) nb += it->second;
            }
        res.upper += m * nb;
    }
    return res;
}

Rat GridMeasure::total() const {
    Rat t(0);
    for (const auto& [cell, mass] : cells) t = t + mass;
    return t;
}

CurveMeasure cantor_measure_on_curve(CurveKind kind, const std::vector<Rat>& coeffs,
                                     int R_exp, const Rat& s, uint64_t seed) {
    // the balanced per-bit construction works at every resolution, including
    // the ones no block size fits
    Scale sc(R_exp, 1);
    const long long n = sc.side();
    Family xs = balanced_cantor(R_exp, s, seed);
    CurveMeasure out;
    out.mu.R_exp = R_exp;
    const Rat mass(1, (long long)xs.size());
    std::vector<Elem> cells;
    for (const Elem& el : xs.elems) {
        Elem cell{el.x, snap_row(kind, coeffs, el.x, n)};
        out.mu.cells.push_back({cell, mass});
        cells.push_back(cell);
    }
    std::sort(out.mu.cells.begin(), out.mu.cells.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // equal masses: the Frostman condition is the delta-set bound on cells
    Family cf = Family::make(sc, Kind::squares, std::move(cells));
    out.frostman = check_delta_set(cf, s, Rat(4));
    return out;
}

MomentResult mu_hat_moments(const GridMeasure& mu, int p, int threads) {
    if (p < 2 || p % 2 != 0)
        throw std::invalid_argument("mu_hat_moments: p must be an even integer >= 2");
    if (mu.R_exp > 12) throw budget_error("mu_hat_moments: resolution above 2^12");
    const size_t n = (size_t)mu.side();
    std::vector<std::complex<double>> grid(n * n, 0.0);
    double mass2 = 0.0;
    for (const auto& [cell, mass] : mu.cells) {
        if (cell.x < 0 || cell.x >= (long long)n || cell.y < 0 || cell.y >= (long long)n)
            throw std::invalid_argument("mu_hat_moments: cell outside the grid");
        grid[(size_t)cell.x * n + (size_t)cell.y] += mass.to_double();
    }
    for (const auto& z : grid) mass2 += z.real() * z.real();
    fft_2d(grid, n, false, threads);

    MomentResult res;
    double parseval = 0.0, comp = 0.0, moment = 0.0, mcomp = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const double a2 = std::norm(grid[i]);
        {
            double term = a2 - comp;
            double next = parseval + term;
            comp = (next - parseval) - term;
            parseval = next;
        }
        double ap = a2;
        for (int q = 2; q < p; q += 2) ap *= a2;
        {
            double term = ap - mcomp;
            double next = moment + term;
            mcomp = (next - moment) - term;
            moment = next;
        }
        res.sup = std::max(res.sup, std::sqrt(a2));
    }
    res.moment = moment;
    const double rhs = (double)n * (double)n * mass2;
    res.parseval_rel_gap = std::fabs(parseval - rhs) / std::max(rhs, 1e-300);
    return res;
}

FitResult exponent_fit(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) throw std::invalid_argument("exponent_fit: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : xy) {
        double lx = std::log2(x), ly = std::log2(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = (double)xy.size();
    FitResult fit;
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    for (auto& [x, y] : xy) {
        double r = std::fabs(std::log2(y) - (fit.intercept + fit.slope * std::log2(x)));
        fit.max_residual = std::max(fit.max_residual, r);
    }
    return fit;
}

}  // namespace tubelab
