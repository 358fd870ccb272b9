#include "tubelab/highlow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "tubelab/fft.hpp"
#include "tubelab/incidence.hpp"
#include "tubelab/parallel.hpp"

namespace tubelab {

namespace {

// flat-top raised cosine: 1 on [0,1], cosine taper on (1,2], 0 beyond
double cross_profile(double u) {
    u = std::fabs(u);
    if (u <= 1.0) return 1.0;
    if (u >= 2.0) return 0.0;
    double t = std::cos(0.5 * M_PI * (u - 1.0));
    return t * t;
}

}  // namespace

SplitResult fourier_split(const Family& tubes, const Rat& beta, int threads) {
    if (tubes.kind != Kind::tubes)
        throw std::invalid_argument("fourier_split: expects tubes");
    if (!(Rat(0) < beta && beta < Rat(1)))
        throw std::invalid_argument("fourier_split: beta must lie in (0,1)");
    const int e = tubes.scale.e;
    if (e > 12) throw budget_error("fourier_split: grid above e=12 exceeds the memory cap");
    const size_t n = (size_t)tubes.scale.side();
    const double cw = (double)tubes.c.num / (double)tubes.c.den;

    SplitResult out;
    out.e = e;
    out.f.assign(n * n, 0.0);
    // sample phi_T at cell centers, one contiguous row window per column
    parallel_for((int64_t)n, threads, [&](int64_t col) {
        const double x = ((double)col + 0.5);
        for (const Elem& t : tubes.elems) {
            const double yc = ((double)t.x * x) / (double)n + (double)t.y;  // in delta units
            const long long jlo = (long long)std::floor(yc - 2.0 * cw - 0.5);
            const long long jhi = (long long)std::ceil(yc + 2.0 * cw + 0.5);
            for (long long j = std::max(0ll, jlo); j <= std::min((long long)n - 1, jhi); ++j) {
                double u = ((double)j + 0.5 - yc) / cw;
                out.f[(size_t)col * n + (size_t)j] += cross_profile(u);
            }
        }
    });

    // transform, cut, invert
    std::vector<std::complex<double>> freq(n * n);
    for (size_t i = 0; i < n * n; ++i) freq[i] = out.f[i];
    fft_2d(freq, n, false, threads);

    double space_energy = 0.0, freq_energy = 0.0;
    for (size_t i = 0; i < n * n; ++i) space_energy += out.f[i] * out.f[i];
    for (size_t i = 0; i < n * n; ++i) freq_energy += std::norm(freq[i]);
    out.parseval_rel_gap = std::fabs(space_energy - freq_energy / ((double)n * (double)n)) /
                           std::max(1e-300, space_energy);

    const double cutoff = std::exp2((double)e * (1.0 - beta.to_double() / 2.0));
    for (size_t i = 0; i < n; ++i) {
        const double k1 = i <= n / 2 ? (double)i : (double)i - (double)n;
        for (size_t j = 0; j < n; ++j) {
            const double k2 = j <= n / 2 ? (double)j : (double)j - (double)n;
            const double rad = std::sqrt(k1 * k1 + k2 * k2);
            double w;
            if (rad <= cutoff)
                w = 1.0;
            else if (rad >= 2.0 * cutoff)
                w = 0.0;
            else {
                double tt = std::cos(0.5 * M_PI * (rad / cutoff - 1.0));
                w = tt * tt;
            }
            freq[i * n + j] *= w;
        }
    }
    fft_2d(freq, n, true, threads);
    out.f_low.resize(n * n);
    out.f_high.resize(n * n);
    out.low_sup = 0.0;
    for (size_t i = 0; i < n * n; ++i) {
        out.f_low[i] = freq[i].real();
        out.f_high[i] = out.f[i] - out.f_low[i];
        out.low_sup = std::max(out.low_sup, std::fabs(out.f_low[i]));
    }
    double hi2 = 0.0, comp = 0.0;  // compensated sum, fixed order
    for (size_t i = 0; i < n * n; ++i) {
        double term = out.f_high[i] * out.f_high[i] - comp;
        double next = hi2 + term;
        comp = (next - hi2) - term;
        hi2 = next;
    }
    const double delta2 = std::exp2(-2.0 * (double)e);
    out.high_energy_l2 = hi2 * delta2;
    if (!tubes.empty())
        out.energy_ratio = out.high_energy_l2 /
                           (std::exp2(-(double)e * (1.0 - beta.to_double())) *
                            (double)tubes.size());
    return out;
}

HeavyBallResult heavy_ball_scale(const Family& tubes, uint64_t r0, const Rat& beta,
                                 const Rat& upsilon, const Rat& c, int threads) {
    if (tubes.kind != Kind::tubes)
        throw std::invalid_argument("heavy_ball_scale: expects tubes");
    if (r0 < 1) throw std::invalid_argument("heavy_ball_scale: r0 must be >= 1");
    const int e = tubes.scale.e;
    const long long n = tubes.scale.side();

    RichnessMap map = richness_map(tubes, threads);
    std::vector<Elem> rich;
    for (long long x = 0; x < n; ++x)
        for (long long y = 0; y < n; ++y)
            if (map.at(x, y) >= r0) rich.push_back(Elem{x, y});

    HeavyBallResult res;
    res.rich_count = rich.size();
    // hypothesis |P_r0| >= delta^(-2-beta) / r0, i.e. r0 |P| >= 2^(e(2+beta))
    res.hypothesis_holds =
        !rich.empty() &&
        dyadic_pow_le(Rat(1), Rat((long long)(r0 * rich.size())),
                      -(long long)e * (2 * beta.den + beta.num), beta.den);
    if (rich.empty()) return res;

    // candidates delta^(1-beta/2) <= scale <= 1, i.e. g from floor(e(1-beta/2))
    const int gmax = (int)(((long long)e * (2 * beta.den - beta.num)) / (2 * beta.den));
    const __int128 cd = tubes.c.den, cn = tubes.c.num;
    for (int g = gmax; g >= 0; --g) {
        // ball radius scale * delta^-upsilon, threshold ceil(c r0 scale/delta)
        long long radius;
        {
            long long p = ((long long)(e - g)) * upsilon.den + (long long)e * upsilon.num;
            radius = (long long)floor_pow2_frac(p, upsilon.den);
        }
        const uint64_t thresh =
            (uint64_t)((c.num * (__int128)r0 * (1ll << (e - g)) + c.den - 1) / c.den);
        std::vector<uint32_t> heavy_flags(rich.size(), 0);
        parallel_for((int64_t)rich.size(), threads, [&](int64_t i) {
            const Elem& q = rich[(size_t)i];
            const long long xl = std::max(0ll, q.x - radius);
            const long long xh = std::min(n - 1, q.x + radius);
            const __int128 ball_lo = cd * (__int128)(q.y - radius) * n;
            const __int128 ball_hi = cd * (__int128)(q.y + radius + 1) * n;
            uint64_t cnt = 0;
            for (const Elem& t : tubes.elems) {
                __int128 lo = cd * ((__int128)t.x * xl + (__int128)t.y * n) - cn * n;
                __int128 hi = cd * ((__int128)t.x * (xh + 1) + (__int128)t.y * n) + cn * n;
                if (lo <= ball_hi && ball_lo <= hi) ++cnt;
            }
            heavy_flags[(size_t)i] = cnt >= thresh;
        });
        uint64_t heavy = 0;
        for (uint32_t f : heavy_flags) heavy += f;
        double fraction = (double)heavy / (double)rich.size();
        res.rows.push_back(HeavyBallRow{g, fraction});
        if (!res.found && 2 * heavy >= rich.size()) {
            res.found = true;
            res.scale_exp = g;
        }
    }
    return res;
}

}  // namespace tubelab
