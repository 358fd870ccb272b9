#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubelab {

// Exact rational on 64-bit numerator/denominator, normalized, gcd-reduced.
// Intermediate products run through __int128; construction throws on overflow
// rather than silently wrapping.
struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) { assign(n, d); }

    static Rat from_i128(__int128 n, __int128 d) {
        if (d == 0) throw std::invalid_argument("Rat: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        Rat r;
        r.num = narrow(n);
        r.den = narrow(d);
        return r;
    }

    void assign(long long n, long long d) {
        Rat r = from_i128(n, d);
        num = r.num;
        den = r.den;
    }

    bool is_zero() const { return num == 0; }
    bool is_negative() const { return num < 0; }

    Rat operator-() const { return from_i128(-(__int128)num, den); }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return from_i128((__int128)a.num * b.den + (__int128)b.num * a.den,
                         (__int128)a.den * b.den);
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return from_i128((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num == 0) throw std::invalid_argument("Rat: division by zero");
        return from_i128((__int128)a.num * b.den, (__int128)a.den * b.num);
    }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    double to_double() const { return double(num) / double(den); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

  private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a < 0 ? -a : a;
    }
    static long long narrow(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw std::overflow_error("Rat: 64-bit overflow after reduction");
        return (long long)v;
    }
};

inline Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        // also accept decimals like 0.25
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rat(std::stoll(s));
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        if (frac.size() > 15) frac = frac.substr(0, 15);
        long long d = 1;
        for (size_t i = 0; i < frac.size(); ++i) d *= 10;
        long long w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
        long long f = frac.empty() ? 0 : std::stoll(frac);
        bool neg = !whole.empty() && whole[0] == '-';
        __int128 n = (__int128)(neg ? -w : w) * d + f;
        return Rat::from_i128(neg ? -n : n, d);
    }
    return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

// Unsigned big integer, little-endian 64-bit limbs. Only what the exact
// power-inequality checks need: multiply, shift, power, compare.
struct BigUint {
    std::vector<uint64_t> limb;  // empty == 0

    BigUint() = default;
    explicit BigUint(uint64_t v) { if (v) limb.push_back(v); }

    bool is_zero() const { return limb.empty(); }

    static BigUint mul(const BigUint& a, const BigUint& b) {
        if (a.is_zero() || b.is_zero()) return BigUint();
        BigUint r;
        r.limb.assign(a.limb.size() + b.limb.size(), 0);
        for (size_t i = 0; i < a.limb.size(); ++i) {
            unsigned __int128 carry = 0;
            for (size_t j = 0; j < b.limb.size(); ++j) {
                unsigned __int128 cur = (unsigned __int128)a.limb[i] * b.limb[j] +
                                        r.limb[i + j] + carry;
                r.limb[i + j] = (uint64_t)cur;
                carry = cur >> 64;
            }
            size_t k = i + b.limb.size();
            while (carry) {
                unsigned __int128 cur = (unsigned __int128)r.limb[k] + carry;
                r.limb[k] = (uint64_t)cur;
                carry = cur >> 64;
                ++k;
            }
        }
        r.trim();
        return r;
    }

    BigUint shifted_left(uint64_t bits) const {
        if (is_zero()) return BigUint();
        uint64_t words = bits / 64, rem = bits % 64;
        BigUint r;
        r.limb.assign(limb.size() + words + 1, 0);
        for (size_t i = 0; i < limb.size(); ++i) {
            r.limb[i + words] |= rem ? (limb[i] << rem) : limb[i];
            if (rem) r.limb[i + words + 1] |= limb[i] >> (64 - rem);
        }
        r.trim();
        return r;
    }

    static BigUint pow(uint64_t base, uint64_t exp) {
        BigUint r(1), b(base);
        while (exp) {
            if (exp & 1) r = mul(r, b);
            b = mul(b, b);
            exp >>= 1;
        }
        return r;
    }

    // -1, 0, +1
    static int cmp(const BigUint& a, const BigUint& b) {
        if (a.limb.size() != b.limb.size())
            return a.limb.size() < b.limb.size() ? -1 : 1;
        for (size_t i = a.limb.size(); i-- > 0;) {
            if (a.limb[i] != b.limb[i]) return a.limb[i] < b.limb[i] ? -1 : 1;
        }
        return 0;
    }

    double log2_approx() const {
        if (is_zero()) return -1e300;
        size_t top = limb.size() - 1;
        double hi = (double)limb[top];
        double lo = top > 0 ? (double)limb[top - 1] : 0.0;
        return 64.0 * (double)top + std::log2(hi + lo / 18446744073709551616.0);
    }

  private:
    void trim() { while (!limb.empty() && limb.back() == 0) limb.pop_back(); }
};

// Exact test of   a <= c * 2^(p/q)   for positive rationals a, c and integer
// p, q >= 1.  Raises both sides to the q-th power; all arithmetic exact.
inline bool dyadic_pow_le(const Rat& a, const Rat& c, long long p, long long q) {
    if (q <= 0) throw std::invalid_argument("dyadic_pow_le: q must be positive");
    if (a.num <= 0) return true;
    if (c.num <= 0) return false;
    {
        long long g = std::gcd(p < 0 ? -p : p, q);
        if (g > 1) { p /= g; q /= g; }
    }
    if (q > 4096) throw std::invalid_argument("dyadic_pow_le: exponent denominator too large");
    uint64_t uq = (uint64_t)q;
    BigUint lhs = BigUint::mul(BigUint::pow((uint64_t)a.num, uq),
                               BigUint::pow((uint64_t)c.den, uq));
    BigUint rhs = BigUint::mul(BigUint::pow((uint64_t)c.num, uq),
                               BigUint::pow((uint64_t)a.den, uq));
    if (p >= 0)
        rhs = rhs.shifted_left((uint64_t)p);
    else
        lhs = lhs.shifted_left((uint64_t)(-p));
    return BigUint::cmp(lhs, rhs) <= 0;
}

// log2(a / (c * 2^(p/q))): positive when the bound is violated. Report only.
inline double dyadic_pow_log2_gap(const Rat& a, const Rat& c, long long p, long long q) {
    if (a.num <= 0) return -1e300;
    return std::log2(a.to_double()) - std::log2(c.to_double()) - double(p) / double(q);
}

// floor(2^(p/q)) for p >= 0, q >= 1: integer q-th root of 2^p.
inline uint64_t floor_pow2_frac(long long p, long long q) {
    if (p < 0) return 0;
    long long whole = p / q, rem = p % q;
    if (whole >= 62) throw std::overflow_error("floor_pow2_frac: too large");
    uint64_t base = 1ull << whole;
    if (rem == 0) return base;
    // root = floor(2^(rem/q)), refine a double estimate exactly
    double est = std::exp2(double(p) / double(q));
    uint64_t r = (uint64_t)est;
    auto le_pow = [&](uint64_t v) {
        // v^q <= 2^p ?
        return BigUint::cmp(BigUint::pow(v, (uint64_t)q),
                            BigUint(1).shifted_left((uint64_t)p)) <= 0;
    };
    while (r > 1 && !le_pow(r)) --r;
    while (le_pow(r + 1)) ++r;
    return r;
}

}  // namespace tubelab
