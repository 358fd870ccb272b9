#include "tubelab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tubelab {

void Scale::validate() const {
    if (e < 2) throw std::invalid_argument("Scale: e must be >= 2");
    if (T < 1) throw std::invalid_argument("Scale: T must be >= 1");
    if (e % T != 0) throw std::invalid_argument("Scale: T must divide e");
    if (e > 24) throw std::invalid_argument("Scale: e > 24 exceeds the grid budget");
}

double eps_for_block(int T) {
    return std::log2(2.0 * T) / T;
}

int block_for_eps(double eps) {
    for (int T = 1; T <= 64; ++T)
        if (eps_for_block(T) <= eps) return T;
    return 64;
}

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::intervals: return "intervals";
        case Kind::squares: return "squares";
        case Kind::tubes: return "tubes";
    }
    return "?";
}

Family Family::make(Scale s, Kind k, std::vector<Elem> e, Thickness c) {
    Family f;
    f.scale = s;
    f.kind = k;
    f.c = c;
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    f.elems = std::move(e);
    f.validate();
    return f;
}

void Family::validate() const {
    scale.validate();
    if (c.num <= 0 || c.den <= 0)
        throw std::invalid_argument("Family: thickness must be positive");
    const long long n = scale.side();
    for (size_t i = 0; i < elems.size(); ++i) {
        const Elem& el = elems[i];
        if (i > 0 && !(elems[i - 1] < el))
            throw std::invalid_argument("Family: elements not sorted/unique");
        switch (kind) {
            case Kind::intervals:
                if (el.x < 0 || el.x >= n || el.y != 0)
                    throw std::invalid_argument("Family: interval index out of range");
                break;
            case Kind::squares:
                if (el.x < 0 || el.x >= n || el.y < 0 || el.y >= n)
                    throw std::invalid_argument("Family: square index out of range");
                break;
            case Kind::tubes:
                if (el.x < 0 || el.x > n || el.y < -n || el.y >= n)
                    throw std::invalid_argument("Family: tube index out of range");
                if (!tube_meets_unit_square(scale, c, el))
                    throw std::invalid_argument("Family: tube misses the unit square");
                break;
        }
    }
}

bool incident(const Scale& sc, const Thickness& c, const Elem& square, const Elem& tube) {
    // units of delta^2 * c.den
    const long long n = sc.side();
    const __int128 cd = c.den, cn = c.num;
    __int128 lo = cd * ((__int128)tube.x * square.x + (__int128)tube.y * n) - cn * n;
    __int128 hi = cd * ((__int128)tube.x * (square.x + 1) + (__int128)tube.y * n) + cn * n;
    __int128 s0 = cd * ((__int128)square.y * n);
    __int128 s1 = cd * ((__int128)(square.y + 1) * n);
    return lo < s1 && s0 < hi;
}

bool tube_meets_unit_square(const Scale& sc, const Thickness& c, const Elem& tube) {
    const long long n = sc.side();
    const __int128 cd = c.den, cn = c.num;
    // strip over x in [0,1] spans [b - c*delta, a + b + c*delta]
    __int128 lo = cd * ((__int128)tube.y * n) - cn * n;
    __int128 hi = cd * ((__int128)tube.x * n + (__int128)tube.y * n) + cn * n;
    __int128 one = cd * (__int128)n * n;
    return hi > 0 && lo < one;
}

uint64_t covering_number(const Family& f, int rho_exp) {
    if (rho_exp < 0 || rho_exp > f.scale.e)
        throw std::invalid_argument("covering_number: rho_exp out of range");
    if (f.empty()) return 0;
    const int shift = f.scale.e - rho_exp;
    if (shift == 0) return f.size();
    std::vector<Elem> parents(f.elems.size());
    for (size_t i = 0; i < f.elems.size(); ++i) parents[i] = ancestor(f.elems[i], shift);
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    return parents.size();
}

Family coarsen(const Family& f, int rho_exp) {
    if (rho_exp < 2 || rho_exp > f.scale.e || rho_exp % f.scale.T != 0)
        throw std::invalid_argument("coarsen: rho_exp must be a block level >= 2");
    const int shift = f.scale.e - rho_exp;
    std::vector<Elem> parents(f.elems.size());
    for (size_t i = 0; i < f.elems.size(); ++i) parents[i] = ancestor(f.elems[i], shift);
    return Family::make(Scale(rho_exp, f.scale.T), f.kind, std::move(parents), f.c);
}

Family dual(const Family& f) {
    Family g = f;
    if (f.kind == Kind::squares) {
        g.kind = Kind::tubes;
    } else if (f.kind == Kind::tubes) {
        g.kind = Kind::squares;
    } else {
        throw std::invalid_argument("dual: defined for squares and tubes");
    }
    g.validate();
    return g;
}

Elem parent_at_level(const Family& f, const Elem& el, int j) {
    if (j < 0 || j > f.scale.levels())
        throw std::invalid_argument("parent_at_level: level out of range");
    return ancestor(el, f.scale.e - j * f.scale.T);
}

std::vector<Elem> children_of(const Family& f, const Elem& parent, int j) {
    if (j < 0 || j > f.scale.levels())
        throw std::invalid_argument("children_of: level out of range");
    const int shift = f.scale.e - j * f.scale.T;
    std::vector<Elem> out;
    for (const Elem& el : f.elems)
        if (ancestor(el, shift) == parent) out.push_back(el);
    return out;
}

void save_family(const Family& f, std::ostream& out) {
    out << "#kind=" << kind_name(f.kind) << " e=" << f.scale.e << " T=" << f.scale.T
        << " c=" << f.c.num << "/" << f.c.den << "\n";
    for (const Elem& el : f.elems) {
        if (f.kind == Kind::intervals)
            out << el.x << "\n";
        else
            out << el.x << "," << el.y << "\n";
    }
}

Family load_family(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("#kind=", 0) != 0)
        throw std::invalid_argument("family file: missing #kind header");
    std::istringstream hs(header.substr(1));
    std::string tok;
    Kind kind = Kind::intervals;
    int e = -1, T = -1;
    Thickness c;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("family file: bad header token");
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "kind") {
            if (val == "intervals") kind = Kind::intervals;
            else if (val == "squares") kind = Kind::squares;
            else if (val == "tubes") kind = Kind::tubes;
            else throw std::invalid_argument("family file: unknown kind " + val);
        } else if (key == "e") {
            e = std::stoi(val);
        } else if (key == "T") {
            T = std::stoi(val);
        } else if (key == "c") {
            auto slash = val.find('/');
            if (slash == std::string::npos) throw std::invalid_argument("family file: bad c");
            c.num = std::stoll(val.substr(0, slash));
            c.den = std::stoll(val.substr(slash + 1));
        } else {
            throw std::invalid_argument("family file: unknown header key " + key);
        }
    }
    if (e < 0 || T < 0) throw std::invalid_argument("family file: header missing e or T");
    std::vector<Elem> elems;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Elem el;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            el.x = std::stoll(line);
        } else {
            el.x = std::stoll(line.substr(0, comma));
            el.y = std::stoll(line.substr(comma + 1));
        }
        elems.push_back(el);
    }
    return Family::make(Scale(e, T), kind, std::move(elems), c);
}

void save_family_file(const Family& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    save_family(f, out);
}

Family load_family_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return load_family(in);
}

}  // namespace tubelab
