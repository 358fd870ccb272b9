#include "tubelab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tubelab {

const char* const kToolVersion = "0.1.0";

void CsvWriter::add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
        throw std::invalid_argument("CsvWriter: row width mismatch");
    rows.push_back(std::move(row));
}

std::string CsvWriter::str() const {
    std::ostringstream out;
    if (!provenance.empty()) out << provenance << "\n";
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

void CsvWriter::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << str();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string SvgChart::str() const {
    const int W = 640, H = 480, ML = 64, MR = 24, MT = 40, MB = 48;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto& [x, y] : points) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (points.empty()) { xmin = ymin = 0; xmax = ymax = 1; }
    if (xmax - xmin < 1e-9) { xmax += 1; xmin -= 1; }
    if (ymax - ymin < 1e-9) { ymax += 1; ymin -= 1; }
    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
    s << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << " (log2)</text>\n";
    s << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
      << H / 2 << ")\" text-anchor=\"middle\">" << y_label << " (log2)</text>\n";
    for (auto& [x, y] : points)
        s << "<circle cx=\"" << format_double(px(x)) << "\" cy=\"" << format_double(py(y))
          << "\" r=\"4\" fill=\"steelblue\"/>\n";
    if (points.size() > 1) {
        s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
        for (auto& [x, y] : points)
            s << format_double(px(x)) << "," << format_double(py(y)) << " ";
        s << "\"/>\n";
    }
    if (has_fit) {
        double y0 = fit_intercept + fit_slope * xmin, y1 = fit_intercept + fit_slope * xmax;
        s << "<line x1=\"" << format_double(px(xmin)) << "\" y1=\"" << format_double(py(y0))
          << "\" x2=\"" << format_double(px(xmax)) << "\" y2=\"" << format_double(py(y1))
          << "\" stroke=\"crimson\" stroke-dasharray=\"6 3\"/>\n";
        s << "<text x=\"" << W - MR - 8 << "\" y=\"" << MT + 16
          << "\" text-anchor=\"end\" font-size=\"12\" fill=\"crimson\">slope "
          << format_double(fit_slope) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void SvgChart::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << str();
}

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        kv[key] = val;
    }
    return kv;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read config " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace tubelab
