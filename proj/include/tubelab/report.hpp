#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tubelab {

// CSV with one provenance comment line, a header row, then data rows.
// Rows are written in the order given; sweep drivers sort by key first.
struct CsvWriter {
    std::string provenance;  // "# tool=... version=... seed=... config=..."
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string str() const;
    void save(const std::string& path) const;
};

std::string format_double(double v);

// Minimal self-contained SVG scatter/line chart on log2 axes with an
// optional fitted line annotation.
struct SvgChart {
    std::string title, x_label, y_label;
    std::vector<std::pair<double, double>> points;  // log2 coordinates
    bool has_fit = false;
    double fit_slope = 0.0, fit_intercept = 0.0;

    std::string str() const;
    void save(const std::string& path) const;
};

// key = value configuration text; '#' starts a comment.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);

uint64_t fnv1a(const std::string& bytes);

extern const char* const kToolVersion;

}  // namespace tubelab
