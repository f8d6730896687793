#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace homog {

using Json = nlohmann::ordered_json;

// Least-squares slope of log(y) against log(x) with a 95% confidence half-width.
struct SlopeFit {
    bool defined = false;
    std::string reason;  // why the slope is undefined ("floor", "too few points")
    double slope = 0.0;
    double intercept = 0.0;  // of log10(y) against log10(x)
    double half_width = 0.0;
    std::vector<char> used;
};
// Points with y <= factor * floor are excluded; at least three remaining points are required.
SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y, double floor, double factor);
Json to_json(const SlopeFit& f);

// Plain CSV table. Numbers are written with 17 significant digits so that reruns compare byte for byte.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    void add(std::vector<std::string> row);
    std::string str() const;
};
std::string fmt(double v);
std::string fmt(long v);
inline std::string fmt(int v) { return fmt(long(v)); }

// Log-log plot of several series against eps with the fitted lines overlaid.
struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
    SlopeFit fit;
};
std::string loglog_svg(const std::string& title, const std::vector<PlotSeries>& series);

// Writes atomically (temporary file, then rename). Throws std::runtime_error naming the path.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Report assembled from whatever stage fragments are present; always carries schema_version.
Json empty_report();
// Checks `doc` against the subset of JSON Schema used by the published report schema
// (type, required, properties, items, enum, minimum). Returns the list of violations.
std::vector<std::string> validate_schema(const Json& doc, const Json& schema);

}  // namespace homog
