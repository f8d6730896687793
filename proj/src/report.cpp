#include "homog/report.hpp"

#include "homog/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace homog {

namespace {

// two-sided 97.5% Student t quantiles for 1..10 degrees of freedom
double t975(int dof) {
    static const double q[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
    return dof <= 0 ? 0.0 : dof <= 10 ? q[dof - 1] : 1.96;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

}  // namespace

SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y, double floor, double factor) {
    SlopeFit f;
    f.used.assign(x.size(), 0);
    std::vector<double> lx, ly;
    bool floored = false;
    for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !std::isfinite(y[i])) continue;
        if (!(y[i] > factor * floor) || !(y[i] > 0.0)) {
            floored = true;
            continue;
        }
        f.used[i] = 1;
        lx.push_back(std::log10(x[i]));
        ly.push_back(std::log10(y[i]));
    }
    const size_t n = lx.size();
    if (n < 3) {
        f.reason = floored ? "floor" : "too few points";
        return f;
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) {
        f.reason = "too few points";
        return f;
    }
    f.defined = true;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (size_t i = 0; i < n; ++i) sse += std::pow(ly[i] - f.intercept - f.slope * lx[i], 2);
    f.half_width = t975(int(n) - 2) * std::sqrt(sse / double(n - 2) / sxx);
    return f;
}

Json to_json(const SlopeFit& f) {
    Json j;
    j["defined"] = f.defined;
    if (f.defined) {
        j["slope"] = f.slope;
        j["ci95"] = {f.slope - f.half_width, f.slope + f.half_width};
    } else {
        j["slope"] = nullptr;
        j["reason"] = f.reason;
    }
    int n = 0;
    for (char u : f.used) n += u;
    j["points_used"] = n;
    return j;
}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::logic_error("csv row width does not match the header");
    rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string s;
    auto line = [&s](const std::vector<std::string>& r) {
        for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += "\n";
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return s;
}

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string fmt(long v) { return std::to_string(v); }

std::string loglog_svg(const std::string& title, const std::vector<PlotSeries>& series) {
    const double W = 640, H = 440, ml = 70, mr = 170, mt = 40, mb = 55;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0) {
                x0 = std::min(x0, std::log10(s.x[i]));
                x1 = std::max(x1, std::log10(s.x[i]));
                y0 = std::min(y0, std::log10(s.y[i]));
                y1 = std::max(y1, std::log10(s.y[i]));
            }
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << (ml + (W - ml - mr) / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << esc(title) << "</text>\n";
    if (x0 > x1) {
        o << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\">"
          << "no positive data</text>\n</svg>\n";
        return o.str();
    }
    x0 = std::floor(x0 * 10) / 10 - 0.05;
    x1 = std::ceil(x1 * 10) / 10 + 0.05;
    y0 = std::floor(y0 * 2) / 2;
    y1 = std::ceil(y1 * 2) / 2;
    if (y1 - y0 < 0.5) y1 = y0 + 0.5;
    auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };
    char b[256];
    o << "<g stroke=\"black\" fill=\"none\">\n";
    std::snprintf(b, sizeof b, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n", ml, mt, W - ml - mr,
                  H - mt - mb);
    o << b << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double t = std::ceil(x0 * 10) / 10; t <= x1 + 1e-9; t += 0.1) {
        std::snprintf(b, sizeof b,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>"
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.1f</text>\n",
                      px(t), mt, px(t), H - mb, px(t), H - mb + 16, t);
        o << b;
    }
    for (double t = y0; t <= y1 + 1e-9; t += 0.5) {
        std::snprintf(b, sizeof b,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ccc\"/>"
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.1f</text>\n",
                      ml, py(t), W - mr, py(t), ml - 6, py(t) + 4, t);
        o << b;
    }
    std::snprintf(b, sizeof b, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">log10 eps</text>\n",
                  ml + (W - ml - mr) / 2, H - 14);
    o << b;
    std::snprintf(b, sizeof b,
                  "<text x=\"16\" y=\"%.2f\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.2f)\">log10 error</text>\n",
                  mt + (H - mt - mb) / 2, mt + (H - mt - mb) / 2);
    o << b << "</g>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (size_t s = 0; s < series.size(); ++s) {
        const char* c = colors[s % 5];
        const auto& S = series[s];
        for (size_t i = 0; i < S.x.size(); ++i) {
            if (!(S.x[i] > 0 && S.y[i] > 0)) continue;
            const bool used = i < S.fit.used.size() && S.fit.used[i];
            std::snprintf(b, sizeof b, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" stroke=\"%s\" fill=\"%s\"/>\n",
                          px(std::log10(S.x[i])), py(std::log10(S.y[i])), c, used ? c : "white");
            o << b;
        }
        if (S.fit.defined) {
            const double a = x0 + 0.05, z = x1 - 0.05;
            std::snprintf(b, sizeof b,
                          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-dasharray=\"5 3\"/>\n",
                          px(a), py(S.fit.intercept + S.fit.slope * a), px(z), py(S.fit.intercept + S.fit.slope * z), c);
            o << b;
        }
        std::string label = S.name + (S.fit.defined ? " (slope " : " (");
        if (S.fit.defined) {
            std::snprintf(b, sizeof b, "%.2f)", S.fit.slope);
            label += b;
        } else {
            label += S.fit.reason + ")";
        }
        std::snprintf(b, sizeof b,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"10\" height=\"10\" fill=\"%s\"/>"
                      "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">",
                      W - mr + 12, mt + 8 + 18.0 * s, c, W - mr + 27, mt + 17 + 18.0 * s);
        o << b << esc(label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_text(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << text;
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
    }
    fs::rename(tmp, p, ec);
    if (ec) throw std::runtime_error("cannot write '" + path + "': " + ec.message());
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json empty_report() {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["stages"] = Json::object();
    return j;
}

namespace {

bool type_ok(const Json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

void check(const Json& v, const Json& s, const std::string& at, std::vector<std::string>& out) {
    if (s.contains("type")) {
        const Json& t = s["type"];
        bool ok = false;
        if (t.is_string()) ok = type_ok(v, t.get<std::string>());
        else
            for (const auto& x : t) ok = ok || type_ok(v, x.get<std::string>());
        if (!ok) {
            out.push_back(at + ": expected type " + t.dump());
            return;
        }
    }
    if (s.contains("enum")) {
        bool ok = false;
        for (const auto& e : s["enum"]) ok = ok || e == v;
        if (!ok) out.push_back(at + ": value not in enum");
    }
    if (s.contains("minimum") && v.is_number() && v.get<double>() < s["minimum"].get<double>())
        out.push_back(at + ": below minimum");
    if (v.is_object()) {
        if (s.contains("required"))
            for (const auto& k : s["required"])
                if (!v.contains(k.get<std::string>())) out.push_back(at + ": missing '" + k.get<std::string>() + "'");
        if (s.contains("properties"))
            for (const auto& [k, sub] : s["properties"].items())
                if (v.contains(k)) check(v[k], sub, at + "." + k, out);
        if (s.contains("additionalProperties") && s["additionalProperties"].is_object())
            for (const auto& [k, sub] : v.items())
                if (!s.contains("properties") || !s["properties"].contains(k))
                    check(sub, s["additionalProperties"], at + "." + k, out);
    }
    if (v.is_array() && s.contains("items"))
        for (size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], at + "[" + std::to_string(i) + "]", out);
}

}  // namespace

std::vector<std::string> validate_schema(const Json& doc, const Json& schema) {
    std::vector<std::string> out;
    check(doc, schema, "$", out);
    return out;
}

}  // namespace homog
