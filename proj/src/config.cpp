#include "homog/config.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace homog {

namespace {

std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration (" + std::to_string(p.size()) + " problem" + (p.size() == 1 ? "" : "s") + ")";
    for (const auto& x : p) s += "\n  - " + x;
    return s;
}

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    std::string s = b;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    // Checks that every key of `t` is known, then reads the known ones.
    void keys(const toml::table& t, const std::string& where, std::initializer_list<const char*> allowed) {
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto&& [k, v] : t) {
            (void)v;
            if (!ok.count(std::string(k.str()))) problems_.push_back("unknown key '" + where + std::string(k.str()) + "'");
        }
    }

    void get(const toml::table& t, const std::string& where, const char* key, double& out) {
        if (auto n = t.get(key)) {
            if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer()))
                out = *v;
            else
                problems_.push_back("'" + where + key + "' must be a number");
        }
    }
    void get(const toml::table& t, const std::string& where, const char* key, int& out) {
        if (auto n = t.get(key)) {
            if (auto v = n->value<std::int64_t>(); v && n->is_integer())
                out = int(*v);
            else
                problems_.push_back("'" + where + key + "' must be an integer");
        }
    }
    void get(const toml::table& t, const std::string& where, const char* key, std::uint64_t& out) {
        if (auto n = t.get(key)) {
            if (auto v = n->value<std::int64_t>(); v && n->is_integer() && *v >= 0)
                out = std::uint64_t(*v);
            else
                problems_.push_back("'" + where + key + "' must be a non-negative integer");
        }
    }
    void get(const toml::table& t, const std::string& where, const char* key, std::string& out) {
        if (auto n = t.get(key)) {
            if (auto v = n->value<std::string>(); v && n->is_string())
                out = *v;
            else
                problems_.push_back("'" + where + key + "' must be a string");
        }
    }
    void get(const toml::table& t, const std::string& where, const char* key, std::vector<double>& out) {
        if (auto n = t.get(key)) {
            const toml::array* a = n->as_array();
            if (!a) {
                problems_.push_back("'" + where + key + "' must be an array of numbers");
                return;
            }
            out.clear();
            for (auto&& e : *a) {
                if (auto v = e.value<double>(); v && (e.is_floating_point() || e.is_integer()))
                    out.push_back(*v);
                else
                    problems_.push_back("'" + where + key + "' must contain numbers only");
            }
        }
    }
    const toml::table* section(const toml::table& root, const char* name) {
        if (auto n = root.get(name)) {
            if (auto t = n->as_table()) return t;
            problems_.push_back("'" + std::string(name) + "' must be a table");
        }
        return nullptr;
    }

private:
    std::vector<std::string>& problems_;
};

void read_medium(Reader& r, const toml::table& t, const std::string& where, CoeffSpec& s) {
    r.keys(t, where, {"kind", "base", "amp", "axis", "a11", "a12", "a22", "anisotropy", "angle", "sharpness", "time_amp"});
    r.get(t, where, "kind", s.kind);
    r.get(t, where, "base", s.base);
    r.get(t, where, "amp", s.amp);
    r.get(t, where, "axis", s.axis);
    r.get(t, where, "a11", s.a11);
    r.get(t, where, "a12", s.a12);
    r.get(t, where, "a22", s.a22);
    r.get(t, where, "anisotropy", s.anisotropy);
    r.get(t, where, "angle", s.angle);
    r.get(t, where, "sharpness", s.sharpness);
    r.get(t, where, "time_amp", s.time_amp);
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9 * std::max(1.0, std::abs(x)); }

std::string medium_toml(const char* name, const CoeffSpec& s) {
    std::ostringstream o;
    o << "[medium." << name << "]\nkind = \"" << s.kind << "\"\nbase = " << num(s.base) << "\namp = " << num(s.amp)
      << "\naxis = " << s.axis << "\na11 = " << num(s.a11) << "\na12 = " << num(s.a12) << "\na22 = " << num(s.a22)
      << "\nanisotropy = " << num(s.anisotropy) << "\nangle = " << num(s.angle) << "\nsharpness = " << num(s.sharpness)
      << "\ntime_amp = " << num(s.time_amp) << "\n";
    return o.str();
}

std::string cell_toml(const ExperimentConfig& c) {
    std::ostringstream o;
    o << medium_toml("plus", c.plus) << medium_toml("minus", c.minus) << "[cell]\nny = " << c.ny << "\nns = " << c.ns
      << "\ntol = " << num(c.cell_tol) << "\n";
    return o.str();
}

std::string corrector_toml(const ExperimentConfig& c) {
    return "[corrector]\nR = " + num(c.R) + "\ntol = " + num(c.corrector_tol) + "\ndecay_floor = " + num(c.decay_floor) +
           "\n";
}

std::string sweep_toml(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "[sweep]\neps = [";
    for (size_t i = 0; i < c.eps.size(); ++i) o << (i ? ", " : "") << num(c.eps[i]);
    o << "]\nL = " << num(c.L) << "\nT = " << num(c.T) << "\npoints_per_eps = " << c.points_per_eps
      << "\ninterior = " << num(c.interior) << "\ntol = " << num(c.step_tol) << "\nsource = \"" << c.source
      << "\"\nsource_radius = " << num(c.source_radius) << "\nfloor_factor = " << num(c.floor_factor) << "\n"
      << "[lipschitz]\nradius = " << num(c.lipschitz_radius) << "\np = " << num(c.lipschitz_p) << "\n";
    return o.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> p) : std::runtime_error(join(p)), problems(std::move(p)) {}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << origin << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw ConfigError({os.str()});
    }
    ExperimentConfig c;
    std::vector<std::string> problems;
    Reader r(problems);
    r.keys(root, "", {"schema_version", "dimension", "seed", "medium", "cell", "corrector", "sweep", "lipschitz"});
    r.get(root, "", "schema_version", c.schema_version);
    r.get(root, "", "dimension", c.dimension);
    r.get(root, "", "seed", c.seed);
    if (auto m = r.section(root, "medium")) {
        r.keys(*m, "medium.", {"plus", "minus"});
        if (auto p = r.section(*m, "plus")) read_medium(r, *p, "medium.plus.", c.plus);
        if (auto p = r.section(*m, "minus")) read_medium(r, *p, "medium.minus.", c.minus);
    }
    if (auto t = r.section(root, "cell")) {
        r.keys(*t, "cell.", {"ny", "ns", "tol"});
        r.get(*t, "cell.", "ny", c.ny);
        r.get(*t, "cell.", "ns", c.ns);
        r.get(*t, "cell.", "tol", c.cell_tol);
    }
    if (auto t = r.section(root, "corrector")) {
        r.keys(*t, "corrector.", {"R", "tol", "decay_floor"});
        r.get(*t, "corrector.", "R", c.R);
        r.get(*t, "corrector.", "tol", c.corrector_tol);
        r.get(*t, "corrector.", "decay_floor", c.decay_floor);
    }
    if (auto t = r.section(root, "sweep")) {
        r.keys(*t, "sweep.", {"eps", "L", "T", "points_per_eps", "interior", "tol", "source", "source_radius",
                              "floor_factor"});
        r.get(*t, "sweep.", "eps", c.eps);
        r.get(*t, "sweep.", "L", c.L);
        r.get(*t, "sweep.", "T", c.T);
        r.get(*t, "sweep.", "points_per_eps", c.points_per_eps);
        r.get(*t, "sweep.", "interior", c.interior);
        r.get(*t, "sweep.", "tol", c.step_tol);
        r.get(*t, "sweep.", "source", c.source);
        r.get(*t, "sweep.", "source_radius", c.source_radius);
        r.get(*t, "sweep.", "floor_factor", c.floor_factor);
    }
    if (auto t = r.section(root, "lipschitz")) {
        r.keys(*t, "lipschitz.", {"radius", "p"});
        r.get(*t, "lipschitz.", "radius", c.lipschitz_radius);
        r.get(*t, "lipschitz.", "p", c.lipschitz_p);
    }
    if (!problems.empty()) throw ConfigError(problems);
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void validate_config(const ExperimentConfig& c) {
    std::vector<std::string> p;
    if (c.schema_version != kSchemaVersion)
        p.push_back("schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
                    std::to_string(kSchemaVersion) + ")");
    if (c.dimension != 2) p.push_back("dimension " + std::to_string(c.dimension) + " is not supported (only d = 2)");

    for (const auto& [name, spec] : {std::pair{"medium.plus", c.plus}, std::pair{"medium.minus", c.minus}}) {
        try {
            PeriodicCoefficientField f = make_coefficient(spec);
            validate_coefficient(f);
        } catch (const std::exception& e) {
            p.push_back(std::string(name) + ": " + e.what());
        }
    }

    if (c.ny < 4 || c.ny % 2) p.push_back("cell.ny must be even and at least 4");
    if (c.ns < 4 || c.ns % 2) p.push_back("cell.ns must be even and at least 4");
    for (const auto& [name, tol] : {std::pair{"cell.tol", c.cell_tol}, std::pair{"corrector.tol", c.corrector_tol},
                                    std::pair{"sweep.tol", c.step_tol}})
        if (!(tol > 0.0 && tol <= 1e-4)) p.push_back(std::string(name) + " must lie in (0, 1e-4]");
    if (!(c.R >= 4.0)) p.push_back("corrector.R must be at least 4");
    else if (!near_integer(c.R * c.ny)) p.push_back("corrector.R * cell.ny must be an integer");
    if (!(c.decay_floor > 0.0)) p.push_back("corrector.decay_floor must be positive");

    if (!(c.L > 0.0)) p.push_back("sweep.L must be positive");
    if (!(c.T > 0.0)) p.push_back("sweep.T must be positive");
    if (c.points_per_eps < 8) p.push_back("sweep.points_per_eps must be at least 8 (h <= eps/8, tau <= eps^2/8)");
    if (c.ny != c.points_per_eps || c.ns != c.points_per_eps)
        p.push_back("cell.ny and cell.ns must equal sweep.points_per_eps so that correctors are sampled at nodes");
    if (!(c.interior > 0.0 && c.interior <= 1.0)) p.push_back("sweep.interior must lie in (0, 1]");
    if (c.source != "bump" && c.source != "zero") p.push_back("sweep.source must be \"bump\" or \"zero\"");
    if (!(c.source_radius > 0.0)) p.push_back("sweep.source_radius must be positive");
    if (!(c.floor_factor >= 1.0)) p.push_back("sweep.floor_factor must be at least 1");
    if (c.eps.empty()) p.push_back("sweep.eps must list at least one value");
    std::set<double> seen;
    for (double e : c.eps) {
        const std::string tag = "sweep.eps value " + num(e);
        if (!(e > 0.0 && e <= 0.5)) {
            p.push_back(tag + " must lie in (0, 1/2]");
            continue;
        }
        if (!seen.insert(e).second) p.push_back(tag + " is repeated");
        if (c.L > 0 && c.T > 0 && c.points_per_eps > 0) {
            const double h = e / c.points_per_eps, tau = e * e / c.points_per_eps;
            if (!near_integer(c.L / h)) p.push_back(tag + ": L / h must be an integer");
            if (!near_integer(c.T / tau)) p.push_back(tag + ": T / tau must be an integer");
            if (c.source == "bump" && c.source_radius > c.L - 2 * h)
                p.push_back(tag + ": the source must vanish within two cells of the box edge");
            if (4 * e * e >= 1.5 * c.T) p.push_back(tag + ": the time cutoff plateau [4 eps^2, 3T/2] is empty");
            if (c.T / tau < 2 * std::ceil(0.5 * e * e / tau)) p.push_back(tag + ": T is shorter than the temporal kernel");
        }
    }
    if (!(c.lipschitz_radius > 0.0)) p.push_back("lipschitz.radius must be positive");
    else {
        if (2 * c.lipschitz_radius > c.L) p.push_back("lipschitz.radius: the ball of radius 2r must fit in the box");
        if (4 * c.lipschitz_radius * c.lipschitz_radius > c.T) p.push_back("lipschitz.radius: 4 r^2 must not exceed T");
    }
    if (!(c.lipschitz_p > 4.0)) p.push_back("lipschitz.p must exceed d + 2 = 4");
    if (!p.empty()) throw ConfigError(p);
}

std::string stage_key(const ExperimentConfig& c, const std::string& stage) {
    if (stage == "cell") return cell_toml(c);
    if (stage == "corrector" || stage == "dual") return stage + "\n" + cell_toml(c) + corrector_toml(c);
    if (stage == "sweep") return "sweep\n" + cell_toml(c) + sweep_toml(c);
    throw std::invalid_argument("unknown stage '" + stage + "'");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_toml(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "schema_version = " << c.schema_version << "\ndimension = " << c.dimension << "\nseed = " << c.seed << "\n\n"
      << cell_toml(c) << corrector_toml(c) << sweep_toml(c);
    return o.str();
}

}  // namespace homog
