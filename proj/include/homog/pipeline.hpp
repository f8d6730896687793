#pragma once

#include "homog/config.hpp"
#include "homog/corrector.hpp"
#include "homog/expansion.hpp"
#include "homog/report.hpp"

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace homog {

// A stage failed; `stage` names it. Files written before the failure are left in place.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string s, const std::string& what) : std::runtime_error("stage '" + s + "' failed: " + what), stage(std::move(s)) {}
};

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> s{"cell", "profile", "corrector", "dual", "sweep", "decay", "lipschitz-probe", "report"};
    return s;
}

// Named arrays of doubles, written in key order. Used for content-addressed stage caches.
class Archive {
public:
    void put(const std::string& key, const Vec& v);
    void put(const std::string& key, double v) { items_[key] = {v}; }
    void put(const std::string& key, const Mat2& m) { items_[key] = {m(0, 0), m(1, 0), m(0, 1), m(1, 1)}; }
    void put(const std::string& key, const Grid3& g);
    Vec vec(const std::string& key) const;
    double scalar(const std::string& key) const { return at(key).at(0); }
    Mat2 mat(const std::string& key) const;
    Grid3 grid(const std::string& key) const;
    void save(const std::string& path) const;
    static std::optional<Archive> load(const std::string& path);

private:
    const std::vector<double>& at(const std::string& key) const;
    std::map<std::string, std::vector<double>> items_;
};

struct PipelineOptions {
    std::string out_dir = "out";
    bool use_cache = true;
    std::ostream* log = nullptr;
};

// Runs the experiment stages of one config. Each stage writes its CSV tables and a JSON fragment
// <out>/<stage>.json; upstream stages are computed on demand and cached under <out>/cache by the hash
// of the config keys they depend on.
class Pipeline {
public:
    Pipeline(ExperimentConfig cfg, PipelineOptions opt);
    ~Pipeline();

    Json run(const std::string& stage);
    Json cell();
    Json profile();
    Json corrector();
    Json dual();
    Json sweep();
    Json decay();
    Json lipschitz_probe();
    Json report();

    // Stages served from the cache during this run, in order.
    const std::vector<std::string>& cache_hits() const { return hits_; }
    const std::vector<ExpansionRecord>& records();
    const ExperimentConfig& config() const { return cfg_; }

    struct State;

private:
    std::string path(const std::string& name) const;
    void log(const std::string& msg) const;
    Json finish(const std::string& stage, Json body, double seconds);

    ExperimentConfig cfg_;
    PipelineOptions opt_;
    std::vector<std::string> hits_;
    std::unique_ptr<State> st_;
};

// Columns of sweep.csv, in order.
const std::vector<std::string>& sweep_columns();
std::vector<std::string> sweep_row(const ExpansionRecord& r);

// Published JSON schema of report.json.
const Json& report_schema();

// Sweep radius: the corrector cylinder must reach |x1| / eps on the whole box.
double sweep_radius(const ExperimentConfig& cfg);

}  // namespace homog
