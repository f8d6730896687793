#pragma once

#include "homog/coeff.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace homog {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    int dimension = 2;
    std::uint64_t seed = 1;
    CoeffSpec plus, minus;

    // [cell]
    int ny = 8, ns = 8;
    double cell_tol = 1e-12;

    // [corrector]
    double R = 8.0;
    double corrector_tol = 1e-12;
    double decay_floor = 1e-28;

    // [sweep]
    std::vector<double> eps{0.125, 0.0625, 0.03125};
    double L = 1.0, T = 0.25;
    int points_per_eps = 8;
    double interior = 0.5;
    double step_tol = 1e-10;
    std::string source = "bump";  // bump | zero
    double source_radius = 0.3;
    double floor_factor = 5.0;    // points within this factor of the floor are left out of slopes

    // [lipschitz]
    double lipschitz_radius = 0.25;
    double lipschitz_p = 8.0;
};

// Every problem found in a config, reported together.
struct ConfigError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ConfigError(std::vector<std::string> p);
};

// Parses TOML text; unknown keys and type mismatches are collected with the range errors.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

// Canonical text of the keys each stage depends on; stage in {cell, corrector, dual, sweep}.
std::string stage_key(const ExperimentConfig& cfg, const std::string& stage);
std::uint64_t fnv1a(const std::string& s);

// Round-trippable TOML rendering of the whole config.
std::string to_toml(const ExperimentConfig& cfg);

}  // namespace homog
