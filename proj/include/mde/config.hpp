#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mde/afas.hpp"
#include "mde/scenarios.hpp"

namespace mde {

/// Contents of a run config file:
///
///   [scenario]   name, optional [scenario.params], [scenario.options] and
///                [[scenario.atoms]] {weight, x = [...]}
///   [partition]  T (default: scenario horizon), steps or nodes = [...]
///   [run]        budget, seed, substeps, record_half_steps,
///                reevaluate_after_f, output
///   [converge]   levels = [...], p, distance_points
///   [verify]     battery_radius
struct RunConfig {
    ScenarioSpec scenario;
    std::optional<double> horizon;
    int steps = 16;
    std::optional<std::vector<double>> nodes;
    AfasConfig afas;
    std::string output = "out";
    std::vector<int> levels{4, 16, 64};
    double p = 2.0;
    Index distance_points = 1000;
    std::optional<double> battery_radius;
    /// Raw file text, hashed into the run manifest.
    std::string source;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Partition from the config, defaulting T to the scenario horizon.
Partition config_partition(const RunConfig& cfg, const Scenario& scenario);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace mde
