#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kprobe/action_map.hpp"
#include "kprobe/model.hpp"
#include "kprobe/tolerances.hpp"

namespace kprobe {

inline constexpr int kConfigSchemaVersion = 1;

struct PathConfig {
    std::vector<double> direction;  ///< one positive entry per factor (default all 1)
    std::vector<double> center;     ///< fixed center coordinates (default 0)
    double tmin = 1e-12;
    double tmax = 1e-3;
    int points = 40;
};

struct BoxConfig {
    std::vector<double> lower;  ///< default: center [-0.1, 0.1], singular [1e-6, 1e-2]
    std::vector<double> upper;
    std::size_t samples = 500;
};

/// Parsed and validated run configuration. See docs/config_schema.md.
struct RunConfig {
    SystemModel model;
    std::string model_source;  ///< "inline", "file:<path>" or "catalog:<name>"
    std::vector<MomentumPoint> points;
    std::filesystem::path output_dir = "kprobe-out";
    std::uint64_t seed = 0;
    Tolerances tol;
    nlohmann::json fit = nlohmann::json::object();  ///< overrides merged into default_fit_grid
    PathConfig path;
    BoxConfig box;
};

/// Relative model_file and output_dir entries resolve against base_dir.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& file);

/// Default grid for factor i with the config's "fit" overrides applied.
FitGrid fit_grid_for(const RunConfig& cfg, std::size_t i);

Tolerances parse_tolerances(const nlohmann::json& j, Tolerances base = {});

}  // namespace kprobe
