#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhd/lattice.hpp"

namespace qhd {

enum class ExperimentKind { enumerate, fragments, statics, melt1d, defect2d, spectrum, classical_scaling };

const char* to_string(ExperimentKind kind) noexcept;

/// Fully resolved experiment description. Every field has a default, and
/// `from_json` rejects unknown keys and out-of-range values before anything
/// runs.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::enumerate;
    LatticeSpec lattice{};
    std::optional<int> M;          // unset: all sectors (enumerate, statics) or pattern-implied
    std::vector<int> Ls;           // statics and classical-scaling lattice sizes
    std::string pattern;           // named pattern; empty when `sites` is given
    std::vector<int> sites;        // explicit initial configuration
    std::vector<double> t_grid;    // quantum record times (and mapped classical times)
    double J = 1.0;
    double tol = 1e-8;
    int krylov_dim = 7;
    double dt_initial = 0.1;
    double dt_min = 1e-6;
    double dt_max = 1.0;
    double fit_lo = 2.0;
    double fit_hi = 10.0;
    std::uint64_t n_traj = 10'000;
    std::uint64_t seed = 1;
    std::string time_rule = "per-particle";  // Jt = 2 pi n / M, or "per-step": Jt = 2 pi n
    double plateau_time = 0.0;                // defect2d: extra classical horizon (0: none)
    double sweeps = 4.0;                      // classical-scaling schedule template
    int n_records = 8;
    std::uint64_t dense_cap = 20'000;
    std::uint64_t memory_cap = 20'000'000;
    bool dump_operator = false;
    int threads = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Reads a JSON file (".json") or an INI-style key-value file (anything
/// else). A run manifest is accepted too; its resolved config is used.
nlohmann::json load_config_file(const std::filesystem::path& path);

struct RunOutcome {
    int exit_code = 0;
    nlohmann::json manifest;
};

/// Runs one experiment, writing CSVs and manifest.json into `out_dir`.
RunOutcome run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace qhd
