#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qhd/dynamics.hpp"
#include "qhd/patterns.hpp"
#include "qhd/statespace.hpp"

namespace qhd {

/// Random stream of one trajectory: a Mersenne Twister seeded from
/// splitmix64(seed, trajectory index), so every trajectory is reproducible
/// on its own regardless of scheduling.
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory);

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, n) by multiply-shift.
    std::uint32_t below(std::uint32_t n) {
        return static_cast<std::uint32_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Mutable walker state for lattices of any size.
class Walker {
public:
    Walker(const Lattice& lattice, std::span<const int> sites);

    /// One attempted move: a uniform particle and a uniform axis direction.
    /// Returns true when the move was accepted.
    bool step(TrajectoryRng& rng);

    const std::vector<int>& positions() const noexcept { return positions_; }
    const SiteOccupation& occupation() const noexcept { return occ_; }
    int M() const noexcept { return static_cast<int>(positions_.size()); }

private:
    const Lattice* lattice_;
    std::vector<int> positions_;
    SiteOccupation occ_;
};

/// Bit-configuration form of a single random-walk step.
Configuration rw_step(Configuration config, const Lattice& lattice, TrajectoryRng& rng);

/// Rule turning a step count into mapped time Jt = scale * n_steps / M
/// (or scale * n_steps when per_particle is false).
struct TimeMap {
    double scale = 2.0 * 3.14159265358979323846;
    bool per_particle = true;
    double operator()(std::uint64_t n_steps, int M) const;
};

/// Jt = 2 pi n_steps / M. Throws for M = 0.
double time_map(std::uint64_t n_steps, int M);

struct WalkSchedule {
    std::uint64_t n_traj = 1;
    std::vector<std::uint64_t> record_steps;  // strictly ascending
    std::uint64_t seed = 0;
};

struct EnsembleResult {
    std::vector<std::uint64_t> steps;
    std::vector<double> times;
    std::vector<std::vector<double>> occupations;  // [record][site] trajectory mean
    std::vector<double> G;
    std::vector<double> G_stderr;
    std::uint64_t n_traj = 0;
    std::uint64_t seed = 0;
};

/// Independent walks from one initial configuration; averages are reduced
/// with integer accumulators so results do not depend on the thread count.
EnsembleResult simulate_ensemble(std::span<const int> initial, const Lattice& lattice,
                                 const WalkSchedule& schedule, const TimeMap& map = {});

/// delta_eta = N^-1 sum_i |<n_i> - eta|.
double delta_eta(std::span<const double> occ, double eta);

struct ScalingRow {
    int L = 0;
    int M = 0;
    double eta = 0.0;
    std::uint64_t final_steps = 0;
    double delta_eta = 0.0;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    PowerFit fit;  // log delta_eta against log L; points = 0 for a single L
};

struct ScanTemplate {
    std::uint64_t n_traj = 10'000;
    double sweeps = 4.0;      // final step = ceil(sweeps * M * N_sites)
    int n_records = 8;        // evenly spaced records up to the final step
    std::uint64_t seed = 0;
};

/// Finite-size scan of the long-time deviation from a uniform occupation.
/// Each L uses the named initial pattern on an open square lattice and the
/// seed splitmix64(seed + L).
ScalingTable finite_size_scan(std::span<const int> Ls, const std::string& pattern, const ScanTemplate& tmpl);

}  // namespace qhd
