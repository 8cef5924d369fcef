#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhd/hamiltonian.hpp"
#include "qhd/patterns.hpp"

namespace qhd {

struct StateVector {
    std::vector<cplx> amplitudes;
    double time = 0.0;  // units of 1/J
};

/// Unit vector on the ordinal of `config`. Throws not_in_basis.
StateVector basis_state(const BasisTable& basis, Configuration config);

struct KrylovStep {
    StateVector state;
    double error_estimate = 0.0;  // ||y_m - y_{m-1}||_2
    int krylov_dim = 0;           // < m when the Krylov space was exhausted
};

/// One step psi -> exp(-i H dt) psi in an m-dimensional Lanczos space.
KrylovStep krylov_step(const SparseHamiltonian& H, const StateVector& psi, double dt, int m = 7);

struct EvolveOptions {
    double tol = 1e-8;
    int krylov_dim = 7;
    double dt_initial = 0.1;
    double dt_min = 1e-6;
    double dt_max = 1.0;
    /// Called with the state at every grid time, after the observables.
    std::function<void(const StateVector&)> on_record;
};

struct ObservableSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> occupations;  // [time][site]
    std::vector<double> G;
    std::vector<double> norm;
    std::vector<double> energy;
    std::size_t accepted_steps = 0;
    std::size_t rejected_trials = 0;
};

/// Adaptive evolution with dt doubled after each accepted full step and halved
/// while the error estimate exceeds tol. Steps are trimmed to land on grid
/// times. G is measured against `reference` (defaults to the dominant basis
/// configuration of psi0).
ObservableSeries adaptive_evolve(const SparseHamiltonian& H, const StateVector& psi0,
                                 std::span<const double> t_grid, const EvolveOptions& options = {},
                                 std::optional<Configuration> reference = std::nullopt);

/// <n_i> = sum_c |psi_c|^2 n_i(c).
std::vector<double> occupations(const StateVector& psi, const BasisTable& basis);

/// G = N^-1 sum_i (2<n_i> - 1) s_i - (2 eta - 1)^2 with s_i = 2 n_i(0) - 1.
double autocorrelation(std::span<const double> occ, std::span<const std::uint8_t> initial, double eta);
double autocorrelation(std::span<const double> occ, Configuration initial, double eta);

/// Energy <psi|H|psi>.
double energy(const SparseHamiltonian& H, const StateVector& psi);

/// RMS distance from the center of mass, sqrt(sum_i (x_i - xbar)^2 <n_i> / M).
double rms_radius(std::span<const double> occ, int M);

struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log y against log x over points with x in [lo, hi].
PowerFit loglog_fit(std::span<const double> x, std::span<const double> y, double lo, double hi);

struct Melt1dResult {
    std::vector<int> initial_sites;
    ObservableSeries series;
    std::vector<double> radius;
    PowerFit radius_fit;
    std::vector<std::string> warnings;
};

inline constexpr double kGuardVelocity = 2.0;
inline constexpr double kEdgeOccupationLimit = 1e-3;

/// Quantum melting of a centered crystal on an open chain.
Melt1dResult melt1d_experiment(int L, int M, int spacing, std::span<const double> t_grid,
                               double fit_lo, double fit_hi, const EvolveOptions& options = {},
                               double J = 1.0);

}  // namespace qhd
