#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "qhd/hamiltonian.hpp"

namespace qhd {

inline constexpr std::size_t kDefaultDenseCap = 20'000;

struct EigenSystem {
    std::vector<double> energies;  // ascending
    Eigen::MatrixXd vectors;       // column k is the eigenvector of energies[k]
};

/// Full dense diagonalization (LAPACK divide and conquer).
/// Throws dense_cap_exceeded above `dense_cap` states.
EigenSystem diagonalize(const SparseHamiltonian& H, std::size_t dense_cap = kDefaultDenseCap);

/// Schmidt structure of a basis across a bipartition, reusable for every
/// state on that basis.
class EntanglementCut {
public:
    EntanglementCut(const BasisTable& basis, const Bipartition& part);

    /// Distinct restricted patterns occurring on each side.
    std::size_t dim_a() const noexcept { return n_a_; }
    std::size_t dim_b() const noexcept { return n_b_; }

    /// S = -sum_k s_k^2 ln s_k^2 over the Schmidt coefficients.
    double entropy(std::span<const double> psi) const;
    double entropy(std::span<const cplx> psi) const;

private:
    template <class T>
    double entropy_impl(std::span<const T> psi) const;

    std::size_t n_a_ = 0, n_b_ = 0;
    bool reduce_on_a_ = true;            // build the reduced matrix on the smaller side
    std::vector<std::uint32_t> row_;     // per configuration: index on the kept side
    std::vector<std::size_t> groups_;    // configurations grouped by the traced side
    std::vector<std::size_t> group_start_;
};

double entanglement_entropy(std::span<const double> psi, const BasisTable& basis, const Bipartition& part);
double entanglement_entropy(std::span<const cplx> psi, const BasisTable& basis, const Bipartition& part);

struct EdwardsAnderson {
    double q_ea = 0.0;
    double q = 0.0;
};

/// Q_EA = N^-2 sum_ij <(2n_i-1)(2n_j-1)>^2 and Q = (Q_EA - g^4)/(1 - g^4), g = 2 eta - 1.
EdwardsAnderson edwards_anderson(std::span<const double> psi, const BasisTable& basis);
EdwardsAnderson edwards_anderson(std::span<const cplx> psi, const BasisTable& basis);

/// C_inf = N^-1 (2 pi / L^d)^2 sum_ij e^{i pi.(r_i - r_j)} Tr(n_i n_j), with the
/// trace over the given basis.
double structure_factor_inf_T(const BasisTable& basis);

struct ScarRecord {
    std::size_t fragment_id = 0;
    std::size_t fragment_size = 0;
    bool is_largest_fragment = false;
    double energy = 0.0;
    double energy_density = 0.0;
    double entropy = 0.0;
    double q_ea = 0.0;
    double q = 0.0;
};

struct ScarScan {
    std::vector<ScarRecord> records;
    std::size_t sector_size = 0;
    std::size_t n_fragments = 0;
    std::size_t largest_fragment_id = 0;
    std::vector<std::size_t> skipped_fragments;  // above the dense cap
    bool partial() const noexcept { return !skipped_fragments.empty(); }
    double max_entropy() const noexcept;
    double max_residual = 0.0;  // max_k ||H v_k - E_k v_k||
};

/// Diagonalizes every fragment of the sector and records per-eigenstate
/// diagnostics. The cut is the bottom half in 2D and the left half in 1D.
/// Records are ordered by fragment id, then energy.
ScarScan scar_scan(const Lattice& lattice, int M, std::size_t dense_cap = kDefaultDenseCap,
                   double J = 1.0, std::uint64_t memory_cap = kDefaultMemoryCap);

/// Scar flag used for reporting only.
inline bool looks_like_scar(const ScarRecord& r, double max_entropy) {
    return r.q > 0.5 && r.entropy < 0.5 * max_entropy;
}

}  // namespace qhd
