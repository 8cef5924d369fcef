#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhd/statespace.hpp"

namespace qhd {

using cplx = std::complex<double>;

/// Hopping Hamiltonian on one sector or fragment. Every stored entry has the
/// same amplitude J, so rows keep column ordinals only; the matrix is
/// symmetric with a zero diagonal.
class SparseHamiltonian {
public:
    SparseHamiltonian(BasisTable basis, double J, std::vector<std::uint64_t> row_offsets,
                      std::vector<std::uint32_t> columns);

    std::size_t dim() const noexcept { return basis_.size(); }
    double J() const noexcept { return J_; }
    const BasisTable& basis() const noexcept { return basis_; }
    std::size_t nnz() const noexcept { return columns_.size(); }

    std::span<const std::uint32_t> row(std::size_t r) const noexcept {
        return {columns_.data() + offsets_[r], static_cast<std::size_t>(offsets_[r + 1] - offsets_[r])};
    }
    std::size_t max_degree() const noexcept;

    /// w = H v. Throws dimension_mismatch on size mismatch.
    void apply(std::span<const double> v, std::span<double> w) const;
    void apply(std::span<const cplx> v, std::span<cplx> w) const;
    std::vector<double> apply(std::span<const double> v) const;
    std::vector<cplx> apply(std::span<const cplx> v) const;

    /// Coordinate-list dump: "row col value" per line, sorted by (row, col).
    std::string dump_coo() const;

private:
    template <class T>
    void apply_impl(std::span<const T> v, std::span<T> w) const;

    BasisTable basis_;
    double J_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> columns_;
};

/// Builds H on the whole sector.
SparseHamiltonian build_hamiltonian(BasisTable basis, double J = 1.0);

/// Builds H restricted to one fragment of a decomposition of `basis`.
/// Throws unknown_fragment for an id that is not a fragment.
SparseHamiltonian build_hamiltonian(const BasisTable& basis, const FragmentDecomposition& fragments,
                                    std::size_t fragment_id, double J = 1.0);

}  // namespace qhd
