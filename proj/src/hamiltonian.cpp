#include "qhd/hamiltonian.hpp"

#include <algorithm>
#include <sstream>

#include "qhd/parallel.hpp"

namespace qhd {

SparseHamiltonian::SparseHamiltonian(BasisTable basis, double J, std::vector<std::uint64_t> row_offsets,
                                     std::vector<std::uint32_t> columns)
    : basis_(std::move(basis)), J_(J), offsets_(std::move(row_offsets)), columns_(std::move(columns)) {}

std::size_t SparseHamiltonian::max_degree() const noexcept {
    std::size_t d = 0;
    for (std::size_t r = 0; r < dim(); ++r) d = std::max<std::size_t>(d, offsets_[r + 1] - offsets_[r]);
    return d;
}

template <class T>
void SparseHamiltonian::apply_impl(std::span<const T> v, std::span<T> w) const {
    if (v.size() != dim() || w.size() != dim())
        throw Error(ErrorKind::dimension_mismatch, "hamiltonian",
                    "vector length " + std::to_string(v.size()) + " does not match dimension " +
                        std::to_string(dim()));
    parallel_for(dim(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t r = begin; r < end; ++r) {
            T acc{};
            for (std::uint64_t k = offsets_[r]; k < offsets_[r + 1]; ++k) acc += v[columns_[k]];
            w[r] = J_ * acc;
        }
    });
}

void SparseHamiltonian::apply(std::span<const double> v, std::span<double> w) const { apply_impl(v, w); }
void SparseHamiltonian::apply(std::span<const cplx> v, std::span<cplx> w) const { apply_impl(v, w); }

std::vector<double> SparseHamiltonian::apply(std::span<const double> v) const {
    std::vector<double> w(v.size());
    apply_impl(v, std::span<double>(w));
    return w;
}

std::vector<cplx> SparseHamiltonian::apply(std::span<const cplx> v) const {
    std::vector<cplx> w(v.size());
    apply_impl(v, std::span<cplx>(w));
    return w;
}

std::string SparseHamiltonian::dump_coo() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t r = 0; r < dim(); ++r)
        for (std::uint32_t c : row(r)) os << r << ' ' << c << ' ' << J_ << '\n';
    return os.str();
}

SparseHamiltonian build_hamiltonian(BasisTable basis, double J) {
    const HopKernel kernel(basis.lattice());
    const std::size_t n = basis.size();
    std::vector<std::uint64_t> offsets{0};
    offsets.reserve(n + 1);
    std::vector<std::uint32_t> columns;
    std::vector<std::uint32_t> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        kernel.for_each_successor(basis[i], [&](Configuration s) {
            if (const auto j = basis.index_of(s)) row.push_back(static_cast<std::uint32_t>(*j));
        });
        std::sort(row.begin(), row.end());
        columns.insert(columns.end(), row.begin(), row.end());
        offsets.push_back(columns.size());
    }
    return SparseHamiltonian(std::move(basis), J, std::move(offsets), std::move(columns));
}

SparseHamiltonian build_hamiltonian(const BasisTable& basis, const FragmentDecomposition& fragments,
                                    std::size_t fragment_id, double J) {
    const auto members = fragments.members(fragment_id);
    return build_hamiltonian(basis.subset(members), J);
}

}  // namespace qhd
