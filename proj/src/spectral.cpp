#include "qhd/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <mutex>
#include <numeric>

namespace qhd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Bipartition default_cut(const Lattice& lattice) {
    return lattice.dim() == 2 ? bottom_half_bipartition(lattice) : left_half_bipartition(lattice);
}

template <class T>
double squared_modulus(const T& z) {
    return std::norm(z);
}

template <class T>
EdwardsAnderson edwards_anderson_impl(std::span<const T> psi, const BasisTable& basis) {
    if (psi.size() != basis.size())
        throw Error(ErrorKind::dimension_mismatch, "spectral", "state does not match the basis");
    const int n = basis.lattice().num_sites();
    const double g = 2.0 * basis.density() - 1.0;
    const double g4 = g * g * g * g;
    if (g4 >= 1.0)
        throw Error(ErrorKind::invalid_argument, "spectral",
                    "normalized Edwards-Anderson parameter is undefined at density 0 or 1");
    // corr_ij = sum_c p_c s_i(c) s_j(c), diagonal in the occupation basis.
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd s(n);
    for (std::size_t c = 0; c < basis.size(); ++c) {
        const double p = squared_modulus(psi[c]);
        if (p == 0.0) continue;
        for (int i = 0; i < n; ++i) s[i] = ((basis[c] >> i) & 1u) ? 1.0 : -1.0;
        corr.selfadjointView<Eigen::Lower>().rankUpdate(s, p);
    }
    const Eigen::MatrixXd full = corr.selfadjointView<Eigen::Lower>();
    EdwardsAnderson out;
    out.q_ea = full.squaredNorm() / (static_cast<double>(n) * n);
    out.q = (out.q_ea - g4) / (1.0 - g4);
    return out;
}

// one-time sanity check of the linked dsyevd
void check_lapack_once() {
    static std::once_flag flag;
    static bool healthy = true;
    std::call_once(flag, [] {
        const int n = 160;
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = (i % 3 == 0 || j % 3 == 0) ? 0.0 : std::sin(1.0 + i * 7 + j * 13);
        Eigen::VectorXd w(n);
        Eigen::MatrixXd v = a;
        const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, v.data(), n, w.data());
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double dot = 0.0;
                for (int k = 0; k < n; ++k) dot += v(k, i) * v(k, j);
                worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
            }
        healthy = info == 0 && worst < 1e-10;
    });
    if (!healthy)
        throw Error(ErrorKind::non_convergence, "spectral",
                    "the linked LAPACK/BLAS returns non-orthogonal eigenvectors on this machine "
                    "(for OpenBLAS, set OPENBLAS_CORETYPE to a kernel that matches the CPU, e.g. Haswell)");
}

}  // namespace

EigenSystem diagonalize(const SparseHamiltonian& H, std::size_t dense_cap) {
    const std::size_t n = H.dim();
    if (n > dense_cap)
        throw Error(ErrorKind::dense_cap_exceeded, "spectral",
                    "fragment of dimension " + std::to_string(n) + " exceeds the dense cap " +
                        std::to_string(dense_cap));
    check_lapack_once();
    EigenSystem es;
    es.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::uint32_t c : H.row(r)) es.vectors(static_cast<Eigen::Index>(r), c) = H.J();
    es.energies.resize(n);
    if (n == 0) return es;
    const auto ln = static_cast<lapack_int>(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', ln, es.vectors.data(), ln, es.energies.data());
    if (info != 0)
        throw Error(ErrorKind::non_convergence, "spectral", "dsyevd failed with info " + std::to_string(info));
    return es;
}

EntanglementCut::EntanglementCut(const BasisTable& basis, const Bipartition& part) {
    Configuration mask_a = 0;
    for (int s : part.set_a) mask_a |= site_bit(s);
    const std::size_t n = basis.size();

    auto index_side = [&](bool side_a, std::vector<std::uint32_t>& idx) {
        std::vector<Configuration> pats(n);
        for (std::size_t c = 0; c < n; ++c) pats[c] = side_a ? (basis[c] & mask_a) : (basis[c] & ~mask_a);
        std::vector<Configuration> uniq = pats;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        idx.resize(n);
        for (std::size_t c = 0; c < n; ++c)
            idx[c] = static_cast<std::uint32_t>(std::lower_bound(uniq.begin(), uniq.end(), pats[c]) - uniq.begin());
        return uniq.size();
    };

    std::vector<std::uint32_t> ia, ib;
    n_a_ = index_side(true, ia);
    n_b_ = index_side(false, ib);
    reduce_on_a_ = n_a_ <= n_b_;
    row_ = reduce_on_a_ ? ia : ib;
    const auto& traced = reduce_on_a_ ? ib : ia;
    const std::size_t n_traced = reduce_on_a_ ? n_b_ : n_a_;

    group_start_.assign(n_traced + 1, 0);
    for (std::size_t c = 0; c < n; ++c) ++group_start_[traced[c] + 1];
    std::partial_sum(group_start_.begin(), group_start_.end(), group_start_.begin());
    groups_.resize(n);
    std::vector<std::size_t> fill(group_start_.begin(), group_start_.end() - 1);
    for (std::size_t c = 0; c < n; ++c) groups_[fill[traced[c]]++] = c;
}

template <class T>
double EntanglementCut::entropy_impl(std::span<const T> psi) const {
    if (psi.size() != row_.size())
        throw Error(ErrorKind::dimension_mismatch, "spectral", "state does not match the basis");
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    const auto d = static_cast<Eigen::Index>(reduce_on_a_ ? n_a_ : n_b_);
    Mat rho = Mat::Zero(d, d);
    for (std::size_t g = 0; g + 1 < group_start_.size(); ++g) {
        for (std::size_t p = group_start_[g]; p < group_start_[g + 1]; ++p) {
            const std::size_t cp = groups_[p];
            for (std::size_t q = group_start_[g]; q < group_start_[g + 1]; ++q) {
                const std::size_t cq = groups_[q];
                if constexpr (std::is_same_v<T, double>)
                    rho(row_[cp], row_[cq]) += psi[cp] * psi[cq];
                else
                    rho(row_[cp], row_[cq]) += psi[cp] * std::conj(psi[cq]);
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double lambda = es.eigenvalues()[k];
        if (lambda > 0.0) s -= lambda * std::log(lambda);
    }
    return s;
}

double EntanglementCut::entropy(std::span<const double> psi) const { return entropy_impl(psi); }
double EntanglementCut::entropy(std::span<const cplx> psi) const { return entropy_impl(psi); }

double entanglement_entropy(std::span<const double> psi, const BasisTable& basis, const Bipartition& part) {
    return EntanglementCut(basis, part).entropy(psi);
}

double entanglement_entropy(std::span<const cplx> psi, const BasisTable& basis, const Bipartition& part) {
    return EntanglementCut(basis, part).entropy(psi);
}

EdwardsAnderson edwards_anderson(std::span<const double> psi, const BasisTable& basis) {
    return edwards_anderson_impl(psi, basis);
}

EdwardsAnderson edwards_anderson(std::span<const cplx> psi, const BasisTable& basis) {
    return edwards_anderson_impl(psi, basis);
}

double structure_factor_inf_T(const BasisTable& basis) {
    const Lattice& lat = basis.lattice();
    if (basis.size() == 0) return 0.0;
    // e^{i pi.(r_i - r_j)} = sigma_i sigma_j with sigma = (-1)^(x+y), so each
    // configuration contributes (sum over occupied sites of sigma)^2.
    Configuration even = 0;
    for (int s = 0; s < lat.num_sites(); ++s) {
        const Coord c = lat.coord(s);
        if ((c.x + c.y) % 2 == 0) even |= site_bit(s);
    }
    long double total = 0.0L;
    for (const Configuration c : basis.configs()) {
        const long long stag = std::popcount(c & even) - std::popcount(c & ~even);
        total += static_cast<long double>(stag * stag);
    }
    const double pref = kTwoPi / lat.num_sites();
    return static_cast<double>(total / static_cast<long double>(basis.size())) * pref * pref;
}

double ScarScan::max_entropy() const noexcept {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.entropy);
    return m;
}

ScarScan scar_scan(const Lattice& lattice, int M, std::size_t dense_cap, double J, std::uint64_t memory_cap) {
    const BasisTable basis = enumerate_sector(lattice, M, memory_cap);
    const FragmentDecomposition frags = fragment_decomposition(basis);
    const Bipartition cut = default_cut(lattice);

    ScarScan scan;
    scan.sector_size = basis.size();
    scan.n_fragments = frags.n_fragments();
    scan.largest_fragment_id = frags.largest_id();
    const double volume = lattice.num_sites();

    // Group member ordinals by fragment in one pass.
    std::vector<std::vector<std::size_t>> members(frags.n_fragments());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto it = std::lower_bound(frags.fragments.begin(), frags.fragments.end(), frags.labels[i],
                                         [](const Fragment& f, std::size_t id) { return f.id < id; });
        members[static_cast<std::size_t>(it - frags.fragments.begin())].push_back(i);
    }

    for (std::size_t f = 0; f < frags.n_fragments(); ++f) {
        const Fragment& frag = frags.fragments[f];
        if (frag.size > dense_cap) {
            scan.skipped_fragments.push_back(frag.id);
            continue;
        }
        const SparseHamiltonian H = build_hamiltonian(basis.subset(members[f]), J);
        const EigenSystem es = diagonalize(H, dense_cap);
        const EntanglementCut ent(H.basis(), cut);
        std::vector<double> v(H.dim()), hv(H.dim());
        for (std::size_t k = 0; k < H.dim(); ++k) {
            const auto col = es.vectors.col(static_cast<Eigen::Index>(k));
            std::copy(col.data(), col.data() + col.size(), v.begin());
            H.apply(std::span<const double>(v), std::span<double>(hv));
            double res = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double d = hv[i] - es.energies[k] * v[i];
                res += d * d;
            }
            scan.max_residual = std::max(scan.max_residual, std::sqrt(res));

            ScarRecord rec;
            rec.fragment_id = frag.id;
            rec.fragment_size = frag.size;
            rec.is_largest_fragment = frag.id == scan.largest_fragment_id;
            rec.energy = es.energies[k];
            rec.energy_density = rec.energy / volume;
            rec.entropy = ent.entropy(std::span<const double>(v));
            const auto ea = edwards_anderson(std::span<const double>(v), H.basis());
            rec.q_ea = ea.q_ea;
            rec.q = ea.q;
            scan.records.push_back(rec);
        }
    }
    return scan;
}

}  // namespace qhd
