#include "doctest.h"
#include "oracles.hpp"

#include "qhd/hamiltonian.hpp"
#include "qhd/spectral.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace qhd;

namespace {

Lattice lat(int dim, int L, Boundary b = Boundary::open) { return build_lattice({dim, L, b, 1}); }

std::uint64_t mask_of(const std::vector<int>& sites) {
    std::uint64_t m = 0;
    for (int s : sites) m |= std::uint64_t{1} << s;
    return m;
}

// Entropy from the singular values of the coefficient matrix psi[a][b].
double svd_entropy(const std::vector<double>& psi, const BasisTable& b, const Bipartition& p) {
    const auto ma = mask_of(p.set_a), mb = mask_of(p.set_b);
    std::map<std::uint64_t, int> ra, rb;
    for (auto c : b.configs()) {
        ra.emplace(c & ma, 0);
        rb.emplace(c & mb, 0);
    }
    int k = 0;
    for (auto& [key, v] : ra) v = k++;
    k = 0;
    for (auto& [key, v] : rb) v = k++;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ra.size()), static_cast<Eigen::Index>(rb.size()));
    for (std::size_t i = 0; i < b.size(); ++i) C(ra[b[i] & ma], rb[b[i] & mb]) = psi[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    double s = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double p2 = svd.singularValues()[i] * svd.singularValues()[i];
        if (p2 > 1e-300) s -= p2 * std::log(p2);
    }
    return s;
}

}  // namespace

TEST_CASE("diagonalization examples") {
    const auto H = build_hamiltonian(enumerate_sector(lat(1, 4), 2));
    const auto es = diagonalize(H);
    REQUIRE(es.energies.size() == 3);
    CHECK(es.energies[0] == doctest::Approx(-std::sqrt(2.0)));
    CHECK(std::abs(es.energies[1]) < 1e-14);
    CHECK(es.energies[2] == doctest::Approx(std::sqrt(2.0)));

    const auto b = enumerate_sector(lat(2, 3), 3);
    const auto snake = build_hamiltonian(b.subset(fragment_of(b, to_configuration(std::vector<int>{0, 4, 8}))));
    CHECK(diagonalize(snake).energies == std::vector<double>{0.0});
    CHECK_THROWS_AS(diagonalize(build_hamiltonian(b), 5), Error);
}

TEST_CASE("eigenvectors are orthonormal with small residuals") {
    const auto H = build_hamiltonian(enumerate_sector(lat(2, 4), 4));
    const auto es = diagonalize(H);
    const auto n = static_cast<Eigen::Index>(H.dim());
    CHECK((es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    const auto D = oracle::dense_h({2, 4, false}, H.basis().configs());
    const Eigen::MatrixXd R = D * es.vectors - es.vectors * Eigen::Map<const Eigen::VectorXd>(es.energies.data(), n).asDiagonal();
    CHECK(R.cwiseAbs().maxCoeff() < 1e-8 * D.norm());
}

TEST_CASE("spectra are symmetric under E -> -E") {
    for (int L : {3, 4}) {
        const Lattice l = lat(2, L);
        for (int M = 1; M <= (L * L + 1) / 2; ++M) {
            const auto b = enumerate_sector(l, M);
            const auto f = fragment_decomposition(b);
            for (const auto& fr : f.fragments) {
                const auto e = diagonalize(build_hamiltonian(b, f, fr.id)).energies;
                for (std::size_t k = 0; k < e.size(); ++k) CHECK(std::abs(e[k] + e[e.size() - 1 - k]) < 1e-10);
            }
        }
    }
}

TEST_CASE("entanglement examples") {
    const Lattice l = lat(2, 4);
    const auto b = enumerate_sector(l, 2);
    const auto cut = bottom_half_bipartition(l);
    std::vector<double> psi(b.size(), 0.0);
    psi[5] = 1.0;
    CHECK(entanglement_entropy(std::span<const double>(psi), b, cut) == doctest::Approx(0.0));

    // {0, 10} and {2, 8}: different on both halves
    std::fill(psi.begin(), psi.end(), 0.0);
    psi[*b.index_of(mask_of({0, 10}))] = 1.0 / std::sqrt(2.0);
    psi[*b.index_of(mask_of({2, 8}))] = 1.0 / std::sqrt(2.0);
    CHECK(entanglement_entropy(std::span<const double>(psi), b, cut) == doctest::Approx(std::log(2.0)));

    // {0, 10} and {0, 12}: same bottom half
    std::fill(psi.begin(), psi.end(), 0.0);
    psi[*b.index_of(mask_of({0, 10}))] = 1.0 / std::sqrt(2.0);
    psi[*b.index_of(mask_of({0, 12}))] = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(entanglement_entropy(std::span<const double>(psi), b, cut)) < 1e-14);
}

TEST_CASE("entropy agrees with SVD and is symmetric across the cut") {
    const Lattice l = lat(2, 4);
    const auto cut = bottom_half_bipartition(l);
    const Bipartition flipped{cut.set_b, cut.set_a};
    for (int M : {3, 4, 5}) {
        const auto b = enumerate_sector(l, M);
        const auto H = build_hamiltonian(b);
        const auto es = diagonalize(H);
        const EntanglementCut ec(b, cut);
        std::mt19937_64 rng(M);
        for (int trial = 0; trial < 35; ++trial) {
            const auto k = static_cast<Eigen::Index>(rng() % b.size());
            std::vector<double> v(es.vectors.col(k).data(), es.vectors.col(k).data() + b.size());
            const double s = ec.entropy(std::span<const double>(v));
            CHECK(std::abs(s - svd_entropy(v, b, cut)) < 1e-9);
            CHECK(std::abs(s - entanglement_entropy(std::span<const double>(v), b, flipped)) < 1e-9);
            CHECK(s <= std::log(static_cast<double>(std::min(ec.dim_a(), ec.dim_b()))) + 1e-12);
        }
    }
}

TEST_CASE("complex and real entropy agree") {
    const auto b = enumerate_sector(lat(1, 10), 3);
    const auto cut = left_half_bipartition(lat(1, 10));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> re(b.size());
    double n = 0.0;
    for (auto& x : re) {
        x = nd(rng);
        n += x * x;
    }
    for (auto& x : re) x /= std::sqrt(n);
    std::vector<cplx> ph(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) ph[i] = re[i] * cplx(0.6, 0.8);
    CHECK(entanglement_entropy(std::span<const cplx>(ph), b, cut) ==
          doctest::Approx(svd_entropy(re, b, cut)).epsilon(1e-12));
}

TEST_CASE("Edwards-Anderson parameters") {
    const auto b = enumerate_sector(lat(2, 4), 5);
    std::vector<double> psi(b.size(), 0.0);
    psi[17] = 1.0;
    const auto one = edwards_anderson(std::span<const double>(psi), b);
    CHECK(one.q_ea == doctest::Approx(1.0));
    CHECK(one.q == doctest::Approx(1.0));

    const auto c = enumerate_sector(lat(1, 6), 2);
    std::vector<double> u(c.size(), 1.0 / std::sqrt(static_cast<double>(c.size())));
    double sum = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            double e = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k)
                e += u[k] * u[k] * (2.0 * (c[k] >> i & 1) - 1) * (2.0 * (c[k] >> j & 1) - 1);
            sum += e * e;
        }
    const double g4 = std::pow(2.0 * 2.0 / 6.0 - 1.0, 4);
    const auto ea = edwards_anderson(std::span<const double>(u), c);
    CHECK(ea.q_ea == doctest::Approx(sum / 36.0).epsilon(1e-13));
    CHECK(ea.q == doctest::Approx((sum / 36.0 - g4) / (1.0 - g4)).epsilon(1e-13));
    CHECK(ea.q < 0.5);
}

TEST_CASE("structure factor examples") {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(structure_factor_inf_T(enumerate_sector(lat(2, 2), 2)) == doctest::Approx(pi2).epsilon(1e-12));
    CHECK(structure_factor_inf_T(enumerate_sector(lat(1, 2), 1)) == doctest::Approx(pi2).epsilon(1e-12));
    for (int L : {4, 6, 8})
        CHECK(std::abs(structure_factor_inf_T(enumerate_sector(lat(1, L, Boundary::periodic), L / 2)) - pi2) < 1e-10);
}

TEST_CASE("structure factor against a double loop") {
    for (auto bc : {Boundary::open, Boundary::periodic}) {
        const Lattice l = lat(2, 4, bc);
        for (int M = 1; M <= 8; ++M) {
            const auto b = enumerate_sector(l, M);
            if (b.size() == 0) break;
            double s = 0.0;
            for (auto c : b.configs())
                for (int i = 0; i < 16; ++i)
                    for (int j = 0; j < 16; ++j)
                        if ((c >> i & 1) && (c >> j & 1))
                            s += std::cos(std::numbers::pi * ((i % 4 - j % 4) + (i / 4 - j / 4)));
            const double pref = 2.0 * std::numbers::pi / 16.0;
            CHECK(structure_factor_inf_T(b) == doctest::Approx(pref * pref * s / b.size()).epsilon(1e-12));
        }
    }
}

TEST_CASE("scar scan on small sectors") {
    const auto chain = scar_scan(lat(1, 4), 2);
    REQUIRE(chain.records.size() == 3);
    CHECK(chain.records[0].energy == doctest::Approx(-std::sqrt(2.0)));
    CHECK(chain.records[2].energy == doctest::Approx(std::sqrt(2.0)));

    const auto sq = scar_scan(lat(2, 3), 3);
    CHECK(sq.records.size() == 22);
    CHECK_FALSE(sq.partial());
    int frozen = 0;
    for (const auto& r : sq.records) {
        if (r.fragment_size != 1) continue;
        ++frozen;
        CHECK(r.energy == 0.0);
        CHECK(std::abs(r.entropy) < 1e-10);
        CHECK(std::abs(r.q - 1.0) < 1e-10);
        CHECK_FALSE(r.is_largest_fragment);
    }
    CHECK(frozen == 2);
    CHECK(sq.max_residual < 1e-10);

    const auto capped = scar_scan(lat(2, 3), 3, 5);
    CHECK(capped.partial());
    CHECK(capped.records.size() == 2);
}
