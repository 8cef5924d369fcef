#include "doctest.h"
#include "oracles.hpp"

#include "qhd/hamiltonian.hpp"
#include "qhd/parallel.hpp"

#include <random>

using namespace qhd;

namespace {

Lattice lat(int dim, int L, Boundary b = Boundary::open) { return build_lattice({dim, L, b, 1}); }

Eigen::MatrixXd to_dense(const SparseHamiltonian& H) {
    const auto n = static_cast<Eigen::Index>(H.dim());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (auto c : H.row(static_cast<std::size_t>(r))) D(r, c) += H.J();
    return D;
}

}  // namespace

TEST_CASE("chain L=4 M=2 matrix") {
    const auto H = build_hamiltonian(enumerate_sector(lat(1, 4), 2));
    Eigen::MatrixXd expect(3, 3);
    expect << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    CHECK(to_dense(H) == expect);
    const auto w = H.apply(std::vector<double>{1, 0, 0});
    CHECK(w == std::vector<double>{0, 1, 0});
    CHECK(H.apply(std::vector<double>(3, 0.0)) == std::vector<double>(3, 0.0));
    CHECK(H.dump_coo() == "0 1 1\n1 0 1\n1 2 1\n2 1 1\n");
}

TEST_CASE("snake fragment is a 1x1 zero matrix") {
    const auto b = enumerate_sector(lat(2, 3), 3);
    const auto f = fragment_decomposition(b);
    const auto snake = *b.index_of(to_configuration(std::vector<int>{0, 4, 8}));
    const auto H = build_hamiltonian(b, f, f.labels[snake]);
    CHECK(H.dim() == 1);
    CHECK(H.nnz() == 0);
    CHECK_THROWS_AS(build_hamiltonian(b, f, 1'000'000), Error);
}

TEST_CASE("sparse operator equals the brute-force dense matrix") {
    struct Case { int dim, L; Boundary b; double J; };
    for (const Case cs : {Case{2, 3, Boundary::open, 1.0}, Case{2, 4, Boundary::open, 0.7},
                          Case{2, 4, Boundary::periodic, 1.0}, Case{1, 12, Boundary::open, 1.0},
                          Case{1, 10, Boundary::periodic, 2.0}}) {
        const Lattice l = lat(cs.dim, cs.L, cs.b);
        const oracle::Grid g{cs.dim, cs.L, cs.b == Boundary::periodic};
        for (int M = 1; M <= l.num_sites() / 2; ++M) {
            const auto b = enumerate_sector(l, M);
            if (b.size() == 0 || b.size() > 2000) continue;
            const auto H = build_hamiltonian(b, cs.J);
            const Eigen::MatrixXd D = to_dense(H);
            CHECK(D == oracle::dense_h(g, b.configs(), cs.J));
            CHECK(D.trace() == 0.0);
            CHECK(H.max_degree() <= static_cast<std::size_t>(M * 2 * cs.dim));
        }
    }
}

TEST_CASE("fragment operator is the restricted block") {
    const auto b = enumerate_sector(lat(2, 4), 5);
    const auto f = fragment_decomposition(b);
    const auto full = to_dense(build_hamiltonian(b));
    for (const auto& fr : f.fragments) {
        const auto H = build_hamiltonian(b, f, fr.id);
        const auto mem = f.members(fr.id);
        const auto D = to_dense(H);
        for (std::size_t r = 0; r < mem.size(); ++r)
            for (std::size_t c = 0; c < mem.size(); ++c) CHECK(D(r, c) == full(mem[r], mem[c]));
    }
}

TEST_CASE("apply is symmetric and thread-count independent") {
    const auto H = build_hamiltonian(enumerate_sector(lat(2, 5), 7));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::vector<cplx> u(H.dim()), v(H.dim());
    for (auto& z : u) z = {nd(rng), nd(rng)};
    for (auto& z : v) z = {nd(rng), nd(rng)};
    set_num_threads(1);
    const auto hv = H.apply(std::span<const cplx>(v));
    const auto hu = H.apply(std::span<const cplx>(u));
    cplx a{}, b{};
    double scale = 0.0;
    for (std::size_t i = 0; i < H.dim(); ++i) {
        a += std::conj(u[i]) * hv[i];
        b += std::conj(hu[i]) * v[i];
        scale += std::abs(u[i]) * std::abs(hv[i]);
    }
    CHECK(std::abs(a - b) < 1e-12 * scale);
    set_num_threads(4);
    CHECK(H.apply(std::span<const cplx>(v)) == hv);
    set_num_threads(1);
    std::vector<cplx> shortv(3);
    CHECK_THROWS_AS(H.apply(std::span<const cplx>(shortv)), Error);
}
