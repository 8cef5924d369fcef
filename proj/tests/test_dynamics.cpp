#include "doctest.h"
#include "oracles.hpp"

#include "qhd/dynamics.hpp"
#include "qhd/patterns.hpp"

#include <cmath>

using namespace qhd;

namespace {

Lattice lat(int dim, int L, Boundary b = Boundary::open) { return build_lattice({dim, L, b, 1}); }

// exp(-i H t) psi0 by dense eigendecomposition.
Eigen::VectorXcd dense_evolve(const Eigen::MatrixXd& H, const Eigen::VectorXcd& psi0, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::MatrixXcd V = es.eigenvectors().cast<cplx>();
    Eigen::VectorXcd c = V.adjoint() * psi0;
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(cplx(0.0, -es.eigenvalues()[k] * t));
    return V * c;
}

Eigen::VectorXcd unit(std::size_t n, std::size_t i) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    v[static_cast<Eigen::Index>(i)] = 1.0;
    return v;
}

double max_dev(const std::vector<cplx>& a, const Eigen::VectorXcd& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[static_cast<Eigen::Index>(i)]));
    return d;
}

}  // namespace

TEST_CASE("basis states") {
    const auto b = enumerate_sector(lat(1, 4), 2);
    const auto psi = basis_state(b, 0b0101);
    CHECK(psi.amplitudes == std::vector<cplx>{1.0, 0.0, 0.0});
    CHECK_THROWS_AS(basis_state(b, 0b0011), Error);
}

TEST_CASE("frozen snake does not move") {
    const auto b = enumerate_sector(lat(2, 3), 3);
    const auto snake = to_configuration(std::vector<int>{0, 4, 8});
    const auto H = build_hamiltonian(b.subset(fragment_of(b, snake)));
    const auto psi = basis_state(H.basis(), snake);
    const auto step = krylov_step(H, psi, 3.7);
    CHECK(step.state.amplitudes == psi.amplitudes);
    const std::vector<double> grid{0, 1, 5, 50};
    const auto s = adaptive_evolve(H, psi, grid);
    for (double g : s.G) CHECK(g == doctest::Approx(1.0 - std::pow(2.0 / 3.0 - 1.0, 2)).epsilon(1e-14));
}

TEST_CASE("Krylov step against the dense exponential") {
    const auto b = enumerate_sector(lat(1, 4), 2);
    const auto H = build_hamiltonian(b);
    const oracle::Grid g{1, 4, false};
    const auto D = oracle::dense_h(g, b.configs());
    const auto step = krylov_step(H, basis_state(b, 0b0101), 0.05);
    const auto exact = dense_evolve(D, unit(3, 0), 0.05);
    CHECK(max_dev(step.state.amplitudes, exact) < 1e-12);
    CHECK(step.krylov_dim == 3);
    std::vector<double> occ_exact(4, 0.0);
    for (std::size_t c = 0; c < 3; ++c)
        for (int s : occupied_sites(b[c])) occ_exact[s] += std::norm(exact[static_cast<Eigen::Index>(c)]);
    const auto occ = occupations(step.state, b);
    for (int s = 0; s < 4; ++s) CHECK(std::abs(occ[s] - occ_exact[s]) < 1e-8);
}

TEST_CASE("full Krylov space is exact") {
    const auto b = enumerate_sector(lat(2, 3), 2);
    const auto H = build_hamiltonian(b);
    const auto D = oracle::dense_h({2, 3, false}, b.configs());
    const auto step = krylov_step(H, basis_state(b, b[4]), 0.3, static_cast<int>(b.size()));
    CHECK(max_dev(step.state.amplitudes, dense_evolve(D, unit(b.size(), 4), 0.3)) < 1e-12);
}

TEST_CASE("adaptive evolution matches the dense oracle on a chain") {
    const auto b = enumerate_sector(lat(1, 20), 2);
    CHECK(b.size() <= 190);
    const auto H = build_hamiltonian(b);
    const auto D = oracle::dense_h({1, 20, false}, b.configs());
    const auto init = to_configuration(std::vector<int>{8, 11});
    const auto i0 = *b.index_of(init);
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
    double worst = 0.0;
    std::size_t k = 0;
    EvolveOptions opt;
    opt.on_record = [&](const StateVector& psi) {
        worst = std::max(worst, max_dev(psi.amplitudes, dense_evolve(D, unit(b.size(), i0), grid[k++])));
    };
    const auto s = adaptive_evolve(H, basis_state(b, init), grid, opt);
    CHECK(k == grid.size());
    CHECK(worst < 1e-7);
    CHECK(s.times == grid);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        CHECK(std::abs(s.norm[t] - 1.0) < 1e-10);
        CHECK(std::abs(s.energy[t] - s.energy[0]) < 1e-8);
        double sum = 0.0;
        for (double n : s.occupations[t]) sum += n;
        CHECK(std::abs(sum - 2.0) < 1e-10);
    }
}

TEST_CASE("initial record and particle conservation") {
    const Lattice l = lat(1, 12);
    const auto b = enumerate_sector(l, 3);
    const auto init = to_configuration(std::vector<int>{2, 4, 6});
    const auto H = build_hamiltonian(b);
    const double eta = 3.0 / 12.0;
    const std::vector<double> zero{0.0};
    const auto s0 = adaptive_evolve(H, basis_state(b, init), zero);
    CHECK(s0.G[0] == doctest::Approx(1.0 - std::pow(2 * eta - 1, 2)));
    CHECK(s0.occupations[0] == std::vector<double>{0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0});
    const std::vector<double> grid{0, 1, 2, 4, 8};
    const auto s = adaptive_evolve(H, basis_state(b, init), grid);
    for (const auto& occ : s.occupations) {
        double sum = 0.0;
        for (double n : occ) sum += n;
        CHECK(std::abs(sum - 3.0) < 1e-10);
    }
    CHECK_THROWS_AS(adaptive_evolve(H, basis_state(b, init), std::vector<double>{1, 0}), Error);
}

TEST_CASE("occupation and autocorrelation examples") {
    const auto b = enumerate_sector(lat(1, 4), 2);
    StateVector psi{{1.0, 0.0, 0.0}, 0.0};
    CHECK(occupations(psi, b) == std::vector<double>{1, 0, 1, 0});
    const double r = 1.0 / std::sqrt(2.0);
    psi.amplitudes = {r, 0.0, r};
    for (double n : occupations(psi, b)) CHECK(n == doctest::Approx(0.5));
    const std::vector<double> flat(4, 0.5);
    CHECK(autocorrelation(flat, Configuration{0b0101}, 0.5) == doctest::Approx(0.0));
    const std::vector<double> occ0{1, 0, 1, 0};
    CHECK(autocorrelation(occ0, Configuration{0b0101}, 0.5) == doctest::Approx(1.0));
    const std::vector<double> eta(10, 0.3);
    CHECK(std::abs(autocorrelation(eta, Configuration{0b0000100101}, 0.3)) < 1e-15);
}

TEST_CASE("single particle follows the Bessel profile") {
    const Lattice l = lat(1, 61);
    const auto b = enumerate_sector(l, 1);
    const auto H = build_hamiltonian(b);
    const std::vector<double> grid{0.5, 1.5, 3.0};
    const auto s = adaptive_evolve(H, basis_state(b, site_bit(30)), grid);
    for (std::size_t t = 0; t < grid.size(); ++t)
        for (int x = 0; x < 61; ++x) {
            const double j = std::cyl_bessel_j(static_cast<double>(std::abs(x - 30)), 2.0 * grid[t]);
            CHECK(std::abs(s.occupations[t][x] - j * j) < 1e-6);
        }
}

TEST_CASE("symmetric crystals spread symmetrically") {
    const Lattice l = lat(1, 21);
    const auto sites = crystal_1d(l, 3);
    const auto b = enumerate_sector(l, 3);
    const auto H = build_hamiltonian(b);
    const std::vector<double> grid{1, 2, 3};
    const auto s = adaptive_evolve(H, basis_state(b, to_configuration(sites)), grid);
    for (const auto& occ : s.occupations)
        for (int x = 0; x < 21; ++x) CHECK(std::abs(occ[x] - occ[20 - x]) < 1e-9);
}

TEST_CASE("non-convergence at the minimum step is reported") {
    const auto b = enumerate_sector(lat(1, 12), 3);
    const auto H = build_hamiltonian(b);
    EvolveOptions opt;
    opt.tol = 1e-300;
    opt.dt_min = 0.05;
    opt.dt_initial = 0.1;
    try {
        adaptive_evolve(H, basis_state(b, b[0]), std::vector<double>{1.0}, opt);
        FAIL("expected non-convergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::non_convergence);
    }
}

TEST_CASE("radius and power-law fit") {
    const std::vector<int> sites{16, 18, 20, 22, 24};
    std::vector<double> occ(41, 0.0);
    for (int s : sites) occ[s] = 1.0;
    CHECK(rms_radius(occ, 5) == doctest::Approx(std::sqrt(8.0)));
    std::vector<double> x, y;
    for (int i = 1; i <= 20; ++i) {
        x.push_back(i);
        y.push_back(3.0 * std::pow(i, 0.75));
    }
    const auto fit = loglog_fit(x, y, 2.0, 10.0);
    CHECK(fit.points == 9);
    CHECK(fit.slope == doctest::Approx(0.75));
    CHECK(fit.r2 == doctest::Approx(1.0));
}

TEST_CASE("1D melt on a short run") {
    std::vector<double> grid{0, 0.5, 1, 1.5, 2};
    const auto r = melt1d_experiment(41, 5, 2, grid, 0.5, 2.0);
    CHECK(r.initial_sites == std::vector<int>{16, 18, 20, 22, 24});
    CHECK(r.radius[0] == doctest::Approx(std::sqrt(8.0)));
    CHECK(r.radius.back() > r.radius.front());
    CHECK(r.warnings.empty());
}
