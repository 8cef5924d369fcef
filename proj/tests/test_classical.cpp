#include "doctest.h"

#include "qhd/classical.hpp"
#include "qhd/parallel.hpp"
#include "qhd/patterns.hpp"

#include <cmath>
#include <numbers>

using namespace qhd;

namespace {

Lattice lat(int dim, int L, Boundary b = Boundary::open) { return build_lattice({dim, L, b, 1}); }

}  // namespace

TEST_CASE("time map") {
    CHECK(time_map(0, 5) == 0.0);
    CHECK(time_map(5, 5) == doctest::Approx(2.0 * std::numbers::pi));
    CHECK(time_map(597, 5) == doctest::Approx(750.19).epsilon(1e-4));
    CHECK(time_map(2984, 25) == doctest::Approx(750.0).epsilon(1e-3));
    CHECK_THROWS_AS(time_map(3, 0), Error);
    CHECK(TimeMap{2.0 * std::numbers::pi, false}(5, 5) == doctest::Approx(10.0 * std::numbers::pi));
}

TEST_CASE("random streams are reproducible and distinct") {
    TrajectoryRng a(11, 3), b(11, 3), c(11, 4), d(12, 3);
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    CHECK(x != d.next());
    TrajectoryRng e(1, 0);
    for (int i = 0; i < 1000; ++i) CHECK(e.below(7) < 7u);
}

TEST_CASE("snake rejects every move") {
    const Lattice l = lat(2, 3);
    const std::vector<int> snake{0, 4, 8};
    Walker w(l, snake);
    TrajectoryRng rng(5, 0);
    for (int i = 0; i < 1000; ++i) CHECK_FALSE(w.step(rng));
    CHECK(w.positions() == snake);
    const auto c = to_configuration(snake);
    for (int i = 0; i < 100; ++i) CHECK(rw_step(c, l, rng) == c);
}

TEST_CASE("one step on a two-site chain") {
    const Lattice l = lat(1, 2);
    TrajectoryRng rng(9, 0);
    int moved = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) moved += rw_step(Configuration{1}, l, rng) == Configuration{2};
    const double p = static_cast<double>(moved) / n;
    CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / n));

    const std::vector<int> start{0};
    WalkSchedule s{n, {0, 1}, 17};
    const auto r = simulate_ensemble(start, l, s);
    CHECK(std::abs(r.occupations[1][0] - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("walks preserve validity and stay in their fragment") {
    const Lattice l = lat(2, 4);
    const auto b = enumerate_sector(l, 5);
    const auto f = fragment_decomposition(b);
    TrajectoryRng rng(3, 1);
    for (std::size_t start = 0; start < b.size(); start += 97) {
        Configuration c = b[start];
        for (int i = 0; i < 2000; ++i) {
            c = rw_step(c, l, rng);
            REQUIRE(is_valid(c, l));
        }
        CHECK(f.labels[*b.index_of(c)] == f.labels[start]);
    }
    Walker w(l, occupied_sites(b[0]));
    for (int i = 0; i < 100000; ++i) {
        w.step(rng);
        if (i % 1000 == 0) CHECK(is_valid(std::span<const int>(w.positions()), l));
    }
}

TEST_CASE("ensemble invariants") {
    const Lattice l = lat(2, 6);
    const auto init = block_crystal(l, 3);
    WalkSchedule s{2000, {0, 10, 100, 1000}, 42};
    const auto r = simulate_ensemble(init, l, s);
    const double eta = 9.0 / 36.0;
    CHECK(r.G[0] == doctest::Approx(1.0 - std::pow(2 * eta - 1, 2)));
    CHECK(r.G_stderr[0] == 0.0);
    for (const auto& occ : r.occupations) {
        double sum = 0.0;
        for (double n : occ) {
            CHECK(n >= 0.0);
            CHECK(n <= 1.0);
            sum += n;
        }
        CHECK(sum == doctest::Approx(9.0).epsilon(1e-14));
    }
    CHECK(r.times[2] == doctest::Approx(2.0 * std::numbers::pi * 100 / 9));
    CHECK(r.G.back() < r.G.front());

    const std::vector<int> snake{0, 4, 8};
    const auto frozen = simulate_ensemble(snake, lat(2, 3), WalkSchedule{50, {0, 5, 500}, 1});
    for (double g : frozen.G) CHECK(g == doctest::Approx(1.0 - std::pow(2.0 / 3.0 - 1.0, 2)));

    CHECK_THROWS_AS(simulate_ensemble(init, l, WalkSchedule{10, {5, 5}, 1}), Error);
    CHECK_THROWS_AS(simulate_ensemble(std::vector<int>{0, 1}, l, WalkSchedule{10, {5}, 1}), Error);
}

TEST_CASE("ensembles do not depend on the thread count") {
    const Lattice l = lat(2, 6);
    const auto init = block_crystal(l, 3);
    WalkSchedule s{3000, {0, 50, 500}, 7};
    set_num_threads(1);
    const auto a = simulate_ensemble(init, l, s);
    set_num_threads(3);
    const auto b = simulate_ensemble(init, l, s);
    set_num_threads(1);
    CHECK(a.occupations == b.occupations);
    CHECK(a.G == b.G);
    CHECK(a.G_stderr == b.G_stderr);
}

TEST_CASE("delta eta") {
    const std::vector<double> flat(10, 0.3);
    CHECK(delta_eta(flat, 0.3) == doctest::Approx(0.0));
    std::vector<double> basis(10, 0.0);
    basis[1] = basis[4] = basis[7] = 1.0;
    CHECK(delta_eta(basis, 0.3) == doctest::Approx(2 * 0.3 * 0.7));
}

TEST_CASE("finite-size scan") {
    ScanTemplate t;
    t.n_traj = 500;
    t.seed = 3;
    const std::vector<int> one{6};
    const auto single = finite_size_scan(one, "bottom-half-packed", t);
    REQUIRE(single.rows.size() == 1);
    CHECK(single.fit.points == 0);
    const auto& row = single.rows[0];
    CHECK(row.L == 6);
    CHECK(row.delta_eta > 0.0);
    CHECK(row.delta_eta < 2 * row.eta * (1 - row.eta));

    // more trajectories stay within Monte Carlo error
    ScanTemplate t2 = t;
    t2.n_traj = 4000;
    const auto a = finite_size_scan(one, "bottom-half-packed", t2);
    t2.n_traj = 8000;
    const auto b = finite_size_scan(one, "bottom-half-packed", t2);
    CHECK(std::abs(a.rows[0].delta_eta - b.rows[0].delta_eta) < 0.1 * a.rows[0].delta_eta + 0.01);
}
