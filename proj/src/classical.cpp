#include "qhd/classical.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "qhd/parallel.hpp"

namespace qhd {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(~trajectory))) {}

Walker::Walker(const Lattice& lattice, std::span<const int> sites)
    : lattice_(&lattice), positions_(sites.begin(), sites.end()),
      occ_(occupation_of(sites, lattice.num_sites())) {
    if (!is_valid(sites, lattice))
        throw Error(ErrorKind::invalid_argument, "classical", "initial configuration is not valid");
}

bool Walker::step(TrajectoryRng& rng) {
    if (positions_.empty()) return false;
    const auto k = rng.below(static_cast<std::uint32_t>(positions_.size()));
    const auto dir = static_cast<int>(rng.below(static_cast<std::uint32_t>(lattice_->num_directions())));
    const int from = positions_[k];
    const int to = lattice_->step(from, dir);
    if (to < 0 || occ_[static_cast<std::size_t>(to)]) return false;
    for (int t : lattice_->exclusion_neighbors(to))
        if (t != from && occ_[static_cast<std::size_t>(t)]) return false;
    occ_[static_cast<std::size_t>(from)] = 0;
    occ_[static_cast<std::size_t>(to)] = 1;
    positions_[k] = to;
    return true;
}

Configuration rw_step(Configuration config, const Lattice& lattice, TrajectoryRng& rng) {
    const auto sites = occupied_sites(config);
    Walker w(lattice, sites);
    w.step(rng);
    return to_configuration(w.positions());
}

double TimeMap::operator()(std::uint64_t n_steps, int M) const {
    if (!per_particle) return scale * static_cast<double>(n_steps);
    if (M <= 0) throw Error(ErrorKind::invalid_argument, "classical", "time map needs M >= 1");
    return scale * static_cast<double>(n_steps) / M;
}

double time_map(std::uint64_t n_steps, int M) { return TimeMap{}(n_steps, M); }

EnsembleResult simulate_ensemble(std::span<const int> initial, const Lattice& lattice,
                                 const WalkSchedule& schedule, const TimeMap& map) {
    if (schedule.n_traj < 1) throw Error(ErrorKind::invalid_argument, "classical", "n_traj must be >= 1");
    for (std::size_t r = 1; r < schedule.record_steps.size(); ++r)
        if (schedule.record_steps[r] <= schedule.record_steps[r - 1])
            throw Error(ErrorKind::invalid_argument, "classical", "record steps must be strictly ascending");
    if (!is_valid(initial, lattice))
        throw Error(ErrorKind::invalid_argument, "classical", "initial configuration is not valid");

    const std::size_t n_sites = static_cast<std::size_t>(lattice.num_sites());
    const std::size_t n_rec = schedule.record_steps.size();
    const int M = static_cast<int>(initial.size());
    const SiteOccupation init = occupation_of(initial, lattice.num_sites());

    // Integer accumulators: per-site occupation counts and, per record, the
    // number k of particles sitting on initially occupied sites (sum, sum^2).
    struct Acc {
        std::vector<std::uint64_t> counts;
        std::vector<std::uint64_t> k_sum, k_sq;
    };
    std::vector<Acc> partial(static_cast<std::size_t>(std::max(1, num_threads())));
    for (auto& a : partial) {
        a.counts.assign(n_rec * n_sites, 0);
        a.k_sum.assign(n_rec, 0);
        a.k_sq.assign(n_rec, 0);
    }

    parallel_for(
        schedule.n_traj,
        [&](std::size_t begin, std::size_t end, std::size_t worker) {
            Acc& acc = partial[worker];
            for (std::size_t traj = begin; traj < end; ++traj) {
                TrajectoryRng rng(schedule.seed, traj);
                Walker w(lattice, initial);
                std::uint64_t done = 0;
                for (std::size_t r = 0; r < n_rec; ++r) {
                    for (; done < schedule.record_steps[r]; ++done) w.step(rng);
                    std::uint64_t k = 0;
                    for (int p : w.positions()) {
                        ++acc.counts[r * n_sites + static_cast<std::size_t>(p)];
                        k += init[static_cast<std::size_t>(p)];
                    }
                    acc.k_sum[r] += k;
                    acc.k_sq[r] += k * k;
                }
            }
        },
        1);

    EnsembleResult out;
    out.steps = schedule.record_steps;
    out.n_traj = schedule.n_traj;
    out.seed = schedule.seed;
    const double n = static_cast<double>(schedule.n_traj);
    const double eta = static_cast<double>(M) / static_cast<double>(n_sites);
    for (std::size_t r = 0; r < n_rec; ++r) {
        std::vector<double> occ(n_sites);
        std::uint64_t k_sum = 0, k_sq = 0;
        for (std::size_t i = 0; i < n_sites; ++i) {
            std::uint64_t c = 0;
            for (const auto& a : partial) c += a.counts[r * n_sites + i];
            occ[i] = static_cast<double>(c) / n;
        }
        for (const auto& a : partial) k_sum += a.k_sum[r], k_sq += a.k_sq[r];
        out.times.push_back(map(schedule.record_steps[r], M));
        out.G.push_back(autocorrelation(occ, init, eta));
        // G_traj = (4k - 4M + N)/N - g*, so var(G) = (4/N)^2 var(k).
        const double mean_k = static_cast<double>(k_sum) / n;
        const double var_k = n > 1 ? std::max(0.0, (static_cast<double>(k_sq) - n * mean_k * mean_k) / (n - 1)) : 0.0;
        const double scale = 4.0 / static_cast<double>(n_sites);
        out.G_stderr.push_back(scale * std::sqrt(var_k / n));
        out.occupations.push_back(std::move(occ));
    }
    return out;
}

double delta_eta(std::span<const double> occ, double eta) {
    if (occ.empty()) return 0.0;
    double s = 0.0;
    for (double v : occ) s += std::abs(v - eta);
    return s / static_cast<double>(occ.size());
}

ScalingTable finite_size_scan(std::span<const int> Ls, const std::string& pattern, const ScanTemplate& tmpl) {
    ScalingTable table;
    std::vector<double> xs, ys;
    for (const int L : Ls) {
        const Lattice lattice({2, L, Boundary::open, 1});
        const auto sites = pattern_library(pattern, lattice, 0);
        const int M = static_cast<int>(sites.size());
        const auto final_steps = static_cast<std::uint64_t>(
            std::ceil(tmpl.sweeps * M * static_cast<double>(lattice.num_sites())));
        WalkSchedule sched;
        sched.n_traj = tmpl.n_traj;
        sched.seed = splitmix64(tmpl.seed + static_cast<std::uint64_t>(L));
        const int nrec = std::max(1, tmpl.n_records);
        for (int r = 1; r <= nrec; ++r) {
            const auto s = final_steps * static_cast<std::uint64_t>(r) / static_cast<std::uint64_t>(nrec);
            if (sched.record_steps.empty() || s > sched.record_steps.back()) sched.record_steps.push_back(s);
        }
        const EnsembleResult res = simulate_ensemble(sites, lattice, sched);
        ScalingRow row;
        row.L = L;
        row.M = M;
        row.eta = static_cast<double>(M) / lattice.num_sites();
        row.final_steps = sched.record_steps.back();
        row.delta_eta = delta_eta(res.occupations.back(), row.eta);
        table.rows.push_back(row);
        xs.push_back(L);
        ys.push_back(row.delta_eta);
    }
    if (xs.size() >= 2) table.fit = loglog_fit(xs, ys, 0.0, 1e300);
    return table;
}

}  // namespace qhd
