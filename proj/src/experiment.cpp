#include "qhd/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qhd/classical.hpp"
#include "qhd/dynamics.hpp"
#include "qhd/io.hpp"
#include "qhd/parallel.hpp"
#include "qhd/spectral.hpp"
#include "qhd/statespace.hpp"

#ifndef QHD_VERSION
#define QHD_VERSION "dev"
#endif

namespace qhd {

using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::config, "experiments", what); }

ExperimentKind parse_kind(const std::string& s) {
    static const std::pair<const char*, ExperimentKind> table[] = {
        {"enumerate", ExperimentKind::enumerate},   {"fragments", ExperimentKind::fragments},
        {"statics", ExperimentKind::statics},       {"melt1d", ExperimentKind::melt1d},
        {"defect2d", ExperimentKind::defect2d},     {"spectrum", ExperimentKind::spectrum},
        {"classical-scaling", ExperimentKind::classical_scaling},
    };
    for (const auto& [name, kind] : table)
        if (s == name) return kind;
    config_error("unknown experiment '" + s + "'");
}

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        config_error("key '" + key + "' has the wrong type");
    }
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 1) return {hi};
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    out.back() = hi;
    return out;
}

// Record steps for mapped times t: round(t * M / scale), deduplicated.
std::vector<std::uint64_t> steps_for_times(std::span<const double> times, int M, const TimeMap& map) {
    std::vector<std::uint64_t> steps;
    const double per = map.per_particle ? static_cast<double>(M) / map.scale : 1.0 / map.scale;
    for (double t : times) {
        const auto s = static_cast<std::uint64_t>(std::llround(t * per));
        if (steps.empty() || s > steps.back()) steps.push_back(s);
    }
    return steps;
}

TimeMap time_map_for(const ExperimentConfig& c) {
    TimeMap m;
    m.per_particle = c.time_rule == "per-particle";
    return m;
}

std::vector<int> initial_sites(const ExperimentConfig& c, const Lattice& lattice) {
    std::vector<int> sites;
    if (!c.sites.empty()) {
        sites = c.sites;
        std::sort(sites.begin(), sites.end());
        if (!is_valid(sites, lattice))
            throw Error(ErrorKind::unrealizable_pattern, "experiments", "explicit sites are not a valid configuration");
        if (c.M && static_cast<int>(sites.size()) != *c.M)
            throw Error(ErrorKind::unrealizable_pattern, "experiments", "explicit sites do not match M");
    } else {
        sites = pattern_library(c.pattern, lattice, c.M.value_or(0));
    }
    return sites;
}

std::string sites_string(Configuration c) {
    std::string s;
    for (int site : occupied_sites(c)) {
        if (!s.empty()) s += ' ';
        s += std::to_string(site);
    }
    return s;
}

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::string> files;
    json results = json::object();
    std::vector<std::string> warnings;

    std::filesystem::path file(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

void write_occupations(Outputs& out, const std::string& name, std::span<const double> times,
                       const std::vector<std::vector<double>>& occ, const std::vector<std::uint64_t>* steps) {
    CsvWriter w = steps ? CsvWriter(out.file(name), {"time", "n_steps", "site", "value"})
                        : CsvWriter(out.file(name), {"time", "site", "value"});
    for (std::size_t t = 0; t < times.size(); ++t) {
        for (std::size_t i = 0; i < occ[t].size(); ++i) {
            w.cell(times[t]);
            if (steps) w.cell((*steps)[t]);
            w.cell(static_cast<std::int64_t>(i)).cell(occ[t][i]);
            w.end_row();
        }
    }
}

void write_quantum_series(Outputs& out, const ObservableSeries& s) {
    write_occupations(out, "occupations.csv", s.times, s.occupations, nullptr);
    CsvWriter w(out.file("series.csv"), {"time", "G", "norm", "energy"});
    for (std::size_t t = 0; t < s.times.size(); ++t) w.cell(s.times[t]).cell(s.G[t]).cell(s.norm[t]).cell(s.energy[t]).end_row();
}

void write_classical_series(Outputs& out, const EnsembleResult& r, const std::string& prefix) {
    write_occupations(out, prefix + "occupations.csv", r.times, r.occupations, &r.steps);
    CsvWriter w(out.file(prefix + "series.csv"), {"time", "n_steps", "G", "G_stderr"});
    for (std::size_t t = 0; t < r.times.size(); ++t)
        w.cell(r.times[t]).cell(r.steps[t]).cell(r.G[t]).cell(r.G_stderr[t]).end_row();
}

EvolveOptions evolve_options(const ExperimentConfig& c) {
    EvolveOptions o;
    o.tol = c.tol;
    o.krylov_dim = c.krylov_dim;
    o.dt_initial = c.dt_initial;
    o.dt_min = c.dt_min;
    o.dt_max = c.dt_max;
    return o;
}

// --- experiments -----------------------------------------------------------

void run_enumerate(const ExperimentConfig& c, Outputs& out) {
    const Lattice lattice(c.lattice);
    CsvWriter counts(out.file("counts.csv"), {"M", "count", "count_enumerated"});
    std::vector<int> sectors;
    if (c.M) sectors.push_back(*c.M);
    else for (int m = 0; m <= lattice.num_sites(); ++m) sectors.push_back(m);
    std::uint64_t total = 0;
    for (int m : sectors) {
        const std::uint64_t n = count_sector(lattice, m);
        if (!c.M && n == 0) break;
        const BasisTable basis = enumerate_sector(lattice, m, c.memory_cap);
        counts.cell(m).cell(n).cell(static_cast<std::uint64_t>(basis.size())).end_row();
        total += n;
        if (c.M) {
            CsvWriter w(out.file("basis.csv"), {"ordinal", "config", "sites"});
            for (std::size_t i = 0; i < basis.size(); ++i)
                w.cell(static_cast<std::uint64_t>(i)).cell(basis[i]).cell(sites_string(basis[i])).end_row();
        }
    }
    out.results["total"] = total;
}

void run_fragments(const ExperimentConfig& c, Outputs& out) {
    const Lattice lattice(c.lattice);
    const BasisTable basis = enumerate_sector(lattice, *c.M, c.memory_cap);
    const FragmentDecomposition fd = fragment_decomposition(basis);
    {
        CsvWriter w(out.file("fragments.csv"), {"fragment_id", "size"});
        for (const auto& f : fd.fragments) w.cell(static_cast<std::uint64_t>(f.id)).cell(static_cast<std::uint64_t>(f.size)).end_row();
    }
    const DensityVerdict v = classify_density(lattice.L(), *c.M, lattice.dim());
    out.results["N"] = basis.size();
    out.results["n_fragments"] = fd.n_fragments();
    out.results["largest_fragment_size"] = fd.largest_size();
    out.results["ratio_max"] = fd.ratio_max();
    out.results["thresholds"] = {{"weak_M", v.weak_threshold}, {"strong_M", v.strong_threshold}};
    out.results["classify_density"] = to_string(v.cls);
    out.results["needs_empirical_check"] = v.needs_empirical_check;
    if (c.dump_operator) {
        const SparseHamiltonian H = build_hamiltonian(basis, fd, fd.largest_id(), c.J);
        std::ofstream(out.file("operator.coo"), std::ios::binary) << H.dump_coo();
    }
}

void run_statics(const ExperimentConfig& c, Outputs& out) {
    CsvWriter w(out.file("statics.csv"), {"L", "M", "eta", "c_inf", "n_states"});
    for (int L : c.Ls) {
        LatticeSpec spec = c.lattice;
        spec.L = L;
        const Lattice lattice(spec);
        for (int m = 1; m <= lattice.num_sites(); ++m) {
            if (c.M && m != *c.M) continue;
            if (count_sector(lattice, m) == 0) break;
            const BasisTable basis = enumerate_sector(lattice, m, c.memory_cap);
            w.cell(L).cell(m).cell(basis.density()).cell(structure_factor_inf_T(basis))
                .cell(static_cast<std::uint64_t>(basis.size())).end_row();
        }
    }
}

void run_melt1d(const ExperimentConfig& c, Outputs& out) {
    const Lattice lattice(c.lattice);
    const auto sites = initial_sites(c, lattice);
    const int M = static_cast<int>(sites.size());
    const BasisTable basis = enumerate_sector(lattice, M, c.memory_cap);
    const Configuration init = to_configuration(sites);
    const SparseHamiltonian H = build_hamiltonian(basis, c.J);
    const ObservableSeries s = adaptive_evolve(H, basis_state(basis, init), c.t_grid, evolve_options(c), init);
    write_quantum_series(out, s);

    std::vector<double> radius;
    double edge = 0.0;
    for (const auto& occ : s.occupations) {
        radius.push_back(rms_radius(occ, M));
        edge = std::max({edge, occ.front(), occ.back()});
    }
    const PowerFit qfit = loglog_fit(s.times, radius, c.fit_lo, c.fit_hi);
    const int margin = std::min(sites.front(), lattice.L() - 1 - sites.back());
    if (!c.t_grid.empty() && margin < kGuardVelocity * std::abs(c.J) * c.t_grid.back())
        out.warnings.push_back("crystal margin is below the 2J guard distance for t_max");
    if (edge > kEdgeOccupationLimit) out.warnings.push_back("boundary contact: edge occupation " + format_double(edge));

    json results = {{"quantum_exponent", qfit.slope}, {"quantum_fit_r2", qfit.r2},
                    {"accepted_steps", s.accepted_steps}, {"max_edge_occupation", edge}};

    CsvWriter rw(out.file("radius.csv"), {"time", "radius"});
    for (std::size_t t = 0; t < s.times.size(); ++t) rw.cell(s.times[t]).cell(radius[t]).end_row();

    if (c.n_traj > 0) {
        const TimeMap map = time_map_for(c);
        WalkSchedule sched{c.n_traj, steps_for_times(c.t_grid, M, map), c.seed};
        const EnsembleResult r = simulate_ensemble(sites, lattice, sched, map);
        write_classical_series(out, r, "classical_");
        std::vector<double> cr;
        for (const auto& occ : r.occupations) cr.push_back(rms_radius(occ, M));
        CsvWriter cw(out.file("classical_radius.csv"), {"time", "n_steps", "radius"});
        for (std::size_t t = 0; t < r.times.size(); ++t) cw.cell(r.times[t]).cell(r.steps[t]).cell(cr[t]).end_row();
        const PowerFit cfit = loglog_fit(r.times, cr, c.fit_lo, c.fit_hi);
        results["classical_exponent"] = cfit.slope;
        results["classical_fit_r2"] = cfit.r2;
    }
    out.results = results;
}

void run_defect2d(const ExperimentConfig& c, Outputs& out) {
    const Lattice lattice(c.lattice);
    const auto sites = initial_sites(c, lattice);
    const int M = static_cast<int>(sites.size());
    const BasisTable sector = enumerate_sector(lattice, M, c.memory_cap);
    const Configuration init = to_configuration(sites);
    const auto members = fragment_of(sector, init);
    const SparseHamiltonian H = build_hamiltonian(sector.subset(members), c.J);
    const ObservableSeries s = adaptive_evolve(H, basis_state(H.basis(), init), c.t_grid, evolve_options(c), init);
    write_quantum_series(out, s);

    const TimeMap map = time_map_for(c);
    std::vector<double> ctimes = c.t_grid;
    if (c.plateau_time > ctimes.back()) {
        const double dt = ctimes.size() > 1 ? ctimes.back() - ctimes[ctimes.size() - 2] : ctimes.back();
        for (double t = ctimes.back() + dt; t <= c.plateau_time + 1e-9; t += std::max(dt, 1e-9)) ctimes.push_back(t);
    }
    WalkSchedule sched{c.n_traj, steps_for_times(ctimes, M, map), c.seed};
    const EnsembleResult r = simulate_ensemble(sites, lattice, sched, map);
    write_classical_series(out, r, "classical_");

    // Paired G(t): each quantum time against the classical record with the
    // same step count.
    auto record_for = [&](double t) -> std::optional<std::size_t> {
        const auto target = static_cast<std::uint64_t>(std::llround(t * (map.per_particle ? M / map.scale : 1.0 / map.scale)));
        const auto it = std::lower_bound(r.steps.begin(), r.steps.end(), target);
        if (it == r.steps.end()) return std::nullopt;
        return static_cast<std::size_t>(it - r.steps.begin());
    };
    CsvWriter gw(out.file("g_compare.csv"), {"time", "G_quantum", "n_steps", "time_classical", "G_classical"});
    for (std::size_t t = 0; t < s.times.size(); ++t) {
        const auto k = record_for(s.times[t]);
        if (!k) continue;
        gw.cell(s.times[t]).cell(s.G[t]).cell(r.steps[*k]).cell(r.times[*k]).cell(r.G[*k]).end_row();
    }

    // Plateau: mean classical G over the last half of the records beyond t_max.
    json results = {{"fragment_size", H.dim()}, {"sector_size", sector.size()},
                    {"quantum_G_final", s.G.back()}, {"accepted_steps", s.accepted_steps},
                    {"rejected_trials", s.rejected_trials}};
    const double t_final = c.t_grid.back();
    if (const auto k = record_for(t_final)) {
        results["classical_G_at_t_max"] = r.G[*k];
        results["classical_G_stderr_at_t_max"] = r.G_stderr[*k];
    }
    if (c.plateau_time > t_final) {
        std::size_t first = r.times.size() / 2;
        double sum = 0.0;
        for (std::size_t k = first; k < r.times.size(); ++k) sum += r.G[k];
        results["classical_G_plateau"] = sum / static_cast<double>(r.times.size() - first);
    }
    out.results = results;
}

void run_spectrum(const ExperimentConfig& c, Outputs& out) {
    const Lattice lattice(c.lattice);
    const ScarScan scan = scar_scan(lattice, *c.M, c.dense_cap, c.J, c.memory_cap);
    CsvWriter w(out.file("spectrum.csv"), {"fragment_id", "fragment_size", "is_largest_fragment", "energy",
                                           "energy_density", "entropy", "q_ea", "q_norm"});
    for (const auto& rec : scan.records)
        w.cell(static_cast<std::uint64_t>(rec.fragment_id)).cell(static_cast<std::uint64_t>(rec.fragment_size))
            .cell(rec.is_largest_fragment).cell(rec.energy).cell(rec.energy_density).cell(rec.entropy)
            .cell(rec.q_ea).cell(rec.q).end_row();
    std::size_t scars = 0;
    const double smax = scan.max_entropy();
    for (const auto& rec : scan.records) scars += looks_like_scar(rec, smax) ? 1 : 0;
    out.results = {{"sector_size", scan.sector_size}, {"n_fragments", scan.n_fragments},
                   {"largest_fragment_id", scan.largest_fragment_id}, {"records", scan.records.size()},
                   {"max_entropy", smax}, {"flagged_scars", scars}, {"partial", scan.partial()},
                   {"skipped_fragments", scan.skipped_fragments}, {"max_residual", scan.max_residual}};
    if (scan.partial()) out.warnings.push_back("fragments above the dense cap were skipped");
}

void run_classical_scaling(const ExperimentConfig& c, Outputs& out) {
    ScanTemplate tmpl;
    tmpl.n_traj = c.n_traj;
    tmpl.sweeps = c.sweeps;
    tmpl.n_records = c.n_records;
    tmpl.seed = c.seed;
    const ScalingTable table = finite_size_scan(c.Ls, c.pattern, tmpl);
    CsvWriter w(out.file("scaling.csv"), {"L", "M", "eta", "n_steps", "delta_eta"});
    for (const auto& row : table.rows) w.cell(row.L).cell(row.M).cell(row.eta).cell(row.final_steps).cell(row.delta_eta).end_row();
    if (table.fit.points >= 2)
        out.results = {{"slope", table.fit.slope}, {"r2", table.fit.r2}, {"intercept", table.fit.intercept}};
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::filesystem::path& dir, const json& manifest) {
    std::ofstream(dir / "manifest.json", std::ios::binary | std::ios::trunc) << manifest.dump(2) << '\n';
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::enumerate: return "enumerate";
        case ExperimentKind::fragments: return "fragments";
        case ExperimentKind::statics: return "statics";
        case ExperimentKind::melt1d: return "melt1d";
        case ExperimentKind::defect2d: return "defect2d";
        case ExperimentKind::spectrum: return "spectrum";
        case ExperimentKind::classical_scaling: return "classical-scaling";
    }
    return "unknown";
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) config_error("config must be an object");
    static const std::set<std::string> known = {
        "experiment", "lattice", "M", "Ls", "pattern", "sites", "t_grid", "t_max", "n_times", "J", "tol",
        "krylov_dim", "dt_initial", "dt_min", "dt_max", "fit_lo", "fit_hi", "n_traj", "seed", "time_rule",
        "plateau_time", "sweeps", "n_records", "dense_cap", "memory_cap", "dump_operator", "threads"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) config_error("unknown key '" + key + "'");
    if (!j.contains("experiment")) config_error("missing key 'experiment'");

    ExperimentConfig c;
    c.experiment = parse_kind(get_as<std::string>(j.at("experiment"), "experiment"));

    // Per-experiment defaults.
    switch (c.experiment) {
        case ExperimentKind::melt1d:
            c.lattice = {1, 41, Boundary::open, 1};
            c.M = 5;
            c.pattern = "crystal-1d";
            c.t_grid = linspace(0.0, 10.0, 21);
            c.n_traj = 100'000;
            break;
        case ExperimentKind::defect2d:
            c.lattice = {2, 6, Boundary::open, 1};
            c.M = 9;
            c.pattern = "block-crystal(3)";
            c.t_grid = linspace(0.0, 200.0, 41);
            c.krylov_dim = 30;
            c.plateau_time = 1000.0;
            break;
        case ExperimentKind::statics:
            c.lattice = {2, 3, Boundary::open, 1};
            c.Ls = {3, 4, 5};
            break;
        case ExperimentKind::classical_scaling:
            c.lattice = {2, 4, Boundary::open, 1};
            c.Ls = {4, 6, 8, 10, 12};
            c.pattern = "bottom-half-packed";
            break;
        default: break;
    }

    if (j.contains("lattice")) {
        const json& l = j.at("lattice");
        if (!l.is_object()) config_error("'lattice' must be an object");
        for (const auto& [key, _] : l.items())
            if (key != "dim" && key != "L" && key != "boundary" && key != "exclusion_radius")
                config_error("unknown key 'lattice." + key + "'");
        if (l.contains("dim")) c.lattice.dim = get_as<int>(l.at("dim"), "lattice.dim");
        if (l.contains("L")) c.lattice.L = get_as<int>(l.at("L"), "lattice.L");
        if (l.contains("exclusion_radius"))
            c.lattice.exclusion_radius = get_as<int>(l.at("exclusion_radius"), "lattice.exclusion_radius");
        if (l.contains("boundary")) {
            const auto b = get_as<std::string>(l.at("boundary"), "lattice.boundary");
            if (b == "open") c.lattice.boundary = Boundary::open;
            else if (b == "periodic") c.lattice.boundary = Boundary::periodic;
            else config_error("lattice.boundary must be 'open' or 'periodic'");
        }
    }
    if (j.contains("M")) {
        if (j.at("M").is_null()) c.M.reset();
        else c.M = get_as<int>(j.at("M"), "M");
    }
    if (j.contains("Ls")) c.Ls = get_as<std::vector<int>>(j.at("Ls"), "Ls");
    if (j.contains("pattern")) c.pattern = get_as<std::string>(j.at("pattern"), "pattern");
    if (j.contains("sites")) {
        c.sites = get_as<std::vector<int>>(j.at("sites"), "sites");
        if (!j.contains("pattern")) c.pattern.clear();
    }
    if (j.contains("t_grid")) {
        c.t_grid = get_as<std::vector<double>>(j.at("t_grid"), "t_grid");
    } else if (j.contains("t_max")) {
        const double t_max = get_as<double>(j.at("t_max"), "t_max");
        const int n = j.contains("n_times") ? get_as<int>(j.at("n_times"), "n_times") : 21;
        if (n < 1) config_error("n_times must be >= 1");
        c.t_grid = linspace(0.0, t_max, n);
    }
    auto num = [&](const char* key, auto& field) {
        if (j.contains(key)) field = get_as<std::decay_t<decltype(field)>>(j.at(key), key);
    };
    num("J", c.J);
    num("tol", c.tol);
    num("krylov_dim", c.krylov_dim);
    num("dt_initial", c.dt_initial);
    num("dt_min", c.dt_min);
    num("dt_max", c.dt_max);
    num("fit_lo", c.fit_lo);
    num("fit_hi", c.fit_hi);
    num("n_traj", c.n_traj);
    num("seed", c.seed);
    num("time_rule", c.time_rule);
    num("plateau_time", c.plateau_time);
    num("sweeps", c.sweeps);
    num("n_records", c.n_records);
    num("dense_cap", c.dense_cap);
    num("memory_cap", c.memory_cap);
    num("dump_operator", c.dump_operator);
    num("threads", c.threads);

    // Validation.
    try {
        (void)Lattice(c.lattice);
    } catch (const Error& e) {
        config_error(std::string("invalid lattice: ") + e.what());
    }
    for (std::size_t i = 0; i < c.t_grid.size(); ++i)
        if (c.t_grid[i] < 0.0 || (i > 0 && c.t_grid[i] < c.t_grid[i - 1]))
            config_error("t_grid must be ascending and non-negative");
    if (!(c.tol > 0.0)) config_error("tol must be positive");
    if (c.krylov_dim < 2) config_error("krylov_dim must be >= 2");
    if (!(c.dt_min > 0.0 && c.dt_min <= c.dt_max)) config_error("need 0 < dt_min <= dt_max");
    if (c.time_rule != "per-particle" && c.time_rule != "per-step")
        config_error("time_rule must be 'per-particle' or 'per-step'");
    if (c.threads < 1) config_error("threads must be >= 1");
    if (c.M && (*c.M < 0 || *c.M > 64)) config_error("M out of range");
    for (int L : c.Ls)
        if (L < 2) config_error("every entry of Ls must be >= 2");

    const bool needs_M = c.experiment == ExperimentKind::fragments || c.experiment == ExperimentKind::spectrum;
    if (needs_M && !c.M) config_error(std::string(to_string(c.experiment)) + " needs M");
    const bool dynamic = c.experiment == ExperimentKind::melt1d || c.experiment == ExperimentKind::defect2d;
    if (dynamic) {
        if (c.t_grid.empty()) config_error("dynamics experiments need a time grid");
        if (c.pattern.empty() && c.sites.empty()) config_error("dynamics experiments need a pattern or sites");
        if (c.experiment == ExperimentKind::melt1d && c.lattice.dim != 1) config_error("melt1d needs dim = 1");
        if (c.experiment == ExperimentKind::defect2d && c.lattice.dim != 2) config_error("defect2d needs dim = 2");
        if (c.experiment == ExperimentKind::defect2d && c.n_traj < 1) config_error("defect2d needs n_traj >= 1");
        // Pattern realizability is checked up front so a bad config writes nothing.
        try {
            (void)initial_sites(c, Lattice(c.lattice));
        } catch (const Error& e) {
            config_error(e.what());
        }
    }
    if (c.experiment == ExperimentKind::statics || c.experiment == ExperimentKind::classical_scaling) {
        if (c.Ls.empty()) config_error("Ls must not be empty");
    }
    if (c.experiment == ExperimentKind::classical_scaling) {
        if (c.n_traj < 1) config_error("n_traj must be >= 1");
        if (c.n_records < 1) config_error("n_records must be >= 1");
        for (int L : c.Ls) {
            try {
                (void)pattern_library(c.pattern, Lattice({2, L, Boundary::open, 1}), 0);
            } catch (const Error& e) {
                config_error(e.what());
            }
        }
    }
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = to_string(experiment);
    j["lattice"] = {{"dim", lattice.dim}, {"L", lattice.L},
                    {"boundary", lattice.boundary == Boundary::open ? "open" : "periodic"},
                    {"exclusion_radius", lattice.exclusion_radius}};
    j["M"] = M ? json(*M) : json(nullptr);
    j["Ls"] = Ls;
    j["pattern"] = pattern;
    j["sites"] = sites;
    j["t_grid"] = t_grid;
    j["J"] = J;
    j["tol"] = tol;
    j["krylov_dim"] = krylov_dim;
    j["dt_initial"] = dt_initial;
    j["dt_min"] = dt_min;
    j["dt_max"] = dt_max;
    j["fit_lo"] = fit_lo;
    j["fit_hi"] = fit_hi;
    j["n_traj"] = n_traj;
    j["seed"] = seed;
    j["time_rule"] = time_rule;
    j["plateau_time"] = plateau_time;
    j["sweeps"] = sweeps;
    j["n_records"] = n_records;
    j["dense_cap"] = dense_cap;
    j["memory_cap"] = memory_cap;
    j["dump_operator"] = dump_operator;
    j["threads"] = threads;
    return j;
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "experiments", "cannot read config " + path.string());
    if (path.extension() == ".json") {
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            config_error(std::string("malformed JSON: ") + e.what());
        }
        if (j.contains("manifest_version") && j.contains("config")) return j.at("config");
        return j;
    }

    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        config_error(std::string("malformed INI: ") + e.what());
    }
    static const std::set<std::string> list_keys = {"Ls", "sites", "t_grid"};
    auto scalar = [](const std::string& raw) -> json {
        try {
            return json::parse(raw);
        } catch (const json::exception&) {
            return raw;
        }
    };
    auto value = [&](const std::string& key, const std::string& raw) -> json {
        if (!list_keys.count(key)) return scalar(raw);
        json arr = json::array();
        std::stringstream ss(raw);
        for (std::string item; std::getline(ss, item, ',');) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) arr.push_back(scalar(item));
        }
        return arr;
    };
    json j = json::object();
    for (const auto& [section, body] : tree) {
        if (body.empty()) {  // key at top level, before any section
            j[section] = value(section, body.data());
            continue;
        }
        json& target = section == "lattice" ? j["lattice"] : j;
        for (const auto& [key, leaf] : body) target[key] = value(key, leaf.data());
    }
    return j;
}

RunOutcome run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    set_num_threads(config.threads);

    RunOutcome outcome;
    json& m = outcome.manifest;
    m["manifest_version"] = kManifestVersion;
    m["code_version"] = QHD_VERSION;
    m["config"] = config.to_json();
    m["decisions"] = {
        {"entropy_log_base", "e"},
        {"time_map", config.time_rule == "per-particle" ? "Jt = 2*pi*n_steps/M" : "Jt = 2*pi*n_steps"},
        {"rejected_moves_advance_time", true},
        {"krylov_dim", config.krylov_dim},
        {"krylov_error_estimate", "||y_m - y_(m-1)||_2"},
        {"dt_bounds", {config.dt_min, config.dt_max}},
        {"dt_initial", config.dt_initial},
        {"hop_sign", "+J"},
        {"edwards_anderson_prefactor", "N_sites^-2"},
        {"odd_L_bottom_half", "rows y < floor(L/2)"},
        {"memory_cap", config.memory_cap},
        {"dense_cap", config.dense_cap},
        {"classical_kernel", "uniform particle, uniform axis direction, reject on overlap or edge; v1"},
    };
    m["started_at"] = utc_now();
    m["status"] = "running";

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::io, "experiments", "cannot create output directory " + out_dir.string());
    write_manifest(out_dir, m);

    Outputs out{out_dir, {}, json::object(), {}};
    try {
        switch (config.experiment) {
            case ExperimentKind::enumerate: run_enumerate(config, out); break;
            case ExperimentKind::fragments: run_fragments(config, out); break;
            case ExperimentKind::statics: run_statics(config, out); break;
            case ExperimentKind::melt1d: run_melt1d(config, out); break;
            case ExperimentKind::defect2d: run_defect2d(config, out); break;
            case ExperimentKind::spectrum: run_spectrum(config, out); break;
            case ExperimentKind::classical_scaling: run_classical_scaling(config, out); break;
        }
        m["status"] = "ok";
    } catch (const Error& e) {
        m["status"] = "failed";
        m["error"] = {{"kind", to_string(e.kind())}, {"module", e.module()}, {"message", e.what()}};
        outcome.exit_code = 2;
    } catch (const std::exception& e) {
        m["status"] = "failed";
        m["error"] = {{"kind", "internal"}, {"module", "experiments"}, {"message", e.what()}};
        outcome.exit_code = 3;
    }

    json files = json::object();
    for (const auto& f : out.files)
        if (std::filesystem::exists(out_dir / f)) files[f] = sha256_file(out_dir / f);
    m["outputs"] = files;
    m["results"] = out.results;
    m["warnings"] = out.warnings;
    m["finished_at"] = utc_now();
    m["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out_dir, m);
    return outcome;
}

}  // namespace qhd
