// qhd: command-line front end for the quantum hard-disk simulator.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "qhd/error.hpp"
#include "qhd/experiment.hpp"

namespace {

void print_error(const std::string& kind, const std::string& module, const std::string& message) {
    nlohmann::json err = {{"error", {{"kind", kind}, {"module", module}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum hard disks on 1D chains and 2D square lattices"};

    std::string experiment;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed, dense_cap, memory_cap;
    std::optional<int> threads, dim, L, M;
    std::optional<std::string> boundary, pattern;

    app.add_option("experiment", experiment,
                   "enumerate | fragments | statics | melt1d | defect2d | spectrum | classical-scaling");
    app.add_option("--config", config_path, "JSON or INI config file (a run manifest also works)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Random seed (overrides config)");
    app.add_option("--threads", threads, "Worker threads");
    app.add_option("--dense-cap", dense_cap, "Largest fragment diagonalized densely");
    app.add_option("--memory-cap", memory_cap, "Largest sector enumerated");
    app.add_option("--dim", dim, "Lattice dimension (1 or 2)");
    app.add_option("--L", L, "Linear extent");
    app.add_option("--M", M, "Particle number");
    app.add_option("--boundary", boundary, "open | periodic");
    app.add_option("--pattern", pattern, "Named initial pattern");

    CLI11_PARSE(app, argc, argv);

    nlohmann::json cfg = nlohmann::json::object();
    try {
        if (!config_path.empty()) cfg = qhd::load_config_file(config_path);
        if (!experiment.empty()) cfg["experiment"] = experiment;
        if (seed) cfg["seed"] = *seed;
        if (threads) cfg["threads"] = *threads;
        if (dense_cap) cfg["dense_cap"] = *dense_cap;
        if (memory_cap) cfg["memory_cap"] = *memory_cap;
        if (M) cfg["M"] = *M;
        if (pattern) cfg["pattern"] = *pattern;
        if (dim || L || boundary) {
            nlohmann::json& lat = cfg["lattice"];
            if (!lat.is_object()) lat = nlohmann::json::object();
            if (dim) lat["dim"] = *dim;
            if (L) lat["L"] = *L;
            if (boundary) lat["boundary"] = *boundary;
        }
        const qhd::ExperimentConfig config = qhd::ExperimentConfig::from_json(cfg);

        std::filesystem::path out = out_dir;
        if (out.empty()) {
            const char* root = std::getenv("QHD_OUTPUT_ROOT");
            out = std::filesystem::path(root ? root : "qhd-out") / qhd::to_string(config.experiment);
        }
        const qhd::RunOutcome outcome = qhd::run(config, out);
        if (outcome.exit_code != 0) {
            std::cerr << outcome.manifest["error"].dump() << '\n';
            return outcome.exit_code;
        }
        std::cout << outcome.manifest["results"].dump(2) << '\n';
        for (const auto& w : outcome.manifest["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
        return 0;
    } catch (const qhd::Error& e) {
        print_error(qhd::to_string(e.kind()), e.module(), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("internal", "cli", e.what());
        return 3;
    }
}
