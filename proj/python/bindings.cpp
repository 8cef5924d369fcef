#include <algorithm>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qhd/classical.hpp"
#include "qhd/dynamics.hpp"
#include "qhd/experiment.hpp"
#include "qhd/parallel.hpp"
#include "qhd/patterns.hpp"
#include "qhd/spectral.hpp"

namespace py = pybind11;
using namespace qhd;

namespace {

Boundary boundary_of(const std::string& s) {
    if (s == "open") return Boundary::open;
    if (s == "periodic") return Boundary::periodic;
    throw Error(ErrorKind::invalid_argument, "python", "boundary must be 'open' or 'periodic'");
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size(), m = rows.empty() ? 0 : rows[0].size();
    py::array_t<double> out({n, m});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) a(i, j) = rows[i][j];
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hard-core lattice bosons with nearest-neighbor exclusion";

    static py::exception<Error> qhd_error(m, "QhdError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(qhd_error, (std::string(to_string(e.kind())) + " [" + e.module() + "]: " + e.what()).c_str());
        }
    });

    m.def("set_num_threads", &set_num_threads);

    py::class_<Lattice>(m, "Lattice")
        .def(py::init([](int dim, int L, const std::string& boundary, int exclusion_radius) {
                 return build_lattice({dim, L, boundary_of(boundary), exclusion_radius});
             }),
             py::arg("dim"), py::arg("L"), py::arg("boundary") = "open", py::arg("exclusion_radius") = 1)
        .def_property_readonly("dim", &Lattice::dim)
        .def_property_readonly("L", &Lattice::L)
        .def_property_readonly("periodic", &Lattice::periodic)
        .def_property_readonly("num_sites", &Lattice::num_sites)
        .def("coord", [](const Lattice& l, int s) { return std::make_pair(l.coord(s).x, l.coord(s).y); })
        .def("hop_neighbors", [](const Lattice& l, int s) {
            auto h = l.hop_neighbors(s);
            return std::vector<int>(h.begin(), h.end());
        })
        .def("exclusion_neighbors", [](const Lattice& l, int s) {
            auto h = l.exclusion_neighbors(s);
            return std::vector<int>(h.begin(), h.end());
        });

    m.def("is_valid", [](const std::vector<int>& sites, const Lattice& l) { return is_valid(std::span<const int>(sites), l); });
    m.def("count_sector", &count_sector, py::arg("lattice"), py::arg("M"));

    py::class_<BasisTable>(m, "BasisTable")
        .def_property_readonly("M", &BasisTable::M)
        .def_property_readonly("density", &BasisTable::density)
        .def("__len__", &BasisTable::size)
        .def_property_readonly("configs", [](const BasisTable& b) { return to_array(b.configs()); })
        .def("sites", [](const BasisTable& b, std::size_t i) { return occupied_sites(b[i]); })
        .def("index_of", [](const BasisTable& b, const std::vector<int>& sites) { return b.index_of(to_configuration(sites)); });

    m.def("enumerate_sector", &enumerate_sector, py::arg("lattice"), py::arg("M"),
          py::arg("memory_cap") = kDefaultMemoryCap);
    m.def("hop_successors", [](const std::vector<int>& sites, const Lattice& l) {
        std::vector<std::vector<int>> out;
        for (auto c : hop_successors(to_configuration(sites), l)) out.push_back(occupied_sites(c));
        return out;
    });

    py::class_<FragmentDecomposition>(m, "FragmentDecomposition")
        .def_property_readonly("labels", [](const FragmentDecomposition& f) { return to_array(f.labels); })
        .def_property_readonly("fragments", [](const FragmentDecomposition& f) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto& fr : f.fragments) out.emplace_back(fr.id, fr.size);
            return out;
        })
        .def_property_readonly("n_fragments", &FragmentDecomposition::n_fragments)
        .def_property_readonly("largest_id", &FragmentDecomposition::largest_id)
        .def_property_readonly("largest_size", &FragmentDecomposition::largest_size)
        .def_property_readonly("ratio_max", &FragmentDecomposition::ratio_max)
        .def("members", &FragmentDecomposition::members);

    m.def("fragment_decomposition", &fragment_decomposition);
    m.def("classify_density", [](int L, int M, int dim) {
        const auto v = classify_density(L, M, dim);
        return py::dict(py::arg("class") = to_string(v.cls), py::arg("needs_empirical_check") = v.needs_empirical_check,
                        py::arg("weak_threshold") = v.weak_threshold, py::arg("strong_threshold") = v.strong_threshold);
    });

    py::class_<SparseHamiltonian>(m, "SparseHamiltonian")
        .def_property_readonly("dim", &SparseHamiltonian::dim)
        .def_property_readonly("nnz", &SparseHamiltonian::nnz)
        .def_property_readonly("J", &SparseHamiltonian::J)
        .def_property_readonly("basis", &SparseHamiltonian::basis, py::return_value_policy::reference_internal)
        .def("apply", [](const SparseHamiltonian& H, py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> v) {
            std::vector<cplx> in(v.data(), v.data() + v.size());
            return to_array(H.apply(std::span<const cplx>(in)));
        })
        .def("dump_coo", &SparseHamiltonian::dump_coo);

    m.def("build_hamiltonian", [](const BasisTable& b, double J) { return build_hamiltonian(b, J); },
          py::arg("basis"), py::arg("J") = 1.0);
    m.def("build_fragment_hamiltonian",
          [](const BasisTable& b, const FragmentDecomposition& f, std::size_t id, double J) { return build_hamiltonian(b, f, id, J); },
          py::arg("basis"), py::arg("fragments"), py::arg("fragment_id"), py::arg("J") = 1.0);

    m.def("evolve",
          [](const SparseHamiltonian& H, const std::vector<int>& initial, const std::vector<double>& t_grid, double tol,
             int krylov_dim) {
              EvolveOptions opt;
              opt.tol = tol;
              opt.krylov_dim = krylov_dim;
              const auto c = to_configuration(initial);
              const auto s = adaptive_evolve(H, basis_state(H.basis(), c), t_grid, opt, c);
              return py::dict(py::arg("times") = to_array(s.times), py::arg("occupations") = to_matrix(s.occupations),
                              py::arg("G") = to_array(s.G), py::arg("norm") = to_array(s.norm),
                              py::arg("energy") = to_array(s.energy), py::arg("accepted_steps") = s.accepted_steps);
          },
          py::arg("H"), py::arg("initial"), py::arg("t_grid"), py::arg("tol") = 1e-8, py::arg("krylov_dim") = 7);

    m.def("diagonalize", [](const SparseHamiltonian& H, std::size_t cap) {
        auto es = diagonalize(H, cap);
        return std::make_pair(to_array(es.energies), es.vectors);
    }, py::arg("H"), py::arg("dense_cap") = kDefaultDenseCap);

    m.def("entanglement_entropy",
          [](const std::vector<double>& psi, const BasisTable& b, const std::vector<int>& set_a) {
              std::vector<int> set_b;
              for (int s = 0; s < b.lattice().num_sites(); ++s)
                  if (std::find(set_a.begin(), set_a.end(), s) == set_a.end()) set_b.push_back(s);
              return entanglement_entropy(std::span<const double>(psi), b, Bipartition{set_a, set_b});
          });
    m.def("bottom_half", [](const Lattice& l) { return bottom_half_bipartition(l).set_a; });
    m.def("edwards_anderson", [](const std::vector<double>& psi, const BasisTable& b) {
        const auto ea = edwards_anderson(std::span<const double>(psi), b);
        return std::make_pair(ea.q_ea, ea.q);
    });
    m.def("structure_factor_inf_T", &structure_factor_inf_T);

    m.def("pattern", &pattern_library, py::arg("name"), py::arg("lattice"), py::arg("M") = 0);

    m.def("time_map", &time_map);
    m.def("simulate_ensemble",
          [](const std::vector<int>& initial, const Lattice& l, std::uint64_t n_traj,
             const std::vector<std::uint64_t>& record_steps, std::uint64_t seed) {
              const auto r = simulate_ensemble(initial, l, WalkSchedule{n_traj, record_steps, seed});
              return py::dict(py::arg("steps") = to_array(r.steps), py::arg("times") = to_array(r.times),
                              py::arg("occupations") = to_matrix(r.occupations), py::arg("G") = to_array(r.G),
                              py::arg("G_stderr") = to_array(r.G_stderr));
          },
          py::arg("initial"), py::arg("lattice"), py::arg("n_traj"), py::arg("record_steps"), py::arg("seed") = 0);
    m.def("delta_eta", [](const std::vector<double>& occ, double eta) { return delta_eta(occ, eta); });

    m.def("run_experiment",
          [](const std::string& config_json, const std::filesystem::path& out_dir) {
              const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
              py::gil_scoped_release release;
              const auto outcome = run(cfg, out_dir);
              return std::make_pair(outcome.exit_code, outcome.manifest.dump());
          },
          py::arg("config_json"), py::arg("out_dir"));
}
