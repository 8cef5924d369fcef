"""Hard-core lattice bosons with nearest-neighbor exclusion: state spaces,
fragments, Krylov dynamics, eigenstate diagnostics and the classical walk."""

import json as _json
import os as _os

from ._core import (
    BasisTable,
    FragmentDecomposition,
    Lattice,
    QhdError,
    SparseHamiltonian,
    bottom_half,
    build_fragment_hamiltonian,
    build_hamiltonian,
    classify_density,
    count_sector,
    delta_eta,
    diagonalize,
    edwards_anderson,
    entanglement_entropy,
    enumerate_sector,
    evolve,
    fragment_decomposition,
    hop_successors,
    is_valid,
    pattern,
    set_num_threads,
    simulate_ensemble,
    structure_factor_inf_T,
    time_map,
)

__version__ = "0.1.0"


def run_experiment(config, out_dir):
    """Run one named experiment; returns (exit_code, manifest dict)."""
    from ._core import run_experiment as _run

    code, manifest = _run(_json.dumps(config), _os.fspath(out_dir))
    return code, _json.loads(manifest)
