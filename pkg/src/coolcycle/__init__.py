"""coolcycle: find viable laser-cooling schemes in molecular line lists.

Typical use::

    from coolcycle import load_dataset, build_graph, SearchParams, sweep

    dataset = load_dataset("mol.states.bz2", ["mol.trans.bz2"], schema)
    graph = build_graph(dataset)
    schemes = sweep(graph, SearchParams(g_max=4, lambda_min_nm=320,
                                        lambda_max_nm=1500, mass_u=15.0))
"""

from .constants import CONSTANTS, PhysicalConstants
from .exomol import (
    LevelDataset,
    RawState,
    RawTransition,
    StatesSchema,
    load_dataset,
    parse_states,
    parse_trans,
)
from .graph import DecayChannel, LevelGraph, MolecularState, build_graph
from .rates import (
    closure,
    cooling_and_survival_times,
    double_closure,
    double_inverse_rate,
    double_lifetime,
    double_n_cool,
    initial_temperature,
    inverse_scattering_rate,
    mean_photon_momentum,
    n_cool,
    n_ten_percent,
)
from .search import (
    CoolingScheme,
    SchemeFigures,
    SearchParams,
    assemble_double,
    assemble_single,
    enumerate_double_schemes,
    enumerate_single_schemes,
    find_reachable,
    find_reachable_excited,
    find_starting_states,
    sweep,
)
from .snapshot import load_graph, save_graph

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "PhysicalConstants",
    "LevelDataset",
    "RawState",
    "RawTransition",
    "StatesSchema",
    "load_dataset",
    "parse_states",
    "parse_trans",
    "DecayChannel",
    "LevelGraph",
    "MolecularState",
    "build_graph",
    "closure",
    "cooling_and_survival_times",
    "double_closure",
    "double_inverse_rate",
    "double_lifetime",
    "double_n_cool",
    "initial_temperature",
    "inverse_scattering_rate",
    "mean_photon_momentum",
    "n_cool",
    "n_ten_percent",
    "CoolingScheme",
    "SchemeFigures",
    "SearchParams",
    "assemble_double",
    "assemble_single",
    "enumerate_double_schemes",
    "enumerate_single_schemes",
    "find_reachable",
    "find_reachable_excited",
    "find_starting_states",
    "sweep",
    "load_graph",
    "save_graph",
    "__version__",
]
