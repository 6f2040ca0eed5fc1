"""Tensor products of simple SL2(F_p)-modules and the non-projective summand random walk."""

from .chain_analysis import (
    Classification,
    WeightFunction,
    build_transition,
    chain_report,
    classify_chain,
    mixing_bound,
    spectrum,
    stationary,
)
from .multiplicity_graph import build_adjacency, build_reduced, classify_graph
from .simulator import SimulationConfig, run
from .tensor_core import P, V, clebsch_gordan, composition_factors_of_tensor, divides, nm_string

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "P",
    "SimulationConfig",
    "V",
    "WeightFunction",
    "build_adjacency",
    "build_reduced",
    "build_transition",
    "chain_report",
    "classify_chain",
    "classify_graph",
    "clebsch_gordan",
    "composition_factors_of_tensor",
    "divides",
    "mixing_bound",
    "nm_string",
    "run",
    "spectrum",
    "stationary",
]
