"""Tangle, three-tangle and convex roofs for qubits and rebits."""

from .convex_roof import RoofConfig, RoofResult, roof_minimize
from .qubit_measures import mixed_tangle_2q, pure_tangle_2q, three_tangle
from .rebit_measures import mixed_tangle_2r, pure_tangle_2r, rebit_three_tangle_pure
from .states import COMPLEX, REAL, DensityMatrix, StateVector, catalog, validate
from .ubit import embed, joint_roof_tangle, relation_report

__version__ = "0.1.0"

__all__ = [
    "COMPLEX", "REAL", "DensityMatrix", "StateVector", "catalog", "validate",
    "pure_tangle_2q", "mixed_tangle_2q", "three_tangle",
    "pure_tangle_2r", "mixed_tangle_2r", "rebit_three_tangle_pure",
    "RoofConfig", "RoofResult", "roof_minimize",
    "embed", "joint_roof_tangle", "relation_report",
]
