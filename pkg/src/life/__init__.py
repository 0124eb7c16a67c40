"""Analysis of linear-in-flux metabolic network models.

Structural graph queries, exact stoichiometric algebra, extreme pathways,
equilibrium classification and ODE simulation.
"""

from .document import load_bundled, parse_document, serialize_document
from .linalg import RationalMatrix
from .network import (
    CONSTANT,
    LINEAR,
    SINK,
    SOURCE,
    ConstantIntake,
    Edge,
    Hill,
    Linear,
    Network,
    NetworkError,
)
from .stoichiometry import FluxAssignment, MetaboliteState

__version__ = "0.1.0"

__all__ = [
    "RationalMatrix", "CONSTANT", "LINEAR", "SINK", "SOURCE", "ConstantIntake", "Edge", "Hill",
    "Linear", "Network", "NetworkError", "FluxAssignment", "MetaboliteState",
    "load_bundled", "parse_document", "serialize_document",
]
