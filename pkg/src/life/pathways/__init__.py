"""Fixed-state analysis: extreme pathways, cone membership and max-flow feasibility."""

from .extreme import (
    EXCRETION,
    INTAKE,
    INTERNAL,
    BasisReport,
    Pathway,
    PositiveBasis,
    TableauError,
    extreme_pathways,
    implicit_zero_edges,
    nullspace_basis,
    sample_nonnegative_nullspace,
    verify_positive_basis,
)
from .flow import (
    UNBOUNDED,
    Feasibility,
    FlowProblem,
    MaxFlowResult,
    feasible_flow_exists,
    intakes_reach_excretion,
    max_flow,
)
from .lp import ConeMembership, cone_membership

__all__ = [
    "EXCRETION", "INTAKE", "INTERNAL", "BasisReport", "Pathway", "PositiveBasis", "TableauError",
    "extreme_pathways", "implicit_zero_edges", "nullspace_basis", "sample_nonnegative_nullspace",
    "verify_positive_basis", "UNBOUNDED", "Feasibility", "FlowProblem", "MaxFlowResult",
    "feasible_flow_exists", "intakes_reach_excretion", "max_flow", "ConeMembership", "cone_membership",
]
