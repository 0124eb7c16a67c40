"""Max-flow over the extended graph and the feasible-intake test built on it."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from ..linalg import Vector, to_fraction
from ..network import Network, NetworkError, SINK, SOURCE, has_path
from ..stoichiometry import DimensionError, as_state, edge_gains


class _Unbounded:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"


#: Capacity marker for edges without a finite bound.
UNBOUNDED = _Unbounded()

Capacity = Union[Fraction, _Unbounded]


@dataclass(frozen=True)
class FlowProblem:
    """Capacities per edge in network edge order; SOURCE to SINK is implied."""

    network: Network
    capacities: tuple

    def __post_init__(self):
        if len(self.capacities) != self.network.m:
            raise DimensionError(f"{len(self.capacities)} capacities for {self.network.m} edges")
        caps = []
        for c in self.capacities:
            if c is UNBOUNDED or c is None:
                caps.append(UNBOUNDED)
                continue
            c = to_fraction(c)
            if c < 0:
                raise ValueError("capacities must be nonnegative")
            caps.append(c)
        object.__setattr__(self, "capacities", tuple(caps))

    @classmethod
    def with_intakes(cls, net: Network, intake_caps: Mapping[str, object] | Sequence) -> FlowProblem:
        """Finite capacities on intake edges, unbounded everywhere else."""
        if not isinstance(intake_caps, Mapping):
            values = list(intake_caps)
            if len(values) != len(net.intake_vertices):
                raise DimensionError(f"{len(values)} intake values for {len(net.intake_vertices)} intakes")
            intake_caps = dict(zip(net.intake_vertices, values))
        unknown = set(intake_caps) - set(net.intake_vertices)
        if unknown:
            raise NetworkError(f"no intake edge into {sorted(unknown)}")
        caps = []
        for e in net.edges:
            if e.is_intake:
                if e.head not in intake_caps:
                    raise DimensionError(f"no capacity for intake {e.label}")
                caps.append(intake_caps[e.head])
            else:
                caps.append(UNBOUNDED)
        return cls(net, tuple(caps))


@dataclass(frozen=True)
class MaxFlowResult:
    value: Fraction
    flow: Vector
    cut: tuple[int, ...]
    cut_capacity: Fraction


def max_flow(problem: FlowProblem) -> MaxFlowResult:
    """Edmonds-Karp with exact rational capacities.

    Unbounded capacities become ``sum(finite capacities) + 1``, which no
    SOURCE-SINK cut of finite capacity can reach.
    """
    net = problem.network
    if not net.intake_vertices or not net.excretion_vertices:
        raise NetworkError("max-flow needs at least one intake and one excretion edge")
    finite = sum((c for c in problem.capacities if c is not UNBOUNDED), Fraction(0))
    big = finite + 1
    caps = [big if c is UNBOUNDED else c for c in problem.capacities]

    # residual arcs: 2j forward along edge j, 2j+1 its reverse
    nodes = (SOURCE, *net.vertices, SINK)
    adj: dict[str, list[int]] = {v: [] for v in nodes}
    head = []
    residual = []
    for j, e in enumerate(net.edges):
        adj[e.tail].append(2 * j)
        head.append(e.head)
        residual.append(caps[j])
        adj[e.head].append(2 * j + 1)
        head.append(e.tail)
        residual.append(Fraction(0))

    value = Fraction(0)
    while True:
        parent: dict[str, int] = {}
        queue = deque([SOURCE])
        seen = {SOURCE}
        while queue and SINK not in seen:
            u = queue.popleft()
            for a in adj[u]:
                w = head[a]
                if residual[a] > 0 and w not in seen:
                    seen.add(w)
                    parent[w] = a
                    queue.append(w)
        if SINK not in seen:
            break
        path = []
        v = SINK
        while v != SOURCE:
            a = parent[v]
            path.append(a)
            v = head[a ^ 1]
        push = min(residual[a] for a in path)
        for a in path:
            residual[a] -= push
            residual[a ^ 1] += push
        value += push

    flow = tuple(residual[2 * j + 1] for j in range(net.m))
    cut = tuple(j for j, e in enumerate(net.edges) if e.tail in seen and e.head not in seen)
    cut_capacity = sum((caps[j] for j in cut), Fraction(0))
    return MaxFlowResult(value, flow, cut, cut_capacity)


@dataclass(frozen=True)
class Feasibility:
    """Whether prescribed intakes admit a nonnegative steady flux at a fixed state.

    ``witness`` is a flux vector ``f >= 0`` with ``S(x) f = 0`` and the
    prescribed intake entries; it is ``None`` when infeasible.
    """

    feasible: bool
    max_flow: MaxFlowResult
    demand: Fraction
    witness: Vector | None

    def __bool__(self):
        return self.feasible


def feasible_flow_exists(net: Network, x, intake_flux: Mapping[str, object] | Sequence) -> Feasibility:
    """Route the intakes to SINK; feasible iff the max flow saturates every intake."""
    state = as_state(net, x)
    if not state.strict:
        raise ValueError("state must be strictly positive")
    problem = FlowProblem.with_intakes(net, intake_flux)
    intake_caps = [problem.capacities[j] for j, e in enumerate(net.edges) if e.is_intake]
    if any(c <= 0 for c in intake_caps):
        raise ValueError("intake fluxes must be strictly positive")
    demand = sum(intake_caps, Fraction(0))
    if not net.excretion_vertices:
        empty = MaxFlowResult(Fraction(0), (Fraction(0),) * net.m, (), Fraction(0))
        return Feasibility(False, empty, demand, None)
    result = max_flow(problem)
    if result.value != demand:
        return Feasibility(False, result, demand, None)
    gains = edge_gains(net, state)
    witness = tuple(fl / g for fl, g in zip(result.flow, gains))
    return Feasibility(True, result, demand, witness)


def intakes_reach_excretion(net: Network) -> bool:
    """Structural side of the feasibility test: every intake vertex has a path to SINK."""
    return bool(net.excretion_vertices) and all(has_path(net, v, SINK) for v in net.intake_vertices)
