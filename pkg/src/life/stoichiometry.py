"""Exact stoichiometric algebra: incidence matrix, S(x), J(f), ranks, deficiency."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .linalg import RationalMatrix, Vector, as_vector, to_fraction
from .network import (
    Network,
    NetworkError,
    SINK,
    SOURCE,
    weakly_connected_components,
)


class DimensionError(ValueError):
    """A vector does not match the network it is used with."""


@dataclass(frozen=True)
class MetaboliteState:
    """Nonnegative vertex-indexed metabolite levels ``x``."""

    values: Vector

    def __post_init__(self):
        vals = as_vector(self.values)
        if any(v < 0 for v in vals):
            raise ValueError("metabolite levels must be nonnegative")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def mass(self) -> Fraction:
        return sum(self.values, Fraction(0))

    @property
    def strict(self) -> bool:
        return all(v > 0 for v in self.values)


@dataclass(frozen=True)
class FluxAssignment:
    """Nonnegative edge-indexed fluxes ``f``; intake entries are the vector phi."""

    values: Vector

    def __post_init__(self):
        vals = as_vector(self.values)
        if any(v < 0 for v in vals):
            raise ValueError("fluxes must be nonnegative")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, j):
        return self.values[j]

    @property
    def strict(self) -> bool:
        return all(v > 0 for v in self.values)

    @classmethod
    def from_mapping(cls, net: Network, mapping: Mapping[tuple[str, str], object]) -> FluxAssignment:
        """Build from ``{(tail, head): value}``; every edge must be present."""
        missing = [e.label for e in net.edges if (e.tail, e.head) not in mapping]
        if missing:
            raise DimensionError(f"no flux for edges {missing}")
        extra = set(mapping) - set(net.edge_index)
        if extra:
            raise DimensionError(f"fluxes given for unknown edges {sorted(extra)}")
        return cls(tuple(to_fraction(mapping[(e.tail, e.head)]) for e in net.edges))


StateLike = Union[MetaboliteState, Sequence, Mapping[str, object]]
FluxLike = Union[FluxAssignment, Sequence]


def as_state(net: Network, x: StateLike) -> MetaboliteState:
    if isinstance(x, MetaboliteState):
        state = x
    elif isinstance(x, Mapping):
        try:
            state = MetaboliteState(tuple(x[v] for v in net.vertices))
        except KeyError as exc:
            raise DimensionError(f"state has no value for vertex {exc.args[0]!r}") from None
    else:
        state = MetaboliteState(tuple(x))
    if len(state) != net.n:
        raise DimensionError(f"state has {len(state)} entries, network has {net.n} vertices")
    return state


def as_flux(net: Network, f: FluxLike) -> FluxAssignment:
    flux = f if isinstance(f, FluxAssignment) else FluxAssignment(tuple(f))
    if len(flux) != net.m:
        raise DimensionError(f"flux has {len(flux)} entries, network has {net.m} edges")
    return flux


def incidence_matrix(net: Network) -> RationalMatrix:
    """Gamma: the extended-graph incidence matrix with the SOURCE and SINK rows removed."""
    rows = [[0] * net.m for _ in range(net.n)]
    for j, e in enumerate(net.edges):
        if e.tail != SOURCE:
            rows[net.index[e.tail]][j] = -1
        if e.head != SINK:
            rows[net.index[e.head]][j] = 1
    return RationalMatrix(rows, net.vertices, net.edge_labels, ncols=net.m)


def edge_gains(net: Network, x: StateLike) -> Vector:
    """Diagonal of D(x): each edge's gain at its tail value (intakes have gain 1)."""
    state = as_state(net, x)
    out = []
    for e in net.edges:
        if e.is_intake:
            out.append(Fraction(1))
        else:
            out.append(e.kinetics.gain(state[net.index[e.tail]]))
    return tuple(out)


def evaluate_stoichiometric(net: Network, x: StateLike) -> RationalMatrix:
    """S(x): ``-H_e(x_tail)`` on the tail row, ``+H_e(x_tail)`` on the head row, ``1`` for intakes."""
    gains = edge_gains(net, x)
    rows = [[Fraction(0)] * net.m for _ in range(net.n)]
    for j, e in enumerate(net.edges):
        if e.tail != SOURCE:
            rows[net.index[e.tail]][j] = -gains[j]
        if e.head != SINK:
            rows[net.index[e.head]][j] = gains[j]
    return RationalMatrix(rows, net.vertices, net.edge_labels, ncols=net.m)


def rank(mat: RationalMatrix) -> int:
    return mat.rank()


def predicted_rank(net: Network) -> int:
    """n - k, with k the weak components holding neither an intake nor an excretion vertex."""
    boundary = set(net.intake_vertices) | set(net.excretion_vertices)
    k = sum(1 for comp in weakly_connected_components(net) if not boundary.intersection(comp))
    return net.n - k


def _require_one_gain_per_vertex(net: Network) -> None:
    if net.assumption_level == "B":
        raise NetworkError("kinetics assign different gains to out-edges of the same vertex")


def flux_matrix(net: Network, f: FluxLike) -> tuple[RationalMatrix, Vector]:
    """J(f) and the intake vector phi of ``dx/dt = J(f) h(x) + phi``.

    ``J[i][j] = f(v_j, v_i)`` off the diagonal and ``J[i][i]`` is minus the
    total outflow (excretion included) of ``v_i``.
    """
    _require_one_gain_per_vertex(net)
    flux = as_flux(net, f)
    rows = [[Fraction(0)] * net.n for _ in range(net.n)]
    phi = [Fraction(0)] * net.n
    for j, e in enumerate(net.edges):
        if e.is_intake:
            phi[net.index[e.head]] += flux[j]
            continue
        t = net.index[e.tail]
        rows[t][t] -= flux[j]
        if not e.is_excretion:
            rows[net.index[e.head]][t] += flux[j]
    return RationalMatrix(rows, net.vertices, net.vertices, ncols=net.n), tuple(phi)


def grounded_laplacian(net: Network, f: FluxLike) -> RationalMatrix:
    """L_g: the flux-weighted Laplacian of G plus SINK with the SINK row and column deleted.

    Built from out-degrees and adjacency; satisfies ``J(f) = -L_g^T``.
    """
    _require_one_gain_per_vertex(net)
    flux = as_flux(net, f)
    rows = [[Fraction(0)] * net.n for _ in range(net.n)]
    for j, e in enumerate(net.edges):
        if e.is_intake:
            continue
        t = net.index[e.tail]
        rows[t][t] += flux[j]
        if not e.is_excretion:
            rows[t][net.index[e.head]] -= flux[j]
    return RationalMatrix(rows, net.vertices, net.vertices, ncols=net.n)


def deficiency(net: Network) -> int:
    """Deficiency of the closed internal network read as a reaction network with identity complex matrix.

    With ``p = n`` complexes and complex matrix ``I``, ``delta = n - l - rank(Gamma)``,
    evaluated on the internal edges only.
    """
    internal = [j for j, e in enumerate(net.edges) if not e.is_intake and not e.is_excretion]
    gamma = incidence_matrix(net)
    closed = gamma.submatrix(range(net.n), internal)
    ell = len(weakly_connected_components(net))
    complexes = RationalMatrix.identity(net.n, net.vertices)
    return net.n - ell - (complexes @ closed).rank()


def row_roles(net: Network) -> tuple[str, ...]:
    """Role of each metabolite row for the extreme-pathway pivot order.

    ``"excretion"`` wins over ``"intake"`` for vertices attached to both.
    """
    intake = set(net.intake_vertices)
    excretion = set(net.excretion_vertices)
    out = []
    for v in net.vertices:
        if v in excretion:
            out.append("excretion")
        elif v in intake:
            out.append("intake")
        else:
            out.append("internal")
    return tuple(out)
