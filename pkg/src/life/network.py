"""Graph model of a LIFE network and its structural queries."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

from .linalg import to_fraction

#: Reserved identifier of the virtual intake vertex.
SOURCE = "<source>"
#: Reserved identifier of the virtual excretion vertex.
SINK = "<sink>"


class NetworkError(ValueError):
    """Structural problem with a network definition or query."""


# kinetics


@dataclass(frozen=True)
class Linear:
    """Gain ``H(x) = x``."""

    sup = None  # unbounded range

    def gain(self, x: Fraction) -> Fraction:
        return x

    def gain_float(self, x: float) -> float:
        return x

    def inverse(self, h):
        return h

    def describe(self) -> str:
        return "linear"


@dataclass(frozen=True)
class Hill:
    """Gain ``H(x) = x**p / (K + x**p)`` with integer ``p >= 1`` and ``K > 0``."""

    p: int
    K: Fraction

    sup = Fraction(1)

    def __post_init__(self):
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 1:
            raise NetworkError(f"Hill exponent must be an integer >= 1, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "K", to_fraction(self.K))
        if self.K <= 0:
            raise NetworkError(f"Hill dissociation constant must be positive, got {self.K}")

    def gain(self, x: Fraction) -> Fraction:
        xp = x**self.p
        return xp / (self.K + xp)

    def gain_float(self, x):
        xp = x**self.p
        return xp / (float(self.K) + xp)

    def inverse(self, h):
        """Inverse gain on ``[0, 1)``; exact when the result is rational."""
        h = to_fraction(h) if not isinstance(h, float) else h
        if h < 0 or h >= 1:
            raise ValueError(f"{h} is outside the Hill range [0, 1)")
        if isinstance(h, float):
            return (float(self.K) * h / (1 - h)) ** (1 / self.p)
        base = self.K * h / (1 - h)
        if self.p == 1:
            return base
        num = _exact_root(base.numerator, self.p)
        den = _exact_root(base.denominator, self.p)
        if num is not None and den is not None:
            return Fraction(num, den)
        return float(base) ** (1 / self.p)

    def describe(self) -> str:
        return f"hill(p={self.p}, K={self.K})"


@dataclass(frozen=True)
class ConstantIntake:
    """Unit gain; only legal on intake edges."""

    def gain(self, x=None) -> Fraction:
        return Fraction(1)

    def gain_float(self, x=None) -> float:
        return 1.0

    def describe(self) -> str:
        return "constant"


Kinetics = Union[Linear, Hill, ConstantIntake]

LINEAR = Linear()
CONSTANT = ConstantIntake()


def _exact_root(value: int, p: int) -> int | None:
    r = round(value ** (1.0 / p)) if value > 0 else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**p == value:
            return cand
    return None


# graph


@dataclass(frozen=True)
class Edge:
    tail: str
    head: str
    kinetics: Kinetics = LINEAR

    @property
    def is_intake(self) -> bool:
        return self.tail == SOURCE

    @property
    def is_excretion(self) -> bool:
        return self.head == SINK

    @property
    def label(self) -> str:
        return f"{self.tail}->{self.head}"


@dataclass(frozen=True)
class ComponentDecomposition:
    """Strong components of the internal graph, with terminal/excretion flags.

    ``components[i]`` lists vertex ids in declaration order; components are
    ordered by their smallest vertex index. ``weak_index`` maps each vertex to
    the index of its weakly connected component.
    """

    components: tuple[tuple[str, ...], ...]
    terminal: tuple[bool, ...]
    excreting: tuple[bool, ...]
    weak_index: dict[str, int]

    def component_of(self, vertex: str) -> int:
        for i, comp in enumerate(self.components):
            if vertex in comp:
                return i
        raise NetworkError(f"unknown vertex {vertex!r}")

    @property
    def terminal_components(self) -> list[tuple[str, ...]]:
        return [c for c, t in zip(self.components, self.terminal) if t]


@dataclass(frozen=True)
class Network:
    """Directed metabolite graph extended by the virtual SOURCE and SINK.

    Edges are stored in lexicographic order of ``(tail index, head index)``
    where SOURCE has index 0, the declared vertices ``1..n`` and SINK ``n+1``.
    This order fixes the columns of every edge-indexed matrix.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if len(set(vertices)) != len(vertices):
            raise NetworkError("duplicate vertex identifiers")
        for v in vertices:
            if not isinstance(v, str) or not v:
                raise NetworkError(f"vertex identifiers must be non-empty strings, got {v!r}")
            if v in (SOURCE, SINK):
                raise NetworkError(f"{v!r} is a reserved identifier")
        order = {SOURCE: 0, **{v: i + 1 for i, v in enumerate(vertices)}, SINK: len(vertices) + 1}
        seen = set()
        for e in self.edges:
            if e.tail not in order or e.head not in order:
                raise NetworkError(f"edge {e.label} references an unknown vertex")
            if e.tail == e.head:
                raise NetworkError(f"self-loop on {e.tail!r}")
            if e.head == SOURCE:
                raise NetworkError(f"edge {e.label} enters the source")
            if e.tail == SINK:
                raise NetworkError(f"edge {e.label} leaves the sink")
            if e.tail == SOURCE and e.head == SINK:
                raise NetworkError("direct source-to-sink edge")
            if (e.tail, e.head) in seen:
                raise NetworkError(f"duplicate edge {e.label}")
            seen.add((e.tail, e.head))
            if e.is_intake:
                if not isinstance(e.kinetics, ConstantIntake):
                    raise NetworkError(f"intake edge {e.label} must have constant kinetics")
            elif not isinstance(e.kinetics, (Linear, Hill)):
                raise NetworkError(f"edge {e.label} needs linear or hill kinetics")
        edges = tuple(sorted(self.edges, key=lambda e: (order[e.tail], order[e.head])))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def build(
        cls,
        vertices: Sequence[str],
        edges: Iterable[tuple] = (),
        intakes: Iterable[str] = (),
        excretions: Iterable[Union[str, tuple]] = (),
    ) -> Network:
        """Convenience constructor.

        ``edges`` holds ``(tail, head)`` or ``(tail, head, kinetics)`` tuples;
        ``excretions`` holds vertex ids or ``(vertex, kinetics)`` tuples.
        """
        out = [Edge(SOURCE, v, CONSTANT) for v in intakes]
        for e in edges:
            out.append(Edge(e[0], e[1], e[2] if len(e) > 2 else LINEAR))
        for x in excretions:
            if isinstance(x, tuple):
                out.append(Edge(x[0], SINK, x[1]))
            else:
                out.append(Edge(x, SINK, LINEAR))
        return cls(tuple(vertices), tuple(out))

    # sizes and indices

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> dict[tuple[str, str], int]:
        return {(e.tail, e.head): j for j, e in enumerate(self.edges)}

    @property
    def edge_labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.edges)

    @cached_property
    def intake_vertices(self) -> tuple[str, ...]:
        return tuple(e.head for e in self.edges if e.is_intake)

    @cached_property
    def excretion_vertices(self) -> tuple[str, ...]:
        return tuple(e.tail for e in self.edges if e.is_excretion)

    @property
    def is_closed(self) -> bool:
        return not self.intake_vertices and not self.excretion_vertices

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        """Adjacency of the extended graph (including SOURCE and SINK), in edge order."""
        succ: dict[str, list[str]] = {SOURCE: [], SINK: [], **{v: [] for v in self.vertices}}
        for e in self.edges:
            succ[e.tail].append(e.head)
        return {k: tuple(v) for k, v in succ.items()}

    @cached_property
    def predecessors(self) -> dict[str, tuple[str, ...]]:
        pred: dict[str, list[str]] = {SOURCE: [], SINK: [], **{v: [] for v in self.vertices}}
        for e in self.edges:
            pred[e.head].append(e.tail)
        return {k: tuple(v) for k, v in pred.items()}

    def out_edges(self, v: str) -> list[int]:
        return [j for j, e in enumerate(self.edges) if e.tail == v]

    def in_edges(self, v: str) -> list[int]:
        return [j for j, e in enumerate(self.edges) if e.head == v]

    def _check_vertex(self, v: str, extra: tuple[str, ...] = ()) -> None:
        if v not in self.index and v not in extra:
            raise NetworkError(f"unknown vertex {v!r}")

    # assumption levels

    def vertex_gain(self, v: str) -> Kinetics:
        """The single gain shared by all out-edges of ``v``.

        Vertices without out-edges get the linear gain; their gain never
        enters the dynamics. Raises when out-edges disagree.
        """
        kinds = {self.edges[j].kinetics for j in self.out_edges(v)}
        if len(kinds) > 1:
            raise NetworkError(f"out-edges of {v!r} carry different kinetics")
        return kinds.pop() if kinds else LINEAR

    @cached_property
    def assumption_level(self) -> str:
        """``"linear"``, ``"C"`` (one gain per vertex) or ``"B"`` (per-edge gains)."""
        internal = [e for e in self.edges if not e.is_intake]
        if all(isinstance(e.kinetics, Linear) for e in internal):
            return "linear"
        for v in self.vertices:
            if len({self.edges[j].kinetics for j in self.out_edges(v)}) > 1:
                return "B"
        return "C"


# structural queries


def _reach(net: Network, start: Iterable[str], adjacency: dict[str, tuple[str, ...]]) -> list[str]:
    """BFS order of everything reachable from ``start`` (inclusive)."""
    seen = set()
    order = []
    queue = deque()
    for s in start:
        if s not in seen:
            seen.add(s)
            queue.append(s)
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in adjacency[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return order


def strongly_connected_components(net: Network) -> ComponentDecomposition:
    """Tarjan's algorithm on the internal graph G (virtual vertices excluded)."""
    idx = net.index
    succ = {v: [w for w in net.successors[v] if w in idx] for v in net.vertices}
    counter = 0
    low: dict[str, int] = {}
    number: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    found: list[list[str]] = []

    for root in net.vertices:
        if root in number:
            continue
        work = [(root, 0)]
        number[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if w not in number:
                    number[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], number[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == number[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                found.append(comp)

    comps = sorted((sorted(c, key=idx.__getitem__) for c in found), key=lambda c: idx[c[0]])
    where = {v: k for k, c in enumerate(comps) for v in c}
    terminal = tuple(all(where[w] == k for v in c for w in succ[v]) for k, c in enumerate(comps))
    excretors = set(net.excretion_vertices)
    excreting = tuple(any(v in excretors for v in c) for c in comps)
    weak = weakly_connected_components(net)
    weak_index = {v: k for k, c in enumerate(weak) for v in c}
    return ComponentDecomposition(tuple(tuple(c) for c in comps), terminal, excreting, weak_index)


def weakly_connected_components(net: Network) -> list[tuple[str, ...]]:
    """Components of G ignoring orientation; SOURCE and SINK do not merge components."""
    idx = net.index
    undirected = {
        v: tuple(w for w in (*net.successors[v], *net.predecessors[v]) if w in idx) for v in net.vertices
    }
    seen: set[str] = set()
    out = []
    for v in net.vertices:
        if v in seen:
            continue
        comp = _reach(net, [v], undirected)
        seen.update(comp)
        out.append(tuple(sorted(comp, key=idx.__getitem__)))
    return out


def has_path(net: Network, start: str, end: str) -> bool:
    """Directed path in the extended graph; every vertex reaches itself."""
    net._check_vertex(start, (SOURCE,))
    net._check_vertex(end, (SINK, SOURCE))
    if start == end:
        return True
    return end in set(_reach(net, [start], net.successors))


def reachable_from(net: Network, start: str) -> list[str]:
    """Vertices reachable from ``start`` in BFS order (extended graph, inclusive)."""
    net._check_vertex(start, (SOURCE, SINK))
    return _reach(net, [start], net.successors)


def is_weakly_reversible(net: Network) -> bool:
    scc = strongly_connected_components(net)
    strong = {frozenset(c) for c in scc.components}
    return all(frozenset(c) in strong for c in weakly_connected_components(net))


def excretion_reachable_set(net: Network) -> tuple[str, ...]:
    """V1: vertices with a path to SINK, in declaration order."""
    back = set(_reach(net, [SINK], net.predecessors))
    return tuple(v for v in net.vertices if v in back)


def intake_reachable_set(net: Network) -> tuple[str, ...]:
    """Vertices with a path from SOURCE, in declaration order."""
    fwd = set(_reach(net, [SOURCE], net.successors))
    return tuple(v for v in net.vertices if v in fwd)


def unbounded_gain_paths(net: Network) -> bool:
    """Whether every vertex reaches SINK along edges whose gains are unbounded (linear)."""
    pred: dict[str, list[str]] = {v: [] for v in (*net.vertices, SINK)}
    for e in net.edges:
        if not e.is_intake and isinstance(e.kinetics, Linear):
            pred[e.head].append(e.tail)
    back = set(_reach(net, [SINK], {k: tuple(v) for k, v in pred.items()}))
    return all(v in back for v in net.vertices)
