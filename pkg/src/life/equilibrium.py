"""Fixed-flux equilibria: reduced-system solve, trap components, regime classification."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import RationalMatrix, Vector, to_fraction
from .network import (
    Hill,
    Linear,
    Network,
    NetworkError,
    SINK,
    SOURCE,
    excretion_reachable_set,
    intake_reachable_set,
    reachable_from,
    strongly_connected_components,
    unbounded_gain_paths,
)
from .stoichiometry import FluxLike, as_flux, flux_matrix

DEFAULT_PRECISION = 4


class Regime(str, Enum):
    UNIQUE_GLOBAL = "UNIQUE_GLOBAL"
    MASS_DEPENDENT = "MASS_DEPENDENT"
    UNBOUNDED = "UNBOUNDED"
    NO_EQUILIBRIUM_STRUCTURAL = "NO_EQUILIBRIUM_STRUCTURAL"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Justification:
    """One step of a classification: which rule fired and what it concluded."""

    rule: str
    detail: str
    regime: Regime | None = None

    def __str__(self):
        tail = f" => {self.regime}" if self.regime else ""
        return f"{self.rule}: {self.detail}{tail}"


# rendering


def report_precision() -> int:
    """Decimals used in reports; ``LIFE_PRECISION`` overrides the default of 4."""
    raw = os.environ.get("LIFE_PRECISION")
    if raw is None or raw.strip() == "":
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"LIFE_PRECISION must be an integer, got {raw!r}") from None
    if value < 0 or value > 50:
        raise ValueError(f"LIFE_PRECISION must lie in 0..50, got {value}")
    return value


def format_decimal(value, precision: int | None = None) -> str:
    """Round half-to-even to ``precision`` decimals; exact for Fractions."""
    if precision is None:
        precision = report_precision()
    if value is None:
        return "-"
    with localcontext() as ctx:
        ctx.prec = 80
        if isinstance(value, Fraction):
            dec = Decimal(value.numerator) / Decimal(value.denominator)
        else:
            dec = Decimal(float(value))
        out = dec.quantize(Decimal(1).scaleb(-precision), rounding=ROUND_HALF_EVEN)
    if out.is_zero():
        out = abs(out)
    return f"{out:f}"


def _set(vertices: Iterable[str]) -> str:
    return "{" + ", ".join(vertices) + "}"


# structural necessary condition


@dataclass(frozen=True)
class PathCondition:
    """Every vertex reachable from an intake must reach an excretion.

    On failure ``witness`` is the first offending vertex in breadth-first
    order from SOURCE and ``component`` the excretion-free terminal component it drains into.
    """

    passed: bool
    witness: str | None = None
    component: tuple[str, ...] | None = None

    def __bool__(self):
        return self.passed

    def describe(self) -> str:
        if self.passed:
            return "path condition: pass"
        return f"path condition: VIOLATED at {self.witness} (trap {_set(self.component)})"


def check_equilibrium_necessary(net: Network) -> PathCondition:
    v1 = set(excretion_reachable_set(net))
    order = [v for v in reachable_from(net, SOURCE) if v in net.index]
    bad = next((v for v in order if v not in v1), None)
    if bad is None:
        return PathCondition(True)
    scc = strongly_connected_components(net)
    below = [v for v in reachable_from(net, bad) if v in net.index]
    for v in below:
        k = scc.component_of(v)
        if scc.terminal[k] and not scc.excreting[k]:
            return PathCondition(False, bad, scc.components[k])
    raise AssertionError("a vertex without a path to SINK must drain into an excretion-free trap")


# stationary distributions


def _restriction(jmat: RationalMatrix, net: Network, vertices: Sequence[str]) -> RationalMatrix:
    idx = [net.index[v] for v in vertices]
    return jmat.submatrix(idx, idx)


def stationary_distribution(net: Network, f: FluxLike, component: Iterable[str]) -> dict[str, Fraction]:
    """Unit-sum positive vector annihilated by the restriction of J(f) to a terminal component."""
    comp = set(component)
    for v in comp:
        net._check_vertex(v)
    scc = strongly_connected_components(net)
    match = [k for k, c in enumerate(scc.components) if set(c) == comp]
    if not match:
        raise NetworkError(f"{sorted(comp)} is not a strongly connected component")
    k = match[0]
    if not scc.terminal[k]:
        raise NetworkError(f"component {_set(scc.components[k])} is not terminal")
    if scc.excreting[k]:
        raise NetworkError(f"component {_set(scc.components[k])} excretes; it has no stationary distribution")
    flux = as_flux(net, f)
    for j, e in enumerate(net.edges):
        if e.tail in comp and flux[j] <= 0:
            raise ValueError(f"flux on {e.label} must be strictly positive")
    verts = scc.components[k]
    jmat, _ = flux_matrix(net, flux)
    block = _restriction(jmat, net, verts)
    null = block.nullspace()
    if len(null) != 1:
        raise AssertionError("restriction to a terminal component has a one-dimensional nullspace")
    vec = null[0]
    total = sum(vec, Fraction(0))
    return {v: x / total for v, x in zip(verts, vec)}


# reports


@dataclass(frozen=True)
class TrapComponent:
    """Excretion-free terminal component (it lies in V2).

    ``alpha_bound`` is the supremum of admissible scalings ``alpha`` such that
    ``alpha * distribution`` stays in every vertex's gain range (``None``
    when unbounded).
    """

    vertices: tuple[str, ...]
    fed: bool
    distribution: dict[str, Fraction]
    alpha_bound: Fraction | None = None


@dataclass(frozen=True)
class EquilibriumReport:
    regime: Regime
    vertices: tuple[str, ...]
    values: tuple
    v1: tuple[str, ...]
    v2: tuple[str, ...]
    reduced_matrix: RationalMatrix
    reduced_intake: Vector
    traps: tuple[TrapComponent, ...] = ()
    trace: tuple[Justification, ...] = ()
    gains: tuple = ()
    cross_matrix: RationalMatrix | None = None

    def value(self, vertex: str):
        return self.values[self.vertices.index(vertex)]

    @property
    def determined(self) -> dict:
        """Vertices with a fixed equilibrium value."""
        return {v: x for v, x in zip(self.vertices, self.values) if x is not None}

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.determined.values())

    def render(self, precision: int | None = None) -> str:
        lines = [f"regime: {self.regime}"]
        lines.append(f"reduced system V1: {_set(self.v1)}")
        lines.append(f"remainder V2: {_set(self.v2)}")
        lines.append("equilibrium:")
        for v, x in zip(self.vertices, self.values):
            shown = format_decimal(x, precision) if x is not None else "mass-dependent" if self._in_unfed(v) else "none"
            lines.append(f"  {v} = {shown}")
        for trap in self.traps:
            state = "fed (grows without bound)" if trap.fed else "unfed"
            lines.append(f"trap {_set(trap.vertices)}: {state}")
            dist = ", ".join(f"{v}={format_decimal(p, precision)}" for v, p in trap.distribution.items())
            lines.append(f"  stationary distribution: {dist}")
            if trap.alpha_bound is not None:
                lines.append(f"  admissible scale: 0 <= alpha < {format_decimal(trap.alpha_bound, precision)}")
        lines.append("trace:")
        lines += [f"  - {j}" for j in self.trace]
        return "\n".join(lines) + "\n"

    def _in_unfed(self, vertex: str) -> bool:
        return any(vertex in t.vertices and not t.fed for t in self.traps)

    def to_document(self, precision: int | None = None) -> dict:
        return {
            "regime": str(self.regime),
            "equilibrium": {
                v: (format_decimal(x, precision) if x is not None else None)
                for v, x in zip(self.vertices, self.values)
            },
            "v1": list(self.v1),
            "v2": list(self.v2),
            "traps": [
                {
                    "vertices": list(t.vertices),
                    "fed": t.fed,
                    "distribution": {v: format_decimal(p, precision) for v, p in t.distribution.items()},
                    "alpha_bound": None if t.alpha_bound is None else format_decimal(t.alpha_bound, precision),
                }
                for t in self.traps
            ],
            "trace": [
                {"rule": j.rule, "detail": j.detail, "regime": None if j.regime is None else str(j.regime)}
                for j in self.trace
            ],
        }


def _require_strict(net: Network, f: FluxLike):
    flux = as_flux(net, f)
    zero = [e.label for e, v in zip(net.edges, flux) if v <= 0]
    if zero:
        raise ValueError(f"fluxes must be strictly positive; zero on {zero}")
    return flux


def _traps(net, jmat, flux, v2, fed_vertices) -> list[TrapComponent]:
    scc = strongly_connected_components(net)
    v2set = set(v2)
    out = []
    for k, comp in enumerate(scc.components):
        if not scc.terminal[k] or comp[0] not in v2set:
            continue
        dist = stationary_distribution(net, flux, comp)
        bounds = []
        for v in comp:
            sup = net.vertex_gain(v).sup
            if sup is not None:
                bounds.append(sup / dist[v])
        out.append(
            TrapComponent(
                vertices=comp,
                fed=any(v in fed_vertices for v in comp),
                distribution=dist,
                alpha_bound=min(bounds) if bounds else None,
            )
        )
    return out


def _reduced_system(net: Network, f: FluxLike, invert: bool) -> EquilibriumReport:
    if net.n == 0:
        raise NetworkError("empty network has no equilibrium problem")
    flux = _require_strict(net, f)
    jmat, phi = flux_matrix(net, flux)
    v1 = excretion_reachable_set(net)
    v1set = set(v1)
    v2 = tuple(v for v in net.vertices if v not in v1set)
    i1 = [net.index[v] for v in v1]
    i2 = [net.index[v] for v in v2]
    j1 = jmat.submatrix(i1, i1)
    phi1 = tuple(phi[i] for i in i1)
    cross = jmat.submatrix(i2, i1)
    trace = []

    cond = check_equilibrium_necessary(net)
    trace.append(
        Justification(
            "path condition",
            "every vertex fed by an intake reaches an excretion" if cond else cond.describe().split(": ", 1)[1],
            None if cond else Regime.NO_EQUILIBRIUM_STRUCTURAL,
        )
    )

    h1 = j1.solve([-p for p in phi1]) if v1 else ()
    trace.append(
        Justification(
            "reduced system",
            f"solved J1 h1 = -phi1 exactly on V1 = {_set(v1)}" if v1 else "V1 is empty (no excretion reachable)",
        )
    )

    values: list = [None] * net.n
    gains: list = [None] * net.n
    range_ok = True
    for v, h in zip(v1, h1):
        gains[net.index[v]] = h
        kin = net.vertex_gain(v)
        if kin.sup is not None and h >= kin.sup:
            range_ok = False
            trace.append(
                Justification("gain range", f"required gain {format_decimal(h, 6)} at {v} is outside [0, {kin.sup})")
            )
            continue
        values[net.index[v]] = kin.inverse(h) if invert else h
    if invert and range_ok:
        kinds = {type(net.vertex_gain(v)).__name__.lower() for v in v1}
        trace.append(Justification("gain range", f"every required gain lies in range ({', '.join(sorted(kinds)) or 'none'})"))

    fed_vertices = set(intake_reachable_set(net))
    traps = _traps(net, jmat, flux, v2, fed_vertices)
    trap_vertices = {v for t in traps for v in t.vertices}
    for v in v2:
        if v not in trap_vertices:
            values[net.index[v]] = Fraction(0)

    if not range_ok:
        regime = Regime.UNBOUNDED
        for v in v1:
            values[net.index[v]] = None
        trace.append(Justification("gain range", "no equilibrium; trajectories grow without bound", Regime.UNBOUNDED))
    elif any(t.fed for t in traps):
        regime = Regime.UNBOUNDED
        fed = [t for t in traps if t.fed]
        for v in v2:
            values[net.index[v]] = None
        trace.append(
            Justification("fed trap", f"intake reaches excretion-free trap {_set(fed[0].vertices)}", Regime.UNBOUNDED)
        )
    elif traps:
        regime = Regime.MASS_DEPENDENT
        trace.append(
            Justification(
                "unfed traps",
                f"{len(traps)} excretion-free terminal component(s) without intake; values set by their mass",
                Regime.MASS_DEPENDENT,
            )
        )
    else:
        regime = Regime.UNIQUE_GLOBAL
        trace.append(
            Justification("reduced system", "every vertex reaches an excretion: unique global equilibrium", Regime.UNIQUE_GLOBAL)
        )
    return EquilibriumReport(
        regime=regime,
        vertices=net.vertices,
        values=tuple(values),
        v1=v1,
        v2=v2,
        reduced_matrix=j1,
        reduced_intake=phi1,
        traps=tuple(traps),
        trace=tuple(trace),
        gains=tuple(gains),
        cross_matrix=cross,
    )


def linear_equilibrium(net: Network, f: FluxLike) -> EquilibriumReport:
    """Equilibrium of a linear network with strictly positive fluxes, solved exactly."""
    if net.assumption_level != "linear":
        raise NetworkError("linear_equilibrium needs linear kinetics on every non-intake edge")
    return _reduced_system(net, f, invert=False)


def special_equilibrium(net: Network, f: FluxLike) -> EquilibriumReport:
    """Equilibrium when each vertex has one gain function: solve for the gains, then invert them.

    Inversion is exact when the preimage is rational and a float otherwise.
    """
    if net.assumption_level == "B":
        raise NetworkError("special_equilibrium needs one gain function per vertex")
    return _reduced_system(net, f, invert=True)


# closed networks


@dataclass(frozen=True)
class ClosedEquilibrium:
    """Equilibrium set of a network without intakes or excretions.

    ``dimension`` is the number of terminal components. ``equilibrium`` is
    filled only when that number is one.
    """

    terminal_components: tuple[tuple[str, ...], ...]
    distributions: tuple[dict[str, Fraction], ...]
    mass: Fraction
    equilibrium: tuple | None
    alpha: object = None

    @property
    def dimension(self) -> int:
        return len(self.terminal_components)


def _bisect_alpha(gains, dist, mass: float, upper: float | None) -> float:
    def total(alpha):
        return sum(g.inverse(alpha * float(p)) for g, p in zip(gains, dist))

    lo = 0.0
    if upper is None:
        hi = 1.0
        while total(hi) < mass:
            hi *= 2
    else:
        hi = upper
    for _ in range(400):
        mid = (lo + hi) / 2
        if mid >= hi or mid <= lo:
            break
        if total(mid) < mass:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return (lo + hi) / 2


def closed_equilibrium_set(net: Network, f: FluxLike, mass) -> ClosedEquilibrium:
    if not net.is_closed:
        raise NetworkError("closed_equilibrium_set needs a network without intakes or excretions")
    if net.assumption_level == "B":
        raise NetworkError("closed_equilibrium_set needs linear kinetics or one gain per vertex")
    mass = to_fraction(mass)
    if mass <= 0:
        raise ValueError("mass must be positive")
    flux = _require_strict(net, f)
    scc = strongly_connected_components(net)
    terms = tuple(scc.terminal_components)
    dists = tuple(stationary_distribution(net, flux, c) for c in terms)
    if len(terms) != 1:
        return ClosedEquilibrium(terms, dists, mass, None)
    comp, dist = terms[0], dists[0]
    values: list = [Fraction(0)] * net.n
    if net.assumption_level == "linear":
        for v in comp:
            values[net.index[v]] = mass * dist[v]
        return ClosedEquilibrium(terms, dists, mass, tuple(values), alpha=mass)
    gains = [net.vertex_gain(v) for v in comp]
    bounds = [float(g.sup) / float(dist[v]) for g, v in zip(gains, comp) if g.sup is not None]
    upper = min(bounds) if bounds else None
    alpha = _bisect_alpha(gains, [dist[v] for v in comp], float(mass), upper)
    for g, v in zip(gains, comp):
        values[net.index[v]] = g.inverse(alpha * float(dist[v]))
    return ClosedEquilibrium(terms, dists, mass, tuple(values), alpha=alpha)


# classification


@dataclass(frozen=True)
class Classification:
    regime: Regime
    trace: tuple[Justification, ...]
    report: EquilibriumReport | None = None
    state: tuple | None = None

    def render(self) -> str:
        lines = [f"regime: {self.regime}", "trace:"]
        lines += [f"  - {j}" for j in self.trace]
        return "\n".join(lines) + "\n"


def _outflow_iteration(net: Network, flux, max_iter: int = 100_000, rtol: float = 1e-13):
    """Least fixed point of the balance on V1 for per-edge gains.

    Each vertex's outflow ``g_v(x) = sum f_e H_e(x)`` is strictly increasing, so
    ``x_v <- g_v^{-1}(intake + inflow)`` increases monotonically from 0 and
    either converges or demands more than ``sup g_v``.
    """
    v1 = excretion_reachable_set(net)
    pos = {v: k for k, v in enumerate(v1)}
    outs = {v: [(e.kinetics, float(flux[j])) for j in net.out_edges(v) for e in [net.edges[j]]] for v in v1}
    ins = {v: [] for v in v1}
    intake = {v: 0.0 for v in v1}
    for j, e in enumerate(net.edges):
        if e.head in pos:
            if e.is_intake:
                intake[e.head] += float(flux[j])
            elif e.tail in pos:
                ins[e.head].append((e.tail, e.kinetics, float(flux[j])))

    def outflow(v, x):
        return sum(fl * k.gain_float(x) for k, fl in outs[v])

    sups = {}
    for v in v1:
        total = 0.0
        for k, fl in outs[v]:
            if k.sup is None:
                total = math.inf
                break
            total += fl * float(k.sup)
        sups[v] = total

    def invert(v, demand):
        lo, hi = 0.0, 1.0
        while outflow(v, hi) < demand:
            hi *= 2
        for _ in range(200):
            mid = (lo + hi) / 2
            if mid <= lo or mid >= hi:
                break
            if outflow(v, mid) < demand:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    x = [0.0] * len(v1)
    for it in range(max_iter):
        change = 0.0
        for v in v1:
            demand = intake[v] + sum(fl * k.gain_float(x[pos[w]]) for w, k, fl in ins[v])
            if demand >= sups[v]:
                return None, f"demand {demand:.6g} at {v} reaches the supremum {sups[v]:.6g} of its outflow"
            new = invert(v, demand) if demand > 0 else 0.0
            change = max(change, abs(new - x[pos[v]]) / max(1.0, abs(new)))
            x[pos[v]] = new
        if change <= rtol:
            return dict(zip(v1, x)), f"converged after {it + 1} sweeps"
    return None, f"no convergence after {max_iter} sweeps"


def classify_asymptotics(net: Network, f: FluxLike) -> Classification:
    """Decide the long-run regime without computing eigenvalues.

    Order of rules: path condition; closed network; reduced-system solve with
    gain range check (one gain per vertex); otherwise unbounded-gain paths or
    a monotone fixed-point iteration for per-edge gains.
    """
    flux = _require_strict(net, f)
    cond = check_equilibrium_necessary(net)
    if not cond:
        detail = cond.describe().split(": ", 1)[1]
        trace = (
            Justification("path condition", detail, Regime.NO_EQUILIBRIUM_STRUCTURAL),
            Justification("path condition", "mass in the trap grows without bound", Regime.UNBOUNDED),
        )
        return Classification(Regime.UNBOUNDED, trace)
    first = Justification("path condition", "every vertex fed by an intake reaches an excretion")
    if net.is_closed:
        return Classification(
            Regime.MASS_DEPENDENT,
            (first, Justification("closed system", "total mass is constant; the limit is fixed by it", Regime.MASS_DEPENDENT)),
        )
    if net.assumption_level in ("linear", "C"):
        report = _reduced_system(net, flux, invert=True)
        return Classification(report.regime, report.trace, report=report)

    if unbounded_gain_paths(net):
        return Classification(
            Regime.UNIQUE_GLOBAL,
            (first, Justification("unbounded gains", "every vertex reaches an excretion through linear edges", Regime.UNIQUE_GLOBAL)),
        )
    state, note = _outflow_iteration(net, flux)
    if state is None:
        return Classification(
            Regime.UNBOUNDED, (first, Justification("outflow iteration", note, Regime.UNBOUNDED))
        )
    v2 = [v for v in net.vertices if v not in state]
    if v2:
        return Classification(
            Regime.MASS_DEPENDENT,
            (first, Justification("outflow iteration", note), Justification(
                "unfed traps", f"vertices {_set(v2)} cannot reach an excretion", Regime.MASS_DEPENDENT
            )),
            state=tuple(state.get(v) for v in net.vertices),
        )
    return Classification(
        Regime.UNIQUE_GLOBAL,
        (first, Justification("outflow iteration", note, Regime.UNIQUE_GLOBAL)),
        state=tuple(state[v] for v in net.vertices),
    )
