"""Time-domain simulation of ``dx/dt = S(x) f`` and the cycle embedding of general fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .network import Network
from .stoichiometry import DimensionError, FluxLike, as_flux

NEGATIVE_TOLERANCE = -1e-9
MAX_ROWS = 10_000


class SimulationBlowUp(RuntimeError):
    """A non-finite state appeared; ``trace`` holds everything recorded before it."""

    def __init__(self, time: float, trace: "Trace"):
        super().__init__(f"non-finite state at t = {time:.6g}")
        self.time = time
        self.trace = trace


@dataclass(frozen=True)
class Violation:
    time: float
    vertex: str
    value: float


@dataclass(frozen=True)
class Trace:
    vertices: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    mass: np.ndarray
    boundary_flow: np.ndarray
    violations: tuple[Violation, ...] = ()
    exchanged: np.ndarray | None = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def min_value(self) -> float:
        return float(self.states.min()) if self.states.size else 0.0

    def to_csv(self) -> str:
        lines = [",".join(["t", *self.vertices, "mass"])]
        for t, row, m in zip(self.times, self.states, self.mass):
            lines.append(",".join(f"{v:.12g}" for v in (t, *row, m)))
        return "\n".join(lines) + "\n"

    def boundary_integral(self, method: str = "rk4") -> float:
        """Net boundary inflow over the run.

        ``"rk4"`` reads the integral carried along with the state by the same
        RK4 stages; ``"trapezoid"`` integrates the recorded rows instead.
        """
        if method == "rk4" and self.exchanged is not None:
            return float(self.exchanged[-1])
        if method not in ("rk4", "trapezoid"):
            raise ValueError(f"unknown quadrature {method!r}")
        trapezoid = getattr(np, "trapezoid", None) or np.trapz
        return float(trapezoid(self.boundary_flow, self.times))


class _Field:
    """Vectorised ``S(x) f`` for one network and flux vector."""

    def __init__(self, net: Network, f: FluxLike):
        flux = as_flux(net, f)
        self.net = net
        self.n = net.n
        self.flux = np.array([float(v) for v in flux])
        self.tails = np.array([net.index.get(e.tail, -1) for e in net.edges], dtype=int)
        self.heads = np.array([net.index.get(e.head, -1) for e in net.edges], dtype=int)
        self.kinetics = [e.kinetics for e in net.edges]
        self.intake = np.array([e.is_intake for e in net.edges], dtype=bool)
        self.excretion = np.array([e.is_excretion for e in net.edges], dtype=bool)
        # group edges by kinetics so the gains evaluate in one numpy call per group
        groups: dict = {}
        for j, k in enumerate(self.kinetics):
            if not self.intake[j]:
                groups.setdefault(k, []).append(j)
        self.groups = [(k, np.array(js, dtype=int)) for k, js in groups.items()]
        gamma = np.zeros((self.n, net.m))
        for j in range(net.m):
            if self.tails[j] >= 0:
                gamma[self.tails[j], j] = -1.0
            if self.heads[j] >= 0:
                gamma[self.heads[j], j] = 1.0
        self.gamma = gamma

    def rates(self, x: np.ndarray) -> np.ndarray:
        gains = np.ones(len(self.flux))
        for k, js in self.groups:
            gains[js] = k.gain_float(x[self.tails[js]])
        return gains * self.flux

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.gamma @ self.rates(x)

    def boundary(self, x: np.ndarray) -> float:
        return self.both(x)[1]

    def both(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        """Derivative and net boundary inflow from one rate evaluation."""
        r = self.rates(x)
        return self.gamma @ r, float(r[self.intake].sum() - r[self.excretion].sum())


def _as_float_state(net: Network, x) -> np.ndarray:
    if isinstance(x, dict):
        x = [x[v] for v in net.vertices]
    arr = np.array([float(v) for v in x], dtype=float)
    if arr.shape != (net.n,):
        raise DimensionError(f"state has {arr.size} entries, network has {net.n} vertices")
    return arr


def derivative(net: Network, f: FluxLike, x) -> np.ndarray:
    """``S(x) f`` in floating point: inflow minus outflow at every vertex."""
    return _Field(net, f)(_as_float_state(net, x))


def simulate(
    net: Network,
    f: FluxLike,
    x0,
    t_end: float,
    dt: float = 0.01,
    every: int | None = None,
) -> Trace:
    """Classic fixed-step RK4 from ``x0`` to ``t_end`` (the last step is shortened to land on it).

    States below ``-1e-9`` are recorded as violations, never clamped.
    ``every`` keeps one row per that many steps (default: at most 10000 rows).
    """
    if not (t_end > 0) or not math.isfinite(t_end):
        raise ValueError("t_end must be positive and finite")
    if not (dt > 0) or not math.isfinite(dt):
        raise ValueError("dt must be positive and finite")
    x = _as_float_state(net, x0)
    if np.any(x < 0):
        raise ValueError("initial state must be nonnegative")
    field = _Field(net, f)
    steps = int(math.ceil(t_end / dt - 1e-9))
    if every is None:
        every = max(1, math.ceil(steps / (MAX_ROWS - 1)))
    elif every < 1:
        raise ValueError("every must be at least 1")

    times = [0.0]
    states = [x.copy()]
    bflow = [field.boundary(x)]
    exchanged = [0.0]
    violations = []

    def snapshot():
        st = np.array(states)
        return Trace(
            net.vertices, np.array(times), st, st.sum(axis=1), np.array(bflow), tuple(violations), np.array(exchanged)
        )

    t = 0.0
    total_in = 0.0
    # overflow surfaces as SimulationBlowUp, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, steps + 1):
            h = min(dt, t_end - t) if step == steps else dt
            k1, b1 = field.both(x)
            k2, b2 = field.both(x + 0.5 * h * k1)
            k3, b3 = field.both(x + 0.5 * h * k2)
            k4, b4 = field.both(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            # the boundary integral rides along as one more RK4 component
            total_in += (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
            t = t_end if step == steps else step * dt
            if not np.all(np.isfinite(x)):
                raise SimulationBlowUp(t, snapshot())
            for i in np.nonzero(x < NEGATIVE_TOLERANCE)[0]:
                violations.append(Violation(t, net.vertices[i], float(x[i])))
            if step % every == 0 or step == steps:
                times.append(t)
                states.append(x.copy())
                bflow.append(field.boundary(x))
                exchanged.append(total_in)
    return snapshot()


# cycle embedding


FieldEvaluator = Callable[[np.ndarray], np.ndarray]


class CycleEmbedding:
    """Dynamics on the directed n-cycle with unit fluxes that reproduce a given field.

    The gain on ``(v_i, v_{i+1})`` is ``sum_{k<=i} [F_k]_- + sum_{l>i} [F_l]_+``
    and the gain on ``(v_n, v_1)`` is ``sum_k [F_k]_+``, where ``[a]_+`` and
    ``[a]_-`` are the positive and negative parts. The caller guarantees that
    the field vanishes where the construction needs it to.
    """

    def __init__(self, field: FieldEvaluator, n: int):
        if n < 2:
            raise ValueError("cycle embedding needs at least two vertices")
        self.field = field
        self.n = n

    def _values(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.n,):
            raise DimensionError(f"state has {arr.size} entries, cycle has {self.n} vertices")
        values = np.asarray(self.field(arr), dtype=float)
        if values.shape != (self.n,):
            raise DimensionError("field returned a vector of the wrong size")
        return values

    def gains(self, x) -> np.ndarray:
        """Gains on edges ``(v1,v2), ..., (v_{n-1},v_n), (v_n,v1)``."""
        F = self._values(x)
        plus = np.maximum(F, 0.0)
        minus = np.maximum(-F, 0.0)
        out = np.empty(self.n)
        for i in range(self.n - 1):
            out[i] = minus[: i + 1].sum() + plus[i + 1 :].sum()
        out[-1] = plus.sum()
        return out

    def __call__(self, x) -> np.ndarray:
        g = self.gains(x)
        # vertex i receives along edge i-1 and releases along edge i (indices mod n)
        return np.roll(g, 1) - g


def embed_on_cycle(field: FieldEvaluator, n: int) -> CycleEmbedding:
    return CycleEmbedding(field, n)
