"""Exact cone membership via a phase-one simplex over the rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..linalg import Vector, as_vector

_ZERO = Fraction(0)


@dataclass(frozen=True)
class ConeMembership:
    """Outcome of ``target in cone(rows)``.

    When ``feasible`` the ``coefficients`` are nonnegative and reproduce the
    target exactly. Otherwise ``certificate`` is a vector ``y`` with
    ``row . y >= 0`` for every generator and ``target . y < 0``.
    """

    feasible: bool
    coefficients: Vector | None = None
    certificate: Vector | None = None

    def __bool__(self):
        return self.feasible


def _pivot(tab: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    row = tab[r]
    lead = row[c]
    if lead != 1:
        row[:] = [v / lead for v in row]
    for i, other in enumerate(tab):
        if i != r and other[c] != 0:
            k = other[c]
            tab[i] = [a - k * b if b else a for a, b in zip(other, row)]
    if obj[c] != 0:
        k = obj[c]
        obj[:] = [a - k * b if b else a for a, b in zip(obj, row)]


def cone_membership(rows: Sequence[Sequence], target: Sequence) -> ConeMembership:
    """Decide whether ``target`` is a nonnegative combination of ``rows``.

    Solves ``min sum(artificials)`` subject to ``A lam + art = b`` with the
    generators as columns of ``A``, using Bland's rule so the method cannot cycle.
    """
    b = list(as_vector(target))
    gens = [as_vector(r) for r in rows]
    d = len(b)
    for g in gens:
        if len(g) != d:
            raise ValueError(f"generator of length {len(g)} does not match target length {d}")
    k = len(gens)
    if all(v == 0 for v in b):
        return ConeMembership(True, coefficients=(_ZERO,) * k)
    if k == 0:
        return ConeMembership(False, certificate=tuple(-v for v in b))

    flip = [-1 if v < 0 else 1 for v in b]
    width = k + d
    # tableau rows: [A (flipped) | I | b]
    tab = []
    for i in range(d):
        s = flip[i]
        tab.append([s * g[i] for g in gens] + [Fraction(int(i == j)) for j in range(d)] + [s * b[i]])
    basis = [k + i for i in range(d)]
    # reduced costs: c_j - 1^T column_j for structural, 0 for artificials; last entry = -objective
    obj = [-sum((tab[i][j] for i in range(d)), _ZERO) for j in range(k)] + [_ZERO] * d
    obj.append(-sum((tab[i][width] for i in range(d)), _ZERO))

    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        leave = None
        for i in range(d):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        # phase one is bounded below by zero, so some row always qualifies
        _pivot(tab, obj, leave, enter)
        basis[leave] = enter

    if obj[width] != 0:
        # y_i = 1 - reduced cost of artificial i solves the phase-one dual with b.y > 0
        y = [1 - obj[k + i] for i in range(d)]
        cert = tuple(-flip[i] * y[i] for i in range(d))
        return ConeMembership(False, certificate=cert)

    lam = [_ZERO] * k
    for i, var in enumerate(basis):
        if var < k:
            lam[var] = tab[i][width]
    return ConeMembership(True, coefficients=tuple(lam))
