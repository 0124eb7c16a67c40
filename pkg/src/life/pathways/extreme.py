"""Extreme pathways of ``N(S(x)) ∩ R_+^m`` by tableau row combination."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..linalg import RationalMatrix, Vector, as_vector
from .lp import cone_membership

INTERNAL = "internal"
INTAKE = "intake"
EXCRETION = "excretion"
ROLES = (INTERNAL, INTAKE, EXCRETION)


class TableauError(ValueError):
    """The matrix or its row roles cannot be processed by the tableau."""


@dataclass(frozen=True)
class Pathway:
    """One extreme pathway with the history of how its tableau row was formed.

    ``provenance`` is a nested expression: an edge label for an initial
    identity row, or ``(metabolite, left, right)`` for a combination that
    cancelled ``metabolite``.
    """

    vector: Vector
    provenance: object

    @property
    def support(self) -> frozenset[int]:
        return frozenset(j for j, v in enumerate(self.vector) if v != 0)

    def describe(self) -> str:
        return _render(self.provenance)


def _render(node) -> str:
    if isinstance(node, str):
        return node
    metabolite, left, right = node
    return f"[{_render(left)} + {_render(right)}]@{metabolite}"


@dataclass(frozen=True)
class PositiveBasis:
    pathways: tuple[Pathway, ...]
    edge_labels: tuple[str, ...]
    pivot_order: tuple[str, ...] = field(default=())

    def __len__(self):
        return len(self.pathways)

    @property
    def rows(self) -> list[Vector]:
        return [p.vector for p in self.pathways]

    def as_matrix(self) -> RationalMatrix:
        return RationalMatrix(
            self.rows, [f"p{i + 1}" for i in range(len(self))], self.edge_labels, ncols=len(self.edge_labels)
        )

    def to_csv(self) -> str:
        lines = [",".join(self.edge_labels)]
        lines += [",".join(str(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def _check_roles(S: RationalMatrix, roles: Sequence[str]) -> None:
    if len(roles) != S.nrows:
        raise TableauError(f"{len(roles)} roles for {S.nrows} metabolite rows")
    for r in roles:
        if r not in ROLES:
            raise TableauError(f"unknown row role {r!r}")
    single_pos = set()
    single_neg = set()
    for j in range(S.ncols):
        col = S.column(j)
        nz = [(i, v) for i, v in enumerate(col) if v != 0]
        if not nz:
            raise TableauError(f"column {S.col_labels[j]} is zero; S must be evaluated at a strictly positive state")
        if len(nz) == 1:
            i, v = nz[0]
            (single_pos if v > 0 else single_neg).add(i)
            if v > 0 and roles[i] == INTERNAL:
                raise TableauError(f"column {S.col_labels[j]} feeds row {S.row_labels[i]} marked internal")
            if v < 0 and roles[i] != EXCRETION:
                raise TableauError(f"column {S.col_labels[j]} drains row {S.row_labels[i]} not marked excretion")
    for i, r in enumerate(roles):
        if r == INTAKE and i not in single_pos:
            raise TableauError(f"row {S.row_labels[i]} is marked intake but has no intake column")
        if r == EXCRETION and i not in single_neg:
            raise TableauError(f"row {S.row_labels[i]} is marked excretion but has no excretion column")


def _normalize(vec: list[Fraction]) -> list[Fraction]:
    lead = next(v for v in vec if v != 0)
    return [v / lead for v in vec] if lead != 1 else vec


def _prune(rows: list[tuple[list[Fraction], list[Fraction], object]], m: int) -> list:
    """Drop rows whose pathway support strictly contains another's; keep one row per support."""
    supports = [frozenset(j for j in range(m) if r[0][j] != 0) for r in rows]
    keep = []
    seen = set()
    for i, s in enumerate(supports):
        if s in seen:
            continue
        if any(t < s for t in supports):
            continue
        seen.add(s)
        keep.append(rows[i])
    return keep


def extreme_pathways(S: RationalMatrix, roles: Sequence[str]) -> PositiveBasis:
    """Enumerate the extreme rays of ``{f >= 0 : S f = 0}``.

    Starts from ``V = I`` and ``C = S^T`` and cancels the columns of ``C`` one
    metabolite at a time: internal rows first, in row order, then excretion rows, then intake rows.
    """
    _check_roles(S, roles)
    m = S.ncols
    order = [i for i, r in enumerate(roles) if r == INTERNAL]
    order += [i for i, r in enumerate(roles) if r == EXCRETION]
    order += [i for i, r in enumerate(roles) if r == INTAKE]

    # each tableau row: (V part, C part, provenance)
    table = []
    for j in range(m):
        v = [Fraction(int(j == k)) for k in range(m)]
        table.append((v, list(S.column(j)), S.col_labels[j]))

    for c in order:
        pos = [r for r in table if r[1][c] > 0]
        neg = [r for r in table if r[1][c] < 0]
        if not pos and not neg:
            continue
        new = [r for r in table if r[1][c] == 0]
        name = S.row_labels[c]
        for p in pos:
            for q in neg:
                k = -q[1][c] / p[1][c]
                v = [k * a + b for a, b in zip(p[0], q[0])]
                cc = [k * a + b for a, b in zip(p[1], q[1])]
                cc[c] = Fraction(0)
                new.append((v, cc, (name, p[2], q[2])))
        table = _prune(new, m)

    if any(any(x != 0 for x in r[1]) for r in table):
        raise TableauError("tableau did not reduce C to zero")
    paths = [Pathway(tuple(_normalize(r[0])), r[2]) for r in table]
    paths.sort(key=lambda p: p.vector, reverse=True)
    return PositiveBasis(tuple(paths), S.col_labels, tuple(S.row_labels[c] for c in order))


def nullspace_basis(S: RationalMatrix) -> list[Vector]:
    """Standard (possibly sign-mixed) basis of N(S), one vector per free column."""
    return S.nullspace()


# verification


@dataclass(frozen=True)
class BasisReport:
    independent: bool
    contained: bool
    spanning: bool
    dependent_rows: tuple[int, ...] = ()
    bad_rows: tuple[int, ...] = ()
    uncovered: tuple[Vector, ...] = ()
    samples_checked: int = 0

    @property
    def ok(self) -> bool:
        return self.independent and self.contained and self.spanning

    def summary(self) -> str:
        def mark(flag):
            return "pass" if flag else "FAIL"

        return (
            f"positive independence: {mark(self.independent)}; "
            f"nullspace containment: {mark(self.contained)}; "
            f"spanning ({self.samples_checked} samples): {mark(self.spanning)}"
        )


def implicit_zero_edges(S: RationalMatrix) -> tuple[list[int], dict[int, Vector]]:
    """Coordinates forced to zero on ``{f >= 0 : S f = 0}``, plus a witness for every other coordinate."""
    n, m = S.shape
    zeros = []
    witnesses = {}
    cols = [S.column(j) for j in range(m)]
    for j in range(m):
        gens = [col + (Fraction(int(k == j)),) for k, col in enumerate(cols)]
        res = cone_membership(gens, (Fraction(0),) * n + (Fraction(1),))
        if res.feasible:
            witnesses[j] = res.coefficients
        else:
            zeros.append(j)
    return zeros, witnesses


def sample_nonnegative_nullspace(
    S: RationalMatrix, count: int, rng: random.Random | None = None, denominator: int = 6
) -> list[Vector]:
    """Random exact vectors of ``N(S) ∩ R_+^m`` by rejection from a standard nullspace basis.

    Coordinates that the cone forces to zero are removed first, so the cone is
    full-dimensional in the remaining nullspace and rejection has a positive
    acceptance rate. When plain rejection stalls, candidates are shifted
    towards an interior point.
    """
    rng = rng or random.Random(0)
    n, m = S.shape
    zeros, witnesses = implicit_zero_edges(S)
    live = [j for j in range(m) if j not in set(zeros)]
    if not live:
        return [(Fraction(0),) * m] * count
    sub = S.submatrix(range(n), live)
    basis = sub.nullspace()
    interior = [sum((witnesses[j][k] for j in live), Fraction(0)) for k in range(m)]
    interior = [interior[k] for k in live]

    out: list[Vector] = []
    attempts = 0
    shift = Fraction(0)
    while len(out) < count:
        attempts += 1
        if attempts % 50 == 0:
            # too many rejections in a row; lean on the interior point
            shift += Fraction(1, 4)
        coeffs = [Fraction(rng.randint(-denominator, denominator), denominator) for _ in basis]
        cand = [shift * p for p in interior]
        for a, vec in zip(coeffs, basis):
            if a:
                cand = [c + a * v for c, v in zip(cand, vec)]
        if any(c < 0 for c in cand) or all(c == 0 for c in cand):
            continue
        full = [Fraction(0)] * m
        for k, j in enumerate(live):
            full[j] = cand[k]
        out.append(tuple(full))
        attempts = 0
        shift = Fraction(0)
    return out


def verify_positive_basis(
    basis: PositiveBasis | Sequence[Sequence],
    S: RationalMatrix,
    samples: int = 100,
    rng: random.Random | None = None,
    extra: Sequence[Sequence] = (),
) -> BasisReport:
    """Check positive independence, containment and spanning of a candidate positive basis.

    Spanning is tested on ``samples`` random cone vectors plus any ``extra``
    vectors supplied by the caller.
    """
    rows = basis.rows if isinstance(basis, PositiveBasis) else [as_vector(r) for r in basis]
    dependent = []
    for i, r in enumerate(rows):
        others = rows[:i] + rows[i + 1:]
        if cone_membership(others, r).feasible:
            dependent.append(i)
    bad = [i for i, r in enumerate(rows) if any(v < 0 for v in r) or any(v != 0 for v in S @ r)]
    targets = sample_nonnegative_nullspace(S, samples, rng) if samples else []
    targets += [as_vector(t) for t in extra]
    uncovered = tuple(t for t in targets if not cone_membership(rows, t).feasible)
    return BasisReport(
        independent=not dependent,
        contained=not bad,
        spanning=not uncovered,
        dependent_rows=tuple(dependent),
        bad_rows=tuple(bad),
        uncovered=uncovered,
        samples_checked=len(targets),
    )
