"""Dense matrices over the rationals.

Everything structural in this package (ranks, nullspaces, equilibrium solves)
goes through :class:`RationalMatrix` so that integer-valued answers never
depend on a floating-point tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

Vector = tuple[Fraction, ...]


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions, floats (exactly) and decimal strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not numeric entries")
    if isinstance(value, (int, Rational, np.integer)):
        return Fraction(int(value)) if isinstance(value, np.integer) else Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"non-finite entry {value!r}")
        return Fraction(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def as_vector(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form with first-nonzero pivoting."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        lead = m[r][c]
        if lead != 1:
            m[r] = [v / lead for v in m[r]]
        pivot_row = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], pivot_row)]
        pivots.append(c)
        r += 1
    return m, pivots


class RationalMatrix:
    """Immutable dense matrix of :class:`fractions.Fraction` entries with labels.

    Row and column labels default to ``"r0", "r1", ...`` and ``"c0", ...``.
    Labels must be unique and match the dimensions.
    """

    __slots__ = ("_rows", "row_labels", "col_labels")

    def __init__(
        self,
        rows: Iterable[Iterable],
        row_labels: Sequence[str] | None = None,
        col_labels: Sequence[str] | None = None,
        ncols: int | None = None,
    ):
        data = tuple(as_vector(r) for r in rows)
        if data:
            width = len(data[0])
            if any(len(r) != width for r in data):
                raise ValueError("ragged rows")
            if ncols is not None and ncols != width:
                raise ValueError(f"rows have {width} columns, expected {ncols}")
        else:
            width = ncols if ncols is not None else (len(col_labels) if col_labels is not None else 0)
        row_labels = tuple(row_labels) if row_labels is not None else tuple(f"r{i}" for i in range(len(data)))
        col_labels = tuple(col_labels) if col_labels is not None else tuple(f"c{j}" for j in range(width))
        if len(row_labels) != len(data) or len(col_labels) != width:
            raise ValueError(
                f"label lengths ({len(row_labels)}, {len(col_labels)}) do not match shape ({len(data)}, {width})"
            )
        if len(set(row_labels)) != len(row_labels) or len(set(col_labels)) != len(col_labels):
            raise ValueError("duplicate labels")
        self._rows = data
        self.row_labels = row_labels
        self.col_labels = col_labels

    # construction helpers

    @classmethod
    def zeros(cls, nrows: int, ncols: int, row_labels=None, col_labels=None) -> RationalMatrix:
        return cls([[0] * ncols for _ in range(nrows)], row_labels, col_labels, ncols=ncols)

    @classmethod
    def identity(cls, n: int, labels: Sequence[str] | None = None) -> RationalMatrix:
        return cls([[int(i == j) for j in range(n)] for i in range(n)], labels, labels, ncols=n)

    def relabel(self, row_labels=None, col_labels=None) -> RationalMatrix:
        return RationalMatrix(
            self._rows,
            row_labels if row_labels is not None else self.row_labels,
            col_labels if col_labels is not None else self.col_labels,
            ncols=self.ncols,
        )

    # basic access

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), len(self.col_labels)

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return len(self.col_labels)

    @property
    def rows(self) -> tuple[Vector, ...]:
        return self._rows

    def row(self, i: int) -> Vector:
        return self._rows[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        return self._rows[i][j]

    def entry(self, row_label: str, col_label: str) -> Fraction:
        return self._rows[self.row_labels.index(row_label)][self.col_labels.index(col_label)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in r) for r in self._rows)
        return f"RationalMatrix({self.nrows}x{self.ncols}: [{body}])"

    # arithmetic

    @property
    def T(self) -> RationalMatrix:
        return RationalMatrix(zip(*self._rows) if self._rows else [], self.col_labels, self.row_labels, ncols=self.nrows)

    def __neg__(self) -> RationalMatrix:
        return RationalMatrix([[-v for v in r] for r in self._rows], self.row_labels, self.col_labels, ncols=self.ncols)

    def __add__(self, other: RationalMatrix) -> RationalMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return RationalMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)],
            self.row_labels, self.col_labels, ncols=self.ncols,
        )

    def __sub__(self, other: RationalMatrix) -> RationalMatrix:
        return self + (-other)

    def scale(self, factor) -> RationalMatrix:
        k = to_fraction(factor)
        return RationalMatrix([[k * v for v in r] for r in self._rows], self.row_labels, self.col_labels, ncols=self.ncols)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = [other.column(j) for j in range(other.ncols)]
            return RationalMatrix(
                [[sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)) for c in cols] for r in self._rows],
                self.row_labels, other.col_labels, ncols=other.ncols,
            )
        vec = as_vector(other)
        if len(vec) != self.ncols:
            raise ValueError(f"vector of length {len(vec)} does not match {self.ncols} columns")
        return tuple(sum((a * b for a, b in zip(r, vec) if a and b), Fraction(0)) for r in self._rows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> RationalMatrix:
        return RationalMatrix(
            [[self._rows[i][j] for j in cols] for i in rows],
            [self.row_labels[i] for i in rows],
            [self.col_labels[j] for j in cols],
            ncols=len(cols),
        )

    def column_sums(self) -> Vector:
        return tuple(sum(self.column(j), Fraction(0)) for j in range(self.ncols))

    def is_zero(self) -> bool:
        return all(v == 0 for r in self._rows for v in r)

    # elimination-based queries

    def rref(self) -> tuple[RationalMatrix, list[int]]:
        m, pivots = _rref([list(r) for r in self._rows], self.ncols)
        return RationalMatrix(m, self.row_labels, self.col_labels, ncols=self.ncols), pivots

    def rank(self) -> int:
        return len(_rref([list(r) for r in self._rows], self.ncols)[1])

    def nullspace(self) -> list[Vector]:
        """Basis of the right nullspace, one vector per free column of the RREF."""
        m, pivots = _rref([list(r) for r in self._rows], self.ncols)
        pivot_set = set(pivots)
        basis = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v = [Fraction(0)] * self.ncols
            v[free] = Fraction(1)
            for r, p in enumerate(pivots):
                v[p] = -m[r][free]
            basis.append(tuple(v))
        return basis

    def determinant(self) -> Fraction:
        n, k = self.shape
        if n != k:
            raise ValueError("determinant of a non-square matrix")
        m = [list(r) for r in self._rows]
        det = Fraction(1)
        for c in range(n):
            p = next((i for i in range(c, n) if m[i][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                m[c], m[p] = m[p], m[c]
                det = -det
            lead = m[c][c]
            det *= lead
            for i in range(c + 1, n):
                if m[i][c] != 0:
                    factor = m[i][c] / lead
                    m[i] = [a - factor * b for a, b in zip(m[i], m[c])]
        return det

    def solve(self, rhs: Iterable) -> Vector:
        """Unique solution of ``self @ x = rhs``; raises if singular or non-square."""
        n, k = self.shape
        if n != k:
            raise ValueError("solve requires a square matrix")
        b = as_vector(rhs)
        if len(b) != n:
            raise ValueError("right-hand side has wrong length")
        aug = [list(r) + [bi] for r, bi in zip(self._rows, b)]
        m, pivots = _rref(aug, n)
        if pivots != list(range(n)):
            raise np.linalg.LinAlgError("matrix is singular")
        return tuple(m[i][n] for i in range(n))

    def inverse(self) -> RationalMatrix:
        n, k = self.shape
        if n != k:
            raise ValueError("inverse requires a square matrix")
        aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self._rows)]
        m, pivots = _rref(aug, n)
        if pivots != list(range(n)):
            raise np.linalg.LinAlgError("matrix is singular")
        return RationalMatrix([r[n:] for r in m], self.col_labels, self.row_labels, ncols=n)

    # export

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self._rows], dtype=float).reshape(self.shape)

    def to_csv(self) -> str:
        lines = [",".join(["", *self.col_labels])]
        for label, r in zip(self.row_labels, self._rows):
            lines.append(",".join([label, *(str(v) for v in r)]))
        return "\n".join(lines) + "\n"
