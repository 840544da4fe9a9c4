"""Exact linear algebra over the rationals.

Rows are reduced fraction-free: every stored row is a primitive integer
vector (entries coprime, pivot positive), and elimination uses
``row*pivot - factor*basis_row`` followed by division by the gcd, so no
rational ever appears inside the elimination loop.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np


def integer_row(row: Iterable) -> list[int]:
    """Scale a rational row to a primitive integer row (same span)."""
    fr = [Fraction(x) for x in row]
    den = 1
    for x in fr:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in fr]
    return _primitive(ints)


def _primitive(ints: list[int]) -> list[int]:
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return ints


class EchelonBasis:
    """Incrementally maintained row-echelon basis of a rational row space.

    ``add`` reduces the incoming row against the current pivots and keeps it
    only if something survives; the indices of kept rows form a basis of the
    span of everything offered so far, chosen greedily in offer order.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []
        self.kept: list[int] = []
        self._offered = 0

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, row: Sequence) -> list[int]:
        r = integer_row(row)
        if len(r) != self.ncols:
            raise ValueError(f"row has {len(r)} entries, expected {self.ncols}")
        for b, p in zip(self.rows, self.pivots):
            c = r[p]
            if c:
                bp = b[p]
                r = _primitive([x * bp - c * y for x, y in zip(r, b)])
        return r

    def add(self, row: Sequence) -> bool:
        """Offer a row; return True iff it increased the rank."""
        idx = self._offered
        self._offered += 1
        r = self.reduce(row)
        p = next((j for j, x in enumerate(r) if x), None)
        if p is None:
            return False
        if r[p] < 0:
            r = [-x for x in r]
        self.rows.append(r)
        self.pivots.append(p)
        self.kept.append(idx)
        return True

    def contains(self, row: Sequence) -> bool:
        return not any(self.reduce(row))


class FloatEchelonBasis:
    """Floating-point counterpart of :class:`EchelonBasis`.

    A row is kept when its residual after orthogonal projection onto the
    current basis has max-norm above ``tol`` relative to the row's own
    max-norm.
    """

    def __init__(self, ncols: int, tol: float = 1e-9):
        if not 0 < tol < 1:
            raise ValueError(f"tolerance must lie in (0, 1), got {tol}")
        self.ncols = ncols
        self.tol = tol
        self._q: list[np.ndarray] = []
        self.kept: list[int] = []
        self._offered = 0

    @property
    def rank(self) -> int:
        return len(self._q)

    def add(self, row: Sequence) -> bool:
        idx = self._offered
        self._offered += 1
        v = np.asarray([float(x) for x in row], dtype=float)
        scale = np.max(np.abs(v)) if v.size else 0.0
        if scale == 0.0:
            return False
        v = v / scale
        for _ in range(2):  # reorthogonalize once for stability
            for q in self._q:
                v = v - (q @ v) * q
        if np.max(np.abs(v)) <= self.tol:
            return False
        self._q.append(v / np.linalg.norm(v))
        self.kept.append(idx)
        return True


def rank(rows: Iterable[Sequence], ncols: int) -> int:
    basis = EchelonBasis(ncols)
    for r in rows:
        basis.add(r)
    return basis.rank


class InconsistentSystem(ValueError):
    """Linear system with no exact solution."""

    def __init__(self, message: str, row_index: int):
        super().__init__(message)
        self.row_index = row_index


def solve(rows: Sequence[Sequence], rhs: Sequence) -> tuple[list[Fraction], int]:
    """Solve ``rows @ x = rhs`` exactly by Gauss-Jordan elimination.

    Returns ``(x, nullity)``.  When the system is underdetermined, ``x`` is
    the basic solution with every free variable set to zero.  Raises
    :class:`InconsistentSystem` carrying the index of the first equation
    that contradicts the ones before it.
    """
    ncols = len(rows[0]) if rows else 0
    aug = EchelonBasis(ncols + 1)
    coef = EchelonBasis(ncols)
    for i, (r, b) in enumerate(zip(rows, rhs)):
        coef.add(r)
        aug.add(list(r) + [b])
        if aug.rank != coef.rank:
            raise InconsistentSystem(f"equation {i} is inconsistent with equations 0..{i - 1}", i)

    # back-substitute on the echelon form of the augmented system
    red = [[Fraction(x) for x in row] for row in aug.rows]
    piv = aug.pivots
    for k in range(len(red) - 1, -1, -1):
        p = piv[k]
        lead = red[k][p]
        red[k] = [x / lead for x in red[k]]
        for j in range(k):
            c = red[j][p]
            if c:
                red[j] = [x - c * y for x, y in zip(red[j], red[k])]
    x = [Fraction(0)] * ncols
    for row, p in zip(red, piv):
        x[p] = row[-1]
    return x, ncols - coef.rank
