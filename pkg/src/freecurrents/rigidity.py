"""Span and rigidity experiments built on counting currents of walk prefixes.

The finite-level picture: counting vectors of the prefixes xi(n), n >= n0,
should span the whole signed weight space at every level M; the span is
checked by exact elimination.  Around it sit the pieces of the argument that
can be run at desk scale: the two-prefix approximation of a target counting
current, recovery of rose/graph metrics from length data, and falsification
of equality between two given trees.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import words as W
from .currents import (
    LevelMismatch,
    WeightVector,
    check_membership,
    counting_weights,
    level_space,
    project_to,
)
from .linalg import EchelonBasis, FloatEchelonBasis, InconsistentSystem, solve
from .outer_space import MarkedMetricGraph, edge_occurrence_vector, translation_length
from .walks import Trajectory

log = logging.getLogger(__name__)


class BudgetExhausted(RuntimeError):
    """Search ran out of budget; ``best`` carries the closest attempt."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SpanReport:
    level: int
    target_dim: int
    rows_consumed: int
    rank: int
    basis: tuple  # labels (e.g. prefix lengths n) of the rows kept as a basis
    history: tuple = ()  # (label, rank after it) for every row consumed

    @property
    def saturated(self) -> bool:
        return self.rank == self.target_dim

    @property
    def verdict(self) -> str:
        return "saturated" if self.saturated else "not-saturated-at-budget"


def _new_basis(ncols: int, mode: str, tol: float):
    if mode == "exact":
        return EchelonBasis(ncols)
    if mode == "float":
        return FloatEchelonBasis(ncols, tol)
    raise ValueError(f"mode must be 'exact' or 'float', got {mode!r}")


def span_rank(rows: Sequence[WeightVector], mode: str = "exact", tol: float = 1e-9,
              labels: Sequence | None = None, rank: int | None = None, level: int | None = None) -> SpanReport:
    """Rank of a list of signed weight vectors against dim of the level space."""
    rows = list(rows)
    if rows:
        rank, level = rows[0].rank, rows[0].level
    elif rank is None or level is None:
        raise ValueError("empty row list needs rank and level")
    labels = list(range(len(rows))) if labels is None else list(labels)
    space = level_space(rank, level)
    basis = _new_basis(space.ambient, mode, tol)
    history = []
    for label, p in zip(labels, rows):
        if (p.rank, p.level) != (rank, level):
            raise LevelMismatch("rows mix ranks or levels")
        verdict = check_membership(p, signed=True)
        if not verdict:
            raise ValueError(f"row {label} is not in the signed weight space: {verdict.violations[0]}")
        basis.add(p.numerators)
        history.append((label, basis.rank))
    return SpanReport(level, space.dimension, len(rows), basis.rank,
                      tuple(labels[i] for i in basis.kept), tuple(history))


def prefix_span_experiment(xi: Trajectory, n0: int, level: int, budget: int,
                           mode: str = "exact", tol: float = 1e-9) -> SpanReport:
    """Stream counting vectors of xi(n), n = n0..budget, until they span the level space."""
    if not 1 <= n0 <= budget:
        raise ValueError(f"need 1 <= n0 <= budget, got n0={n0}, budget={budget}")
    space = level_space(xi.rank, level)
    basis = _new_basis(space.ambient, mode, tol)
    labels, history = [], []
    xi.extend(budget)
    for n in range(n0, budget + 1):
        c = W.CyclicWord.of(xi.prefix(n))
        labels.append(n)
        if c is not None:
            basis.add(counting_weights(c, level, xi.rank).numerators)
        else:
            basis.add([0] * space.ambient)
        history.append((n, basis.rank))
        if basis.rank == space.dimension:
            break
    return SpanReport(level, space.dimension, len(labels), basis.rank,
                      tuple(labels[i] for i in basis.kept), tuple(history))


def cone_span_check(rank: int, level: int, sample: Sequence[W.CyclicWord], mode: str = "exact") -> SpanReport:
    if not sample:
        raise ValueError("sample must be nonempty")
    rows = [counting_weights(w, level, rank) for w in sample]
    return span_rank(rows, mode=mode, labels=[str(w) for w in sample])


def cyclic_words_up_to(rank: int, max_length: int) -> list[W.CyclicWord]:
    """All cyclic words of length 1..max_length, one per conjugacy class, sorted."""
    out = []
    for m in range(1, max_length + 1):
        for w in W.enumerate_sphere(rank, m):
            if w[-1] != -w[0] and W.least_rotation(w) == w:
                out.append(W.CyclicWord(w))
    return out


# -- approximating a target counting current ------------------------------------

def choose_connectors(v: Sequence[int], w: W.CyclicWord, level: int, rank: int) -> tuple[W.Word, W.Word]:
    """Lexicographically least (s, t) of length ``level`` making v s (w^n t)^m reduced as written.

    The word is then also cyclically reduced for all m, n >= 1.
    """
    v = tuple(v)
    c = w.letters
    if len(v) != level:
        raise ValueError(f"|v|={len(v)} differs from level {level}")
    sphere = W.enumerate_sphere(rank, level)
    s_ok = [s for s in sphere if s[0] != -v[-1] and s[-1] != -c[0]]
    t_ok = [t for t in sphere if t[0] != -c[-1] and t[-1] != -c[0] and t[-1] != -v[0]]
    if not s_ok or not t_ok:
        raise AssertionError("no admissible connectors; impossible for rank >= 2")
    return s_ok[0], t_ok[0]


@dataclass(frozen=True)
class ApproximationStep:
    n: int
    start: int  # 0-based position where v s (w^n t)^2 begins
    short_prefix: int  # length n1 of P1 = v f v s w^n t
    long_prefix: int  # length n2 of P2 = v f v s (w^n t)^2
    error: Fraction
    block_identity: bool  # tau(P2) - tau(P1) == tau(w^n t)
    displayed_identity: bool  # tau(P2) - tau(P1) == tau(v s w^n t)


@dataclass(frozen=True)
class ApproximationCertificate:
    target: str
    level: int
    v: str
    s: str
    t: str
    n: int
    short_prefix: int
    long_prefix: int
    coefficients: tuple  # ((n2, +1/n), (n1, -1/n))
    error: Fraction
    table: tuple = field(default=(), repr=False)  # ApproximationStep per n tried
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)


def max_error(mu: WeightVector, target: WeightVector) -> Fraction:
    """max over 1 <= |u| <= M of |<u, mu> - <u, target>|."""
    diff = mu - target
    worst = Fraction(0)
    for lv in range(1, diff.level + 1):
        p = project_to(diff, lv)
        worst = max(worst, Fraction(max(abs(x) for x in p.numerators), p.denominator))
    return worst


def _find(letters: list, pattern: tuple, start: int) -> int:
    m = len(pattern)
    first = pattern[0]
    for i in range(start, len(letters) - m + 1):
        if letters[i] == first and tuple(letters[i:i + m]) == pattern:
            return i
    return -1


def approximate_target(xi: Trajectory, w: W.CyclicWord, level: int, n0: int, eps,
                       max_n: int = 200, search_length: int = 100_000) -> ApproximationCertificate:
    """Approximate tau_M(eta_w) by (1/n)(eta_{P2} - eta_{P1}) for two prefixes of xi.

    P1 = v f v s w^n t and P2 = P1 w^n t, with v = xi(M) and (s, t) from
    :func:`choose_connectors`; the occurrence of v s (w^n t)^2 must start at a
    0-based position >= max(n0, M).  It is searched for in the first
    ``search_length`` letters of xi; a universal trajectory that lacks it is
    spliced (the pattern is inserted at that position).  n runs 1..max_n until
    the exact error is <= eps.
    """
    eps = Fraction(eps)
    rank = xi.rank
    xi.extend(max(level, n0) + 1)
    v = xi.prefix(level)
    s, t = choose_connectors(v, w, level, rank)
    target = counting_weights(w, level, rank)
    table = []
    best = None
    lo = max(n0, level)
    for n in range(1, max_n + 1):
        block = w.letters * n + t
        pattern = v + s + block + block
        xi.extend(min(search_length, max(lo + len(pattern), len(xi))))
        start = _find(xi.letters, pattern, lo)
        source = xi
        if start < 0:
            if xi.source != "universal":
                continue
            source = xi.splice(lo, pattern)
            source.extend(lo + 2 * len(pattern) + 2)
            start = _find(source.letters, pattern, lo)
        n1 = start + len(v) + len(s) + len(block)
        n2 = n1 + len(block)
        p1, p2 = source.prefix(n1), source.prefix(n2)
        diff = counting_weights(W.CyclicWord.of(p2), level, rank) - counting_weights(W.CyclicWord.of(p1), level, rank)
        mu = diff / n
        err = max_error(mu, target)
        block_ok = diff == counting_weights(W.CyclicWord(block), level, rank)
        displayed_ok = diff == counting_weights(W.CyclicWord.of(v + s + block), level, rank)
        log.info("n=%d start=%d error=%s block_identity=%s displayed_identity=%s",
                 n, start, err, block_ok, displayed_ok)
        step = ApproximationStep(n, start, n1, n2, err, block_ok, displayed_ok)
        table.append(step)
        if best is None or err < best[0].error:
            best = (step, source)
        if err <= eps:
            return ApproximationCertificate(
                str(w), level, W.format_word(v), W.format_word(s), W.format_word(t), n, n1, n2,
                ((n2, Fraction(1, n)), (n1, Fraction(-1, n))), err, tuple(table), source,
            )
    raise BudgetExhausted(
        f"error <= {eps} not reached for n <= {max_n}"
        + (f"; best n={best[0].n} with error {best[0].error}" if best else "; pattern never found"),
        best=tuple(table),
    )


# -- metric recovery and tree comparison -------------------------------------------

@dataclass(frozen=True)
class Recovery:
    lengths: dict  # positive edge id -> Fraction
    unique: bool
    nullity: int


class InconsistentLengths(ValueError):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


def recover_metric(topology: MarkedMetricGraph, oracle: Sequence[tuple]) -> Recovery:
    """Solve sum_e count_e(g) L(e) = l(g) over the oracle data, exactly.

    Non-unique systems return the basic solution (free lengths set to 0)
    with ``unique=False`` and the nullspace dimension.
    """
    edges = topology.positive_edges
    rows, rhs, words = [], [], []
    for g, ell in oracle:
        g = tuple(g)
        ell = Fraction(ell)
        if W.CyclicWord.of(g) is None:
            if ell != 0:
                raise InconsistentLengths(f"identity assigned length {ell}", g)
            continue
        occ = edge_occurrence_vector(topology, g)
        rows.append([occ[e] for e in edges])
        rhs.append(ell)
        words.append(g)
    if not rows:
        return Recovery({e: Fraction(0) for e in edges}, False, len(edges))
    try:
        x, nullity = solve(rows, rhs)
    except InconsistentSystem as exc:
        g = words[exc.row_index]
        raise InconsistentLengths(f"length data for {W.format_word(g)} contradicts earlier rows", g) from exc
    return Recovery(dict(zip(edges, x)), nullity == 0, nullity)


@dataclass(frozen=True)
class Comparison:
    separating_n: int | None
    lengths: tuple | None = None  # (||xi(n)||_T1, ||xi(n)||_T2) at the separating n

    @property
    def agree(self) -> bool:
        return self.separating_n is None


def distinguish_trees(T1: MarkedMetricGraph, T2: MarkedMetricGraph, xi: Trajectory, budget: int) -> Comparison:
    """First n <= budget with ||xi(n)||_T1 != ||xi(n)||_T2, or agreement."""
    if T1.rank != T2.rank or T1.rank != xi.rank:
        raise LevelMismatch("trees and trajectory must share the rank")
    xi.extend(budget)
    for n in range(1, budget + 1):
        g = xi.prefix(n)
        l1, l2 = translation_length(T1, g), translation_length(T2, g)
        if l1 != l2:
            return Comparison(n, (l1, l2))
    return Comparison(None)


def prefix_length_data(T: MarkedMetricGraph, xi: Trajectory, n0: int, count: int) -> list[tuple]:
    """(xi(n), ||xi(n)||_T) for n0 <= n <= n0 + count."""
    xi.extend(n0 + count)
    return [(xi.prefix(n), translation_length(T, xi.prefix(n))) for n in range(n0, n0 + count + 1)]

