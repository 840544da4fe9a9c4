"""Level-M weight vectors of (signed) geodesic currents.

A :class:`WeightVector` lists the weights of a current on every reduced word
of length M, in the canonical sphere order of :mod:`freecurrents.words`.  It
is stored as integer numerators over one common positive denominator, kept
in lowest terms, which makes the frequent integer-valued counting vectors
cheap while every entry is still an exact rational.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from . import words as W
from .linalg import EchelonBasis

MAX_ENTRIES = 1_100_000


class CapacityError(ValueError):
    """Requested level is too large to store densely."""


class LevelMismatch(ValueError):
    pass


class HypothesisError(ValueError):
    """Inputs do not satisfy the hypotheses of an identity being checked."""


def _check_capacity(rank: int, level: int) -> int:
    W.check_rank(rank)
    d = W.sphere_size(rank, level)
    if d > MAX_ENTRIES:
        raise CapacityError(f"level {level} at rank {rank} needs {d} entries (limit {MAX_ENTRIES})")
    return d


@dataclass(frozen=True)
class WeightVector:
    rank: int
    level: int
    numerators: tuple
    denominator: int = 1

    def __post_init__(self):
        d = _check_capacity(self.rank, self.level)
        nums = tuple(int(x) for x in self.numerators)
        if len(nums) != d:
            raise ValueError(f"expected {d} entries at rank {self.rank}, level {self.level}, got {len(nums)}")
        den = int(self.denominator)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            nums, den = tuple(-x for x in nums), -den
        g = den
        for x in nums:
            g = gcd(g, x)
            if g == 1:
                break
        if g > 1:
            nums, den = tuple(x // g for x in nums), den // g
        object.__setattr__(self, "numerators", nums)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def from_fractions(cls, rank: int, level: int, values: Iterable) -> "WeightVector":
        fr = [Fraction(x) for x in values]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        return cls(rank, level, tuple(x.numerator * (den // x.denominator) for x in fr), den)

    @classmethod
    def zero(cls, rank: int, level: int) -> "WeightVector":
        return cls(rank, level, (0,) * _check_capacity(rank, level))

    @property
    def entries(self) -> tuple:
        den = self.denominator
        return tuple(Fraction(x, den) for x in self.numerators)

    def __len__(self) -> int:
        return len(self.numerators)

    def __getitem__(self, v) -> Fraction:
        """Weight at a word (tuple or text) or at a sphere index."""
        if isinstance(v, str):
            v = W.parse_word(v, self.rank)
        if isinstance(v, tuple):
            if len(v) != self.level:
                raise LevelMismatch(f"word of length {len(v)} queried at level {self.level}")
            v = W.index_of(v, self.rank)
        return Fraction(self.numerators[v], self.denominator)

    def as_dict(self) -> dict:
        sphere = W.enumerate_sphere(self.rank, self.level)
        return {W.format_word(v): x for v, x in zip(sphere, self.entries)}

    def support(self) -> dict:
        return {k: x for k, x in self.as_dict().items() if x}

    def _same_space(self, other: "WeightVector") -> None:
        if (self.rank, self.level) != (other.rank, other.level):
            raise LevelMismatch(
                f"cannot combine rank {self.rank} level {self.level} with rank {other.rank} level {other.level}"
            )

    def __add__(self, other: "WeightVector") -> "WeightVector":
        return linear_combination([(1, self), (1, other)])

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return linear_combination([(1, self), (-1, other)])

    def __neg__(self) -> "WeightVector":
        return WeightVector(self.rank, self.level, tuple(-x for x in self.numerators), self.denominator)

    def __mul__(self, c) -> "WeightVector":
        c = Fraction(c)
        return WeightVector(
            self.rank, self.level, tuple(x * c.numerator for x in self.numerators), self.denominator * c.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, c) -> "WeightVector":
        return self * (1 / Fraction(c))

    def is_integral(self) -> bool:
        return self.denominator == 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "weight"])
        for k, x in self.as_dict().items():
            writer.writerow([k, format_rational(x)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, rank: int) -> "WeightVector":
        rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#"))]
        if not rows or rows[0] != ["word", "weight"]:
            raise ValueError("expected CSV header 'word,weight'")
        body = rows[1:]
        if not body:
            raise ValueError("no weights in CSV")
        level = len(W.parse_word(body[0][0], rank))
        values = [Fraction(0)] * _check_capacity(rank, level)
        for word, weight in body:
            values[W.index_of(W.parse_word(word, rank), rank)] = parse_rational(weight)
        return cls.from_fractions(rank, level, values)


def format_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid rational {text!r}") from exc


# -- counting currents -------------------------------------------------------

def window_indices(letters: Sequence[int], rank: int, level: int, periodic: bool) -> list[int]:
    """Sphere indices of the length-``level`` windows of a word.

    For a periodic (cyclic) word there is one window per position, read
    around the circle as many times as needed; for a linear word only the
    ``len - level + 1`` windows that fit.
    """
    n = len(letters)
    k = 2 * rank - 1
    if n == 0:
        return []
    keys = [W.letter_key(x) for x in letters]
    # allowed-rank of each letter relative to its predecessor
    step = [0] * n
    for i in range(n):
        if i == 0 and not periodic:
            continue
        kp = W.letter_key(-letters[i - 1])
        step[i] = keys[i] - (kp < keys[i])
    starts = range(n) if periodic else range(n - level + 1)
    out = []
    for i in starts:
        idx = keys[i]
        for j in range(1, level):
            idx = idx * k + step[(i + j) % n]
        out.append(idx)
    return out


def counting_weights(w: W.CyclicWord, level: int, rank: int | None = None) -> WeightVector:
    """tau_M(eta_w): weight at v = occurrences of v plus occurrences of v^-1 in w."""
    if rank is None:
        rank = max(2, w.rank_needed)
    elif w.rank_needed > rank:
        raise W.WordError(f"cyclic word {w} uses letters beyond rank {rank}")
    d = _check_capacity(rank, level)
    counts = [0] * d
    for idx in window_indices(w.letters, rank, level, periodic=True):
        counts[idx] += 1
    for idx in window_indices(W.invert(w.letters), rank, level, periodic=True):
        counts[idx] += 1
    return WeightVector(rank, level, tuple(counts))


def word_weights(g: Sequence[int], level: int, rank: int) -> WeightVector:
    """Counting weights of the conjugacy class of a reduced word (zero for the identity)."""
    c = W.CyclicWord.of(g)
    if c is None:
        return WeightVector.zero(rank, level)
    return counting_weights(c, level, rank)


# -- projections and constraints -------------------------------------------

def project(p: WeightVector) -> WeightVector:
    """pi_M: the weight at u in S(M-1) is the sum of p over the extensions ua."""
    if p.level < 2:
        raise ValueError("cannot project below level 1")
    k = 2 * p.rank - 1
    nums = p.numerators
    return WeightVector(p.rank, p.level - 1, tuple(sum(nums[i:i + k]) for i in range(0, len(nums), k)), p.denominator)


def project_to(p: WeightVector, level: int) -> WeightVector:
    """Iterated projection down to ``level``."""
    if not 1 <= level <= p.level:
        raise ValueError(f"cannot project level {p.level} to level {level}")
    if level == p.level:
        return p
    block = (2 * p.rank - 1) ** (p.level - level)
    nums = p.numerators
    return WeightVector(p.rank, level, tuple(sum(nums[i:i + block]) for i in range(0, len(nums), block)), p.denominator)


def _flip_partner(rank: int, level: int) -> list[int]:
    return [W.index_of(W.invert(v), rank) for v in W.enumerate_sphere(rank, level)]


def _kirchhoff_terms(rank: int, level: int) -> list[tuple[W.Word, list[int], list[int]]]:
    """For each u in S(M-1): (u, indices of ua, indices of bu)."""
    k = 2 * rank - 1
    out = []
    for iu, u in enumerate(W.enumerate_sphere(rank, level - 1)):
        right = list(range(iu * k, iu * k + k))
        left = [W.index_of((b,) + u, rank) for b in W.letters(rank) if b != -u[0]]
        out.append((u, right, left))
    return out


@dataclass(frozen=True)
class Violation:
    kind: str  # "flip" | "kirchhoff" | "positivity"
    word: str
    lhs: Fraction
    rhs: Fraction

    def __str__(self) -> str:
        if self.kind == "positivity":
            return f"positivity at {self.word}: weight {self.lhs} < 0"
        if self.kind == "flip":
            return f"flip at {self.word}: {self.lhs} != {self.rhs}"
        return f"kirchhoff at u={self.word}: sum_a p_ua = {self.lhs} != sum_b p_bu = {self.rhs}"


@dataclass(frozen=True)
class Membership:
    ok: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def check_membership(p: WeightVector, signed: bool = False) -> Membership:
    """Test the flip and switch (Kirchhoff) equations, plus p >= 0 unless ``signed``."""
    nums, den = p.numerators, p.denominator
    sphere = W.enumerate_sphere(p.rank, p.level)
    bad: list[Violation] = []
    if not signed:
        for v, x in zip(sphere, nums):
            if x < 0:
                bad.append(Violation("positivity", W.format_word(v), Fraction(x, den), Fraction(0)))
    for i, j in enumerate(_flip_partner(p.rank, p.level)):
        if i < j and nums[i] != nums[j]:
            bad.append(Violation("flip", W.format_word(sphere[i]), Fraction(nums[i], den), Fraction(nums[j], den)))
    if p.level >= 2:
        for u, right, left in _kirchhoff_terms(p.rank, p.level):
            r = sum(nums[i] for i in right)
            l = sum(nums[i] for i in left)
            if r != l:
                bad.append(Violation("kirchhoff", W.format_word(u), Fraction(r, den), Fraction(l, den)))
    return Membership(not bad, tuple(bad))


def uniform_weights(rank: int, level: int) -> WeightVector:
    """Level-M weights of the uniform current: 1/d(M) everywhere."""
    d = _check_capacity(rank, level)
    return WeightVector(rank, level, (1,) * d, d)


def linear_combination(terms: Sequence[tuple], rank: int | None = None, level: int | None = None) -> WeightVector:
    """Exact sum of ``c * p`` over ``(c, p)`` terms.

    An empty term list needs ``rank`` and ``level`` and gives the zero vector.
    """
    terms = list(terms)
    if not terms:
        if rank is None or level is None:
            raise ValueError("empty combination needs rank and level")
        return WeightVector.zero(rank, level)
    first = terms[0][1]
    for _, p in terms:
        first._same_space(p)
    if (rank, level) != (None, None) and (rank, level) != (first.rank, first.level):
        raise LevelMismatch("terms do not match the requested rank and level")
    coeffs = [Fraction(c) for c, _ in terms]
    den = 1
    for c, (_, p) in zip(coeffs, terms):
        q = c.denominator * p.denominator
        den = den * q // gcd(den, q)
    acc = [0] * len(first)
    for c, (_, p) in zip(coeffs, terms):
        if not c:
            continue
        f = c.numerator * (den // (c.denominator * p.denominator))
        acc = [a + f * x for a, x in zip(acc, p.numerators)]
    return WeightVector(first.rank, first.level, tuple(acc), den)


# -- the level spaces ------------------------------------------------------

@dataclass(frozen=True)
class LevelSpace:
    """Constraint system cutting out the signed weight space at one level.

    Rows: flip equations ``p_v - p_{v^-1} = 0`` for every v (redundant pairs
    kept), then for M >= 2 one switch equation per u in S(M-1).
    """

    rank: int
    level: int
    matrix: tuple = field(repr=False)
    n_flip: int = 0
    dimension: int = 0

    @property
    def ambient(self) -> int:
        return W.sphere_size(self.rank, self.level)

    @property
    def n_kirchhoff(self) -> int:
        return len(self.matrix) - self.n_flip

    @property
    def matrix_rank(self) -> int:
        return self.ambient - self.dimension


_space_cache: dict = {}
_space_lock = threading.Lock()


def level_space(rank: int, level: int) -> LevelSpace:
    key = (rank, level)
    with _space_lock:
        cached = _space_cache.get(key)
    if cached is not None:
        return cached
    d = _check_capacity(rank, level)
    rows = []
    for i, j in enumerate(_flip_partner(rank, level)):
        row = [0] * d
        if i != j:
            row[i], row[j] = 1, -1
        rows.append(tuple(row))
    n_flip = len(rows)
    if level >= 2:
        for _, right, left in _kirchhoff_terms(rank, level):
            row = [0] * d
            for i in right:
                row[i] += 1
            for i in left:
                row[i] -= 1
            rows.append(tuple(row))
    basis = EchelonBasis(d)
    for r in rows:
        basis.add(r)
    space = LevelSpace(rank, level, tuple(rows), n_flip, d - basis.rank)
    with _space_lock:
        return _space_cache.setdefault(key, space)


# -- the difference identity --------------------------------------------------

@dataclass(frozen=True)
class DifferenceCheck:
    levels: dict  # level -> bool

    @property
    def holds(self) -> bool:
        return all(self.levels.values())


def difference_identity_check(w: Sequence[int], u: Sequence[int], level: int, rank: int | None = None) -> DifferenceCheck:
    """Check tau(wu) - tau(w) = tau(u) at every level 2..``level``.

    Hypotheses: ``u`` cyclically reduced with ``|u| >= level``; ``w``
    reduced with ``|w| >= 2*level``; ``w`` and ``wu`` cyclically reduced as
    written; ``u`` and ``w`` share their initial and their terminal segments
    of length ``level``.  Any failure raises :class:`HypothesisError`.
    """
    w, u = tuple(w), tuple(u)
    m = level
    if m < 2:
        raise HypothesisError(f"level must be >= 2, got {m}")
    if not W.is_cyclically_reduced(u):
        raise HypothesisError(f"u={W.format_word(u)} is not cyclically reduced")
    if len(u) < m:
        raise HypothesisError(f"|u|={len(u)} is shorter than the level {m}")
    if not W.is_reduced(w):
        raise HypothesisError(f"w={W.format_word(w)} is not freely reduced")
    if len(w) < 2 * m:
        raise HypothesisError(f"|w|={len(w)} < 2*level={2 * m}")
    if not W.is_cyclically_reduced(w):
        raise HypothesisError(f"w={W.format_word(w)} is not cyclically reduced as written")
    if not W.is_cyclically_reduced(w + u):
        raise HypothesisError(f"wu={W.format_word(w + u)} is not cyclically reduced as written")
    if w[:m] != u[:m]:
        raise HypothesisError(
            f"initial segments of length {m} differ: w has {W.format_word(w[:m])}, u has {W.format_word(u[:m])}"
        )
    if w[-m:] != u[-m:]:
        raise HypothesisError(
            f"terminal segments of length {m} differ: w has {W.format_word(w[-m:])}, u has {W.format_word(u[-m:])}"
        )
    if rank is None:
        rank = max(2, max(abs(x) for x in w + u))
    cw, cu, cwu = W.CyclicWord(w), W.CyclicWord(u), W.CyclicWord(w + u)
    result = {}
    for lv in range(2, m + 1):
        diff = counting_weights(cwu, lv, rank) - counting_weights(cw, lv, rank)
        result[lv] = diff == counting_weights(cu, lv, rank)
    return DifferenceCheck(result)
