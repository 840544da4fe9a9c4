"""Trajectories of the non-backtracking walk and a deterministic universal ray.

Random trajectories draw 64-bit outputs from numpy's ``PCG64`` bit generator
(PCG XSL-RR 128/64, seeded through ``SeedSequence(seed)``) via
``random_raw``, which exposes the raw output stream and is fixed by the
algorithm rather than by numpy's sampling routines.  A draw from
``{0, ..., k-1}`` rejects outputs ``>= 2**64 - (2**64 mod k)`` and returns
the survivor mod ``k``, so it is exactly uniform.  Step ``i`` picks, in the
fixed letter order, among the 2N letters (first step) or the 2N-1 letters
other than the inverse of the previous one.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import words as W
from .currents import WeightVector, counting_weights, format_rational

_TWO64 = 1 << 64


class TrajectoryError(ValueError):
    pass


class _UniformDraws:
    def __init__(self, seed: int, batch: int = 4096):
        self._bitgen = np.random.PCG64(seed)
        self._batch = batch
        self._buf: list[int] = []
        self._pos = 0

    def _next_raw(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(self._batch).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def below(self, k: int) -> int:
        limit = _TWO64 - (_TWO64 % k)
        while True:
            x = self._next_raw()
            if x < limit:
                return x % k


def _random_letters(seed: int, rank: int) -> Iterator[int]:
    draws = _UniformDraws(seed)
    alphabet = W.letters(rank)
    prev = alphabet[draws.below(2 * rank)]
    yield prev
    while True:
        r = draws.below(2 * rank - 1)
        key = r + (r >= W.letter_key(-prev))
        prev = W.letter_at(key)
        yield prev


def _connector(prev: int | None, nxt: int, rank: int) -> tuple:
    """Shortest non-cancelling connector between ``prev`` and ``nxt``."""
    if prev is None or prev != -nxt:
        return ()
    for c in W.letters(rank):
        if c != -prev and c != -nxt:
            return (c,)
    raise AssertionError("no connector letter; rank must be >= 2")


def _universal_letters(rank: int) -> Iterator[int]:
    # round r: every word of S(r), in sphere order, written r times in a row,
    # joined by a one-letter connector wherever the junction would cancel
    prev = None
    r = 1
    while True:
        small = W.sphere_size(rank, r) <= 20000
        for v in W.enumerate_sphere(rank, r) if small else _sphere_iter(rank, r):
            for _ in range(r):
                for x in _connector(prev, v[0], rank) + v:
                    yield x
                    prev = x
        r += 1


def _sphere_iter(rank: int, level: int) -> Iterator[W.Word]:
    for i in range(W.sphere_size(rank, level)):
        yield W.word_at(i, rank, level)


class Trajectory:
    """A realized prefix of a ray x1 x2 x3 ... that can be extended on demand.

    ``source`` is ``"random"`` (seeded walk) or ``"universal"``.  The letter
    stream comes from a zero-argument ``factory`` returning a fresh iterator,
    so the whole ray can be replayed; a spliced universal trajectory records
    its inserted segments in ``splices`` as ``(start, word)`` pairs.
    """

    def __init__(self, source: str, rank: int, seed: int | None = None, factory=None, splices=()):
        W.check_rank(rank)
        if source not in ("random", "universal"):
            raise TrajectoryError(f"unknown source {source!r}")
        if source == "random" and seed is None and factory is None:
            raise TrajectoryError("random trajectories need a seed")
        self.source = source
        self.rank = rank
        self.seed = seed
        self.splices: tuple = tuple(splices)
        if factory is None:
            if source == "random":
                factory = lambda: _random_letters(seed, rank)  # noqa: E731
            else:
                factory = lambda: _universal_letters(rank)  # noqa: E731
        self._factory = factory
        self._stream = factory()
        self.letters: list[int] = []

    def __len__(self) -> int:
        return len(self.letters)

    def extend(self, length: int) -> "Trajectory":
        """Realize at least ``length`` letters."""
        need = length - len(self.letters)
        if need > 0:
            chunk = list(itertools.islice(self._stream, need))
            if len(chunk) < need:
                raise TrajectoryError(f"trajectory ends after {len(self.letters) + len(chunk)} letters")
            self.letters.extend(chunk)
        return self

    def prefix(self, n: int) -> W.Word:
        if n < 1:
            raise TrajectoryError(f"prefix length must be >= 1, got {n}")
        if n > len(self.letters):
            raise TrajectoryError(f"prefix length {n} exceeds realized length {len(self.letters)}")
        return tuple(self.letters[:n])

    def splice(self, position: int, segment) -> "Trajectory":
        """A new trajectory: the first ``position`` letters, then ``segment``, then the rest of this ray.

        A one-letter connector is inserted at either junction that would
        cancel.  Only universal trajectories may be spliced; the result still
        contains every reduced word infinitely often.
        """
        if self.source != "universal":
            raise TrajectoryError("only universal trajectories can be spliced")
        segment = tuple(segment)
        if not segment or not W.is_reduced(segment):
            raise TrajectoryError("splice segment must be a nonempty reduced word")
        head = self.prefix(position) if position else ()
        left = _connector(head[-1] if head else None, segment[0], self.rank)
        base, rank = self._factory, self.rank

        def factory():
            yield from head
            yield from left + segment
            rest = itertools.islice(base(), position, None)
            first = next(rest)
            yield from _connector(segment[-1], first, rank)
            yield first
            yield from rest

        start = position + len(left)
        return Trajectory("universal", rank, factory=factory,
                          splices=self.splices + ((start, W.format_word(segment)),))

    def header(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        return f"rank={self.rank} seed={seed} source={self.source}"

    def dumps(self) -> str:
        return self.header() + "\n" + W.format_word(self.letters) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Trajectory":
        """Read the text format.

        If the stored letters are what the header's source would generate,
        the result can be extended further; otherwise (e.g. a spliced ray) it
        is frozen at the stored length.
        """
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise TrajectoryError("empty trajectory file")
        try:
            fields = dict(part.split("=", 1) for part in lines[0].split())
            rank = int(fields["rank"])
            source = fields["source"]
            seed = None if fields.get("seed", "none") == "none" else int(fields["seed"])
        except (KeyError, ValueError) as exc:
            raise TrajectoryError(f"bad trajectory header {lines[0]!r}") from exc
        letters = W.parse_word("".join(lines[1:]), rank)
        t = cls(source, rank, seed)
        t.extend(len(letters))
        if t.letters != list(letters):
            t = cls(source, rank, seed, factory=lambda: iter(letters))
            t.extend(len(letters))
        return t


def sample_trajectory(seed: int, rank: int, length: int) -> Trajectory:
    if length < 1:
        raise TrajectoryError(f"length must be >= 1, got {length}")
    return Trajectory("random", rank, seed).extend(length)


def universal_trajectory(rank: int, length: int) -> Trajectory:
    if length < 1:
        raise TrajectoryError(f"length must be >= 1, got {length}")
    return Trajectory("universal", rank).extend(length)


def prefix(xi: Trajectory, n: int) -> W.Word:
    return xi.prefix(n)


# -- statistics ----------------------------------------------------------------

def linear_window_counts(letters, rank: int, level: int) -> np.ndarray:
    """Counts of each reduced word of length ``level`` as a subword of a linear word."""
    d = W.sphere_size(rank, level)
    a = np.asarray(letters, dtype=np.int64)
    n = a.size
    if n < level:
        return np.zeros(d, dtype=np.int64)
    keys = 2 * (np.abs(a) - 1) + (a < 0)
    step = np.zeros(n, dtype=np.int64)
    if n > 1:
        prev_inv = -a[:-1]
        kp = 2 * (np.abs(prev_inv) - 1) + (prev_inv < 0)
        step[1:] = keys[1:] - (kp < keys[1:])
    k = 2 * rank - 1
    m = n - level + 1
    idx = keys[:m].copy()
    for j in range(1, level):
        idx = idx * k + step[j:j + m]
    return np.bincount(idx, minlength=d)


@dataclass(frozen=True)
class FrequencyReport:
    n: int
    level: int
    rank: int
    counts: tuple
    target: Fraction

    @property
    def empirical(self) -> tuple:
        return tuple(Fraction(c, self.n) for c in self.counts)

    @property
    def max_deviation(self) -> Fraction:
        return max(abs(Fraction(c, self.n) - self.target) for c in self.counts)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "count", "empirical", "target", "deviation"])
        for v, c in zip(W.enumerate_sphere(self.rank, self.level), self.counts):
            e = Fraction(c, self.n)
            writer.writerow([W.format_word(v), c, format_rational(e), format_rational(self.target),
                             format_rational(abs(e - self.target))])
        return buf.getvalue()


def frequency_report(xi: Trajectory, n: int, level: int) -> FrequencyReport:
    """Subword frequencies of the linear prefix xi(n), against 1/d(M)."""
    if n < level:
        raise TrajectoryError(f"horizon n={n} is shorter than the level {level}")
    counts = linear_window_counts(xi.prefix(n), xi.rank, level)
    d = W.sphere_size(xi.rank, level)
    return FrequencyReport(n, level, xi.rank, tuple(int(c) for c in counts), Fraction(1, d))


def cylinder_mass(v, rank: int) -> Fraction:
    """Uniform measure of the one-sided cylinder of ``v``: 1/d(|v|)."""
    if not v:
        raise W.WordError("the cylinder of the empty word is the whole boundary")
    if not W.is_reduced(v):
        raise W.WordError(f"{W.format_word(v)} is not reduced")
    return Fraction(1, W.sphere_size(rank, len(v)))


def normalized_prefix_current(xi: Trajectory, n: int, level: int) -> WeightVector:
    """(1/n) tau_M(eta_{xi(n)})."""
    c = W.CyclicWord.of(xi.prefix(n))
    if c is None:
        raise TrajectoryError(f"prefix of length {n} is the identity")
    return counting_weights(c, level, xi.rank) / n
