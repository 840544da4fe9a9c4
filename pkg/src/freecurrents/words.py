"""Free-group words over a fixed basis.

Letters are nonzero integers: ``i`` is the generator a_i and ``-i`` its
inverse, so inversion is negation.  A word is a plain tuple of letters.
The fixed letter order is ``a1 < A1 < a2 < A2 < ...`` (generator before its
inverse), which is the order used for spheres, canonical rotations and every
lexicographic tie-break in the package.

Textual syntax: lowercase ``a, b, c, ...`` are generators, uppercase
``A, B, C, ...`` their inverses.  The empty string is the identity.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Word = tuple  # tuple[int, ...], freely reduced unless stated otherwise

MAX_RANK = 26


class WordError(ValueError):
    """Malformed or non-reduced word input."""


def letter_key(x: int) -> int:
    """Position of letter ``x`` in the fixed total order (0-based)."""
    return 2 * (abs(x) - 1) + (x < 0)


def letter_at(key: int) -> int:
    i, neg = divmod(key, 2)
    return -(i + 1) if neg else i + 1


def letters(rank: int) -> list[int]:
    """All 2N letters in the fixed order."""
    return [letter_at(k) for k in range(2 * rank)]


def check_rank(rank: int) -> None:
    if not isinstance(rank, int) or rank < 2 or rank > MAX_RANK:
        raise ValueError(f"rank must be an integer in [2, {MAX_RANK}], got {rank!r}")


# -- reduction -------------------------------------------------------------

def free_reduce(raw: Iterable[int]) -> Word:
    out: list[int] = []
    for x in raw:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i + 1] != -w[i] for i in range(len(w) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return len(w) > 0 and is_reduced(w) and w[-1] != -w[0]


def invert(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def cyclic_reduce(w: Sequence[int]) -> tuple[Word, Word]:
    """Split a reduced word as ``w = x . c . x^-1``.

    Returns ``(c, x)`` where ``c`` is cyclically reduced (empty iff ``w`` is
    the identity).  ``c`` is the core as it sits inside ``w``, not rotated
    to canonical form; pass it to :class:`CyclicWord` for that.
    """
    w = tuple(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i:j + 1], w[:i]


def cyclic_length(w: Sequence[int]) -> int:
    """||w||_A, the cyclically reduced length of a reduced word."""
    return len(cyclic_reduce(w)[0])


def least_rotation(w: Sequence[int]) -> Word:
    """Lexicographically least rotation under the letter order."""
    w = tuple(w)
    if not w:
        return w
    best = _booth([letter_key(x) for x in w])
    return w[best:] + w[:best]


def _booth(s: list) -> int:
    # Booth's least-rotation algorithm, O(n)
    s2 = s + s
    n2 = len(s2)
    f = [-1] * n2
    k = 0
    for j in range(1, n2):
        sj = s2[j]
        i = f[j - k - 1]
        while i != -1 and sj != s2[k + i + 1]:
            if sj < s2[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s2[k + i + 1]:  # i == -1
            if sj < s2[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


@dataclass(frozen=True)
class CyclicWord:
    """A cyclically reduced word up to rotation, stored in canonical rotation."""

    letters: Word

    def __post_init__(self):
        w = tuple(self.letters)
        if not is_cyclically_reduced(w):
            raise WordError(f"{format_word(w)!r} is not a nonempty cyclically reduced word")
        object.__setattr__(self, "letters", least_rotation(w))

    @classmethod
    def of(cls, w: Sequence[int]) -> "CyclicWord | None":
        """Conjugacy class of a (not necessarily reduced) word; None for the identity."""
        core, _ = cyclic_reduce(free_reduce(w))
        return cls(core) if core else None

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord(invert(self.letters))

    def power(self, k: int) -> "CyclicWord":
        return CyclicWord(self.letters * k)

    @property
    def rank_needed(self) -> int:
        return max(abs(x) for x in self.letters)

    def __str__(self) -> str:
        return format_word(self.letters)


# -- spheres ----------------------------------------------------------------

def sphere_size(rank: int, level: int) -> int:
    """d(M) = 2N(2N-1)^(M-1), the number of reduced words of length M."""
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    return 2 * rank * (2 * rank - 1) ** (level - 1)


def _allowed_rank(x: int, prev: int) -> int:
    # rank of x among the 2N-1 letters that may follow prev
    k = letter_key(x)
    return k - (letter_key(-prev) < k)


def index_of(w: Sequence[int], rank: int) -> int:
    """Index of a reduced word in the lexicographic enumeration of its sphere.

    The order is mixed radix: the first letter has 2N choices, each later
    letter 2N-1, so the children ``ua`` of ``u`` form the contiguous block
    ``index(u)*(2N-1) .. index(u)*(2N-1) + 2N-2``.
    """
    if not w:
        raise WordError("the empty word has no sphere index")
    k = 2 * rank - 1
    idx = letter_key(w[0])
    if idx >= 2 * rank:
        raise WordError(f"letter {format_word(w[:1])!r} exceeds rank {rank}")
    for i in range(1, len(w)):
        if w[i] == -w[i - 1]:
            raise WordError(f"word {format_word(w)!r} is not reduced at position {i}")
        r = _allowed_rank(w[i], w[i - 1])
        if r >= k:
            raise WordError(f"letter {format_word(w[i:i + 1])!r} exceeds rank {rank}")
        idx = idx * k + r
    return idx


def word_at(index: int, rank: int, level: int) -> Word:
    d = sphere_size(rank, level)
    if not 0 <= index < d:
        raise IndexError(f"index {index} out of range for sphere of size {d}")
    k = 2 * rank - 1
    digits = []
    for _ in range(level - 1):
        index, r = divmod(index, k)
        digits.append(r)
    out = [letter_at(index)]
    for r in reversed(digits):
        key_inv = letter_key(-out[-1])
        key = r + (r >= key_inv)
        out.append(letter_at(key))
    return tuple(out)


@lru_cache(maxsize=64)
def enumerate_sphere(rank: int, level: int) -> tuple[Word, ...]:
    """All reduced words of length ``level`` in lexicographic order."""
    check_rank(rank)
    words: list[Word] = [(x,) for x in letters(rank)]
    for _ in range(level - 1):
        words = [w + (x,) for w in words for x in letters(rank) if x != -w[-1]]
    return tuple(words)


# -- occurrences -------------------------------------------------------------

def count_occurrences(v: Sequence[int], w: CyclicWord) -> int:
    """Number of positions on the circle of ``w`` from which ``v`` can be read.

    Reading is periodic: it may wrap around the circle any number of times,
    so ``v`` longer than ``w`` can still occur.
    """
    if not v:
        raise WordError("cannot count occurrences of the empty word")
    c = w.letters
    n = len(c)
    m = len(v)
    return sum(1 for i in range(n) if all(c[(i + j) % n] == v[j] for j in range(m)))


def count_linear_occurrences(v: Sequence[int], w: Sequence[int]) -> int:
    """Occurrences of ``v`` as a subword of the linear word ``w``."""
    v = tuple(v)
    m = len(v)
    return sum(1 for i in range(len(w) - m + 1) if tuple(w[i:i + m]) == v)


# -- text syntax -------------------------------------------------------------

def format_letter(x: int) -> str:
    c = string.ascii_lowercase[abs(x) - 1]
    return c.upper() if x < 0 else c


def format_word(w: Sequence[int]) -> str:
    return "".join(format_letter(x) for x in w)


def parse_word(text: str, rank: int | None = None, reduced: bool = True) -> Word:
    """Parse the textual syntax.

    With ``reduced=True`` (default) a non-reduced input is rejected, naming
    the first offending position; with ``reduced=False`` it is freely reduced.
    """
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    out = []
    for pos, ch in enumerate(text):
        if ch not in string.ascii_letters:
            raise WordError(f"invalid character {ch!r} at position {pos} in {text!r}")
        i = string.ascii_lowercase.index(ch.lower()) + 1
        if rank is not None and i > rank:
            raise WordError(f"letter {ch!r} at position {pos} exceeds rank {rank}")
        out.append(i if ch.islower() else -i)
    if reduced:
        for pos in range(1, len(out)):
            if out[pos] == -out[pos - 1]:
                raise WordError(
                    f"word {text!r} is not freely reduced: positions {pos - 1} and {pos} cancel"
                )
        return tuple(out)
    return free_reduce(out)


def parse_cyclic(text: str, rank: int | None = None) -> CyclicWord:
    w = parse_word(text, rank=rank)
    if not is_cyclically_reduced(w):
        raise WordError(f"word {text!r} is not cyclically reduced")
    return CyclicWord(w)
