"""Reduced words in the symmetric group S_{n+1} and their segment normal form.

A normal form is a product ``s[a_k,b_k] ... s[a_1,b_1]`` where
``s[a,b] = s_b s_{b-1} ... s_a`` and ``b_k < ... < b_1``.  Segments are stored
in index order ``j = 1..k`` (the rightmost factor first); the text syntax and
``str()`` print them in written order.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

__all__ = [
    "ReducedWord",
    "NormalForm",
    "WordError",
    "to_letters",
    "is_reduced",
    "longest_word",
    "n_index",
    "nprime_index",
    "m_invariant",
    "enumerate_normal_forms",
    "parse_word",
    "format_word",
]


class WordError(ValueError):
    """Raised for malformed words, segments or out-of-range indices."""


@dataclass(frozen=True)
class ReducedWord:
    n: int
    letters: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        for x in self.letters:
            if not 1 <= x <= self.n:
                raise WordError(f"letter s_{x} out of range for n={self.n}")

    def __len__(self):
        return len(self.letters)

    def permutation(self) -> tuple[int, ...]:
        """One-line notation (0-based images) of the product of the letters."""
        # w = s_{i1} ... s_{im} acts right to left; s_i swaps 0-based points i-1, i
        images = list(range(self.n + 1))
        for x in range(self.n + 1):
            y = x
            for i in reversed(self.letters):
                if y == i - 1:
                    y = i
                elif y == i:
                    y = i - 1
            images[x] = y
        return tuple(images)


@dataclass(frozen=True)
class NormalForm:
    n: int
    segments: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        segs = tuple((int(a), int(b)) for a, b in self.segments)
        object.__setattr__(self, "segments", segs)
        if self.n < 1:
            raise WordError("rank n must be >= 1")
        if len(segs) > self.n:
            raise WordError("too many segments")
        for j, (a, b) in enumerate(segs, start=1):
            if not 1 <= a <= b <= self.n:
                raise WordError(f"segment {j} = ({a},{b}) violates 1 <= a <= b <= n")
        for j in range(1, len(segs)):
            if not segs[j][1] < segs[j - 1][1]:
                raise WordError("segment upper bounds must strictly decrease with j")

    @property
    def k(self) -> int:
        return len(self.segments)

    def a(self, j: int) -> int:
        return self.segments[j - 1][0]

    def b(self, j: int) -> int:
        return self.segments[j - 1][1]

    def seg_len(self, j: int) -> int:
        a, b = self.segments[j - 1]
        return b - a + 1

    def __len__(self):
        return sum(b - a + 1 for a, b in self.segments)

    def factor_offset(self, j: int) -> int:
        """Position of the first tensor factor belonging to segment ``j``."""
        return sum(self.seg_len(r) for r in range(j + 1, self.k + 1))

    def letters(self) -> tuple[int, ...]:
        return to_letters(self).letters

    def is_identity(self) -> bool:
        return not self.segments

    def drop_last_letter(self) -> "NormalForm":
        """Normal form of ``w s_{a_1}`` removed, i.e. with the last letter deleted."""
        if not self.segments:
            raise WordError("identity has no letters")
        a, b = self.segments[0]
        if a == b:
            return NormalForm(self.n, self.segments[1:])
        return NormalForm(self.n, ((a + 1, b),) + self.segments[1:])

    def with_rank(self, n: int) -> "NormalForm":
        return NormalForm(n, self.segments)

    def __str__(self):
        return format_word(self)


def to_letters(nf: NormalForm) -> ReducedWord:
    letters: list[int] = []
    for a, b in reversed(nf.segments):
        letters.extend(range(b, a - 1, -1))
    return ReducedWord(nf.n, tuple(letters))


def inversions(perm: Sequence[int]) -> int:
    return sum(1 for x, y in itertools.combinations(range(len(perm)), 2) if perm[x] > perm[y])


def is_reduced(w: ReducedWord) -> bool:
    return inversions(w.permutation()) == len(w.letters)


def longest_word(n: int) -> NormalForm:
    # b must decrease with j, so segment j is [1, n+1-j]
    if n < 1:
        raise WordError("rank n must be >= 1")
    return NormalForm(n, tuple((1, n + 1 - j) for j in range(1, n + 1)))


def _check_ji(nf: NormalForm, j: int, i: int, lowest_j: int = 2) -> None:
    if not lowest_j <= j <= nf.k:
        raise WordError(f"segment index j={j} out of range")
    if not nf.a(j) <= i <= nf.b(j) + 1:
        raise WordError(f"row i={i} outside [a_j, b_j + 1] for j={j}")


def n_index(nf: NormalForm, j: int, i: int) -> Optional[int]:
    """Largest ``m < j`` with ``a_m <= i``; ``None`` stands for minus infinity."""
    _check_ji(nf, j, i, lowest_j=1)
    found = [m for m in range(1, j) if nf.a(m) <= i]
    return max(found) if found else None


def nprime_index(nf: NormalForm, j: int, i: int) -> Optional[int]:
    """Largest ``m < j`` with ``a_m + 1 <= i``; ``None`` stands for minus infinity."""
    _check_ji(nf, j, i, lowest_j=1)
    found = [m for m in range(1, j) if nf.a(m) + 1 <= i]
    return max(found) if found else None


def m_invariant(nf: NormalForm, j: int) -> tuple[int, ...]:
    """Trace ``(m_{k+1}, m_k, ..., m_1)`` of the line followed from row ``j``.

    The walk moves up one line whenever it meets an upward diagonal; ``m_1``
    is the largest column ``l`` with a nonzero image of ``z[j,l]``.
    """
    if not 1 <= j <= nf.n + 1:
        raise WordError(f"start row j={j} out of range")
    trace = [j]
    m = j
    for i in range(nf.k, 0, -1):
        if nf.a(i) <= m <= nf.b(i):
            m += 1
        trace.append(m)
    return tuple(trace)


def enumerate_normal_forms(n: int) -> Iterator[NormalForm]:
    """All normal forms for S_{n+1}: decreasing b-chains, then a-choices."""
    yield NormalForm(n, ())
    for k in range(1, n + 1):
        for bs in itertools.combinations(range(n, 0, -1), k):
            for as_ in itertools.product(*(range(1, b + 1) for b in bs)):
                yield NormalForm(n, tuple(zip(as_, bs)))


_SEG = re.compile(r"s\s*\[\s*(\d+)\s*,\s*(\d+)\s*\]")


def parse_word(text: str, n: int) -> NormalForm:
    """Parse ``"s[a,b] s[c,d] ..."`` (written order) into a normal form."""
    text = text.strip()
    if text in ("", "id", "e"):
        return NormalForm(n, ())
    pos = 0
    segs = []
    for m in _SEG.finditer(text):
        if text[pos:m.start()].strip():
            raise WordError(f"cannot parse word near {text[pos:m.start()]!r}")
        segs.append((int(m.group(1)), int(m.group(2))))
        pos = m.end()
    if text[pos:].strip() or not segs:
        raise WordError(f"cannot parse word {text!r}")
    return NormalForm(n, tuple(reversed(segs)))


def format_word(nf: NormalForm) -> str:
    if not nf.segments:
        return "id"
    return " ".join(f"s[{a},{b}]" for a, b in reversed(nf.segments))
