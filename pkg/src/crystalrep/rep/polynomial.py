"""Noncommutative *-polynomials in the generators ``z[i,j]``."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from ..opalgebra import LaurentScalar, _as_laurent

__all__ = ["StarPolynomial", "z", "zs", "product", "parse_polynomial"]

# A letter is (i, j, starred).
Letter = tuple


class StarPolynomial:
    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[tuple, LaurentScalar]] = None):
        self.terms: dict = {}
        for mono, c in (terms or {}).items():
            c = _as_laurent(c)
            if not c.is_zero():
                key = tuple((int(i), int(j), bool(s)) for i, j, s in mono)
                prev = self.terms.get(key)
                c = c if prev is None else prev + c
                if c.is_zero():
                    self.terms.pop(key, None)
                else:
                    self.terms[key] = c

    @classmethod
    def one(cls, coeff=1):
        return cls({(): coeff})

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def gen(cls, i: int, j: int, star: bool = False):
        return cls({((i, j, star),): 1})

    def __add__(self, other):
        other = _as_poly(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc[k] + c if k in acc else c
        return StarPolynomial(acc)

    __radd__ = __add__

    def __neg__(self):
        return StarPolynomial({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        acc: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                c = c1 * c2
                acc[k] = acc[k] + c if k in acc else c
        return StarPolynomial(acc)

    def __rmul__(self, other):
        return _as_poly(other) * self

    def __pow__(self, k: int):
        out = StarPolynomial.one()
        for _ in range(k):
            out = out * self
        return out

    def adjoint(self) -> "StarPolynomial":
        return StarPolynomial(
            {tuple((i, j, not s) for i, j, s in reversed(k)): c.conj() for k, c in self.terms.items()}
        )

    @property
    def H(self):
        return self.adjoint()

    def max_index(self) -> int:
        return max((max(i, j) for k in self.terms for i, j, _ in k), default=0)

    def map_letters(self, fn) -> "StarPolynomial":
        """Substitute every letter ``(i, j, star)`` by the polynomial ``fn(i, j, star)``."""
        out = StarPolynomial.zero()
        for k, c in self.terms.items():
            term = StarPolynomial.one(c)
            for letter in k:
                term = term * fn(*letter)
            out = out + term
        return out

    def __eq__(self, other):
        if not isinstance(other, StarPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset((k, c) for k, c in self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            word = "*".join(f"z[{i},{j}]" + ("^*" if s else "") for i, j, s in k) or "1"
            if c == LaurentScalar.const(1):
                parts.append(word)
            else:
                parts.append(f"({c!r})*{word}")
        return " + ".join(parts)

    __repr__ = __str__


def _as_poly(x) -> StarPolynomial:
    if isinstance(x, StarPolynomial):
        return x
    return StarPolynomial.one(_as_laurent(x))


def z(i: int, j: int) -> StarPolynomial:
    return StarPolynomial.gen(i, j)


def zs(i: int, j: int) -> StarPolynomial:
    return StarPolynomial.gen(i, j, True)


def product(polys: Iterable[StarPolynomial]) -> StarPolynomial:
    out = StarPolynomial.one()
    for p in polys:
        out = out * p
    return out


_LETTER = re.compile(r"z\[(\d+),(\d+)\](\^\*)?")
_TOKEN = re.compile(r"z\[\d+,\d+\](?:\^\*)?|\d+(?:/\d+)?")


def parse_polynomial(text: str) -> StarPolynomial:
    """Parse ``"z[2,3]*z[1,1]^* - 2*z[1,1] + 1"`` (rational coefficients only)."""
    out = StarPolynomial.zero()
    text = text.replace(" ", "")
    if not text:
        return out
    for sign, body in re.findall(r"([+-]?)([^+-]+)", text):
        coeff = Fraction(-1 if sign == "-" else 1)
        tokens = _TOKEN.findall(body)
        if "*".join(tokens) != body:
            raise ValueError(f"malformed term {body!r}")
        letters = []
        for tok in tokens:
            m = _LETTER.fullmatch(tok)
            if m:
                letters.append((int(m.group(1)), int(m.group(2)), bool(m.group(3))))
            else:
                coeff *= Fraction(tok)
        out = out + StarPolynomial({tuple(letters): coeff})
    return out
