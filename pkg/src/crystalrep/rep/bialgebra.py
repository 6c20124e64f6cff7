"""Comultiplication, counit and the rank-lowering morphism, checked on generators."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from ..opalgebra import TensorOperator
from .polynomial import StarPolynomial, z
from .symbolic import SymbolicRep

__all__ = [
    "FormalTensor",
    "coproduct_on_generator",
    "counit",
    "check_coassociativity",
    "check_counit",
    "phi_generator",
    "check_morphism_intertwines",
    "pullback",
]

# A monomial is a tuple of letters (i, j, star); a formal tensor maps tuples of
# monomials (one per leg) to rational coefficients.


@dataclass(frozen=True)
class FormalTensor:
    legs: int
    terms: tuple  # sorted ((monomials...), coeff) pairs

    @classmethod
    def from_dict(cls, legs: int, d: dict) -> "FormalTensor":
        return cls(legs, tuple(sorted((k, Fraction(v)) for k, v in d.items() if v)))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "FormalTensor") -> "FormalTensor":
        acc = defaultdict(Fraction, self.as_dict())
        for k, v in other.terms:
            acc[k] += v
        return FormalTensor.from_dict(self.legs, acc)

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"

        def mono(m):
            return "*".join(f"z[{i},{j}]" + ("^*" if s else "") for i, j, s in m) or "1"

        return " + ".join(
            ("" if c == 1 else f"{c}*") + " (x) ".join(mono(m) for m in k) for k, c in self.terms
        )


def _gen(i, j):
    return ((i, j, False),)


def coproduct_on_generator(n: int, i: int, j: int) -> FormalTensor:
    """``Delta(z_ij) = sum_{k=min(i,j)}^{max(i,j)} z_ik (x) z_kj``."""
    _range(n, i, j)
    return FormalTensor.from_dict(2, {(_gen(i, k), _gen(k, j)): 1 for k in range(min(i, j), max(i, j) + 1)})


def _range(n, i, j):
    if not (1 <= i <= n + 1 and 1 <= j <= n + 1):
        raise IndexError(f"generator z[{i},{j}] out of range for n={n}")


def counit(letters: tuple) -> int:
    """``epsilon = psi_id`` on a monomial: product of Kronecker deltas."""
    return int(all(i == j for i, j, _ in letters))


def _apply_leg(t: FormalTensor, leg: int, fn: Callable[[tuple], FormalTensor]) -> FormalTensor:
    """Replace the monomial on ``leg`` (a single generator) by ``fn`` of it."""
    acc: dict = defaultdict(Fraction)
    for key, c in t.terms:
        (letter,) = key[leg]
        sub = fn(letter)
        for k2, c2 in sub.terms:
            acc[key[:leg] + k2 + key[leg + 1:]] += c * c2
    return FormalTensor.from_dict(t.legs + 1, acc)


def check_coassociativity(n: int) -> list:
    """Generators where ``(Delta (x) id) Delta != (id (x) Delta) Delta`` (empty on success)."""
    bad = []
    for i in range(1, n + 2):
        for j in range(1, n + 2):
            d = coproduct_on_generator(n, i, j)
            left = _apply_leg(d, 0, lambda l: coproduct_on_generator(n, l[0], l[1]))
            right = _apply_leg(d, 1, lambda l: coproduct_on_generator(n, l[0], l[1]))
            if left != right:
                bad.append((i, j))
    return bad


def check_counit(n: int) -> list:
    """Generators where ``(eps (x) id) Delta`` or ``(id (x) eps) Delta`` differs from ``z_ij``."""
    bad = []
    for i in range(1, n + 2):
        for j in range(1, n + 2):
            d = coproduct_on_generator(n, i, j)
            target = {_gen(i, j): Fraction(1)}
            for leg in (0, 1):
                acc: dict = defaultdict(Fraction)
                for key, c in d.terms:
                    e = counit(key[leg])
                    if e:
                        acc[key[1 - leg]] += c * e
                if {k: v for k, v in acc.items() if v} != target:
                    bad.append((i, j, "left" if leg == 0 else "right"))
    return bad


def phi_generator(n: int, m: int, i: int, j: int) -> StarPolynomial:
    """Image of ``z^(n)_ij`` under the morphism onto rank ``m``."""
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    _range(n, i, j)
    if i <= m + 1 and j <= m + 1:
        return z(i, j)
    return StarPolynomial.one(int(i == j))


def _poly_tensor(p: StarPolynomial, q: StarPolynomial) -> dict:
    acc: dict = defaultdict(Fraction)
    for k1, c1 in p.terms.items():
        for k2, c2 in q.terms.items():
            c = c1 * c2
            acc[(k1, k2)] += Fraction(c.coefficient())
    return acc


def check_morphism_intertwines(n: int, m: int) -> list:
    """Generators where ``(phi (x) phi) Delta_n != Delta_m phi`` (empty on success)."""
    bad = []
    for i in range(1, n + 2):
        for j in range(1, n + 2):
            lhs: dict = defaultdict(Fraction)
            for k in range(min(i, j), max(i, j) + 1):
                for key, c in _poly_tensor(phi_generator(n, m, i, k), phi_generator(n, m, k, j)).items():
                    lhs[key] += c
            img = phi_generator(n, m, i, j)
            rhs: dict = defaultdict(Fraction)
            for letters, c in img.terms.items():
                coeff = Fraction(c.coefficient())
                if not letters:
                    rhs[((), ())] += coeff
                    continue
                (a, b, _), = letters
                for k in range(min(a, b), max(a, b) + 1):
                    rhs[(_gen(a, k), _gen(k, b))] += coeff
            clean = lambda d: {k: v for k, v in d.items() if v}
            if clean(lhs) != clean(rhs):
                bad.append((i, j))
    return bad


def pullback(rep: SymbolicRep, n: int) -> SymbolicRep:
    """The rank-``n`` representation ``rep o phi`` of a rank-``m`` representation."""
    m = rep.n
    images = {}
    for i in range(1, n + 2):
        for j in range(1, n + 2):
            if i <= m + 1 and j <= m + 1:
                images[(i, j)] = rep.z(i, j)
            elif i == j:
                images[(i, j)] = TensorOperator.identity(rep.factors)
    return SymbolicRep(n, rep.factors, images, None, rep.lam)
