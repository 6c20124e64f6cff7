"""Symbolic representations: elementary ``psi_{s_r}``, characters, convolution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..opalgebra import LaurentScalar, TensorOperator, ToeplitzElement
from ..weyl import NormalForm, WordError
from .polynomial import StarPolynomial

__all__ = [
    "SymbolicRep",
    "LambdaSpec",
    "elementary_rep",
    "character_rep",
    "convolve",
    "convolve_full",
    "build",
    "evaluate",
    "lambda_values",
]

# "formal" keeps the symbols lambda_i, "one" sets them to 1, a tuple of unit
# complex numbers keeps the symbols and records the values for later use.
LambdaSpec = Union[str, tuple]


@dataclass
class SymbolicRep:
    n: int
    factors: int
    images: dict
    word: Optional[NormalForm] = None
    lam: LambdaSpec = "formal"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.images, _LazyImages):
            return
        for (i, j), img in self.images.items():
            if img.factors != self.factors:
                raise ValueError(f"image of z[{i},{j}] has {img.factors} factors, expected {self.factors}")

    def z(self, i: int, j: int) -> TensorOperator:
        if not (1 <= i <= self.n + 1 and 1 <= j <= self.n + 1):
            raise IndexError(f"generator z[{i},{j}] out of range for n={self.n}")
        img = self.images.get((i, j))
        return img if img is not None else TensorOperator.zero(self.factors)

    def zstar(self, i: int, j: int) -> TensorOperator:
        key = ("*", i, j)
        if key not in self._cache:
            self._cache[key] = self.z(i, j).adjoint()
        return self._cache[key]

    def letter(self, i: int, j: int, star: bool) -> TensorOperator:
        return self.zstar(i, j) if star else self.z(i, j)

    def word_image(self, letters: tuple) -> TensorOperator:
        """Image of a product of letters, memoized on prefixes."""
        if not letters:
            return TensorOperator.identity(self.factors)
        if len(letters) == 1:
            return self.letter(*letters[0])
        hit = self._cache.get(letters)
        if hit is None:
            hit = self.word_image(letters[:-1]) * self.letter(*letters[-1])
            self._cache[letters] = hit
        return hit

    def evaluate(self, p: StarPolynomial) -> TensorOperator:
        if p.max_index() > self.n + 1:
            raise IndexError(f"polynomial uses indices beyond n+1={self.n + 1}")
        out = TensorOperator.zero(self.factors)
        for letters, c in p.terms.items():
            out = out + self.word_image(letters).scale(c)
        return out

    def with_images(self, images: dict) -> "SymbolicRep":
        return SymbolicRep(self.n, self.factors, dict(images), self.word, self.lam)

    def lambda_numeric(self) -> tuple:
        return lambda_values(self.lam, self.n)


def lambda_values(lam: LambdaSpec, n: int) -> tuple:
    if isinstance(lam, str):
        return (1.0 + 0j,) * n
    return tuple(complex(x) for x in lam)


def _check_lambda(lam: LambdaSpec, n: int) -> None:
    if isinstance(lam, str):
        if lam not in ("formal", "one"):
            raise ValueError(f"unknown lambda mode {lam!r}")
        return
    if len(lam) != n:
        raise ValueError(f"expected {n} lambda values, got {len(lam)}")
    for x in lam:
        if abs(abs(complex(x)) - 1) > 1e-12:
            raise ValueError(f"lambda value {x} is not unimodular")


def elementary_rep(n: int, r: int) -> SymbolicRep:
    if not 1 <= r <= n:
        raise WordError(f"s_{r} out of range for n={n}")
    images = {(i, i): ToeplitzElement.I() for i in range(1, n + 2)}
    images[(r, r)] = ToeplitzElement.S()
    images[(r + 1, r + 1)] = ToeplitzElement.Sstar()
    images[(r, r + 1)] = ToeplitzElement.P0()
    images[(r + 1, r)] = ToeplitzElement.P0()
    return SymbolicRep(n, 1, images, NormalForm(n, ((r, r),)), "one")


def _character_scalars(n: int, lam: LambdaSpec) -> list:
    if lam == "one":
        return [LaurentScalar.const(1)] * (n + 1)
    sym = [LaurentScalar.symbol(i) for i in range(1, n + 1)]
    out = [sym[0]]
    for i in range(2, n + 1):
        out.append(sym[i - 2].conj() * sym[i - 1])
    out.append(sym[n - 1].conj())
    return out


def character_rep(n: int, lam: LambdaSpec = "formal") -> SymbolicRep:
    _check_lambda(lam, n)
    scal = _character_scalars(n, lam)
    images = {(i, i): TensorOperator.identity(0, scal[i - 1]) for i in range(1, n + 2)}
    return SymbolicRep(n, 0, images, NormalForm(n, ()), lam)


def _conv(phi: SymbolicRep, psi: SymbolicRep, full: bool) -> dict:
    if phi.n != psi.n:
        raise ValueError(f"rank mismatch {phi.n} != {psi.n}")
    n = phi.n
    images = {}
    for i in range(1, n + 2):
        for j in range(1, n + 2):
            ks = range(1, n + 2) if full else range(min(i, j), max(i, j) + 1)
            acc = TensorOperator.zero(phi.factors + psi.factors)
            for k in ks:
                x, y = phi.images.get((i, k)), psi.images.get((k, j))
                if x is not None and y is not None and x and y:
                    acc = acc + x.kron(y)
            if acc:
                images[(i, j)] = acc
    return images


def convolve(phi: SymbolicRep, psi: SymbolicRep) -> SymbolicRep:
    """``(phi * psi)(z_ij) = sum_{k=min(i,j)}^{max(i,j)} phi(z_ik) (x) psi(z_kj)``."""
    return SymbolicRep(phi.n, phi.factors + psi.factors, _conv(phi, psi, False), None, phi.lam)


def convolve_full(phi: SymbolicRep, psi: SymbolicRep) -> SymbolicRep:
    """Same product with ``k`` running over all indices.

    At q = 0 this is not a representation in general: the terms outside
    ``min(i,j)..max(i,j)`` survive whenever both factors are nonzero.
    """
    return SymbolicRep(phi.n, phi.factors + psi.factors, _conv(phi, psi, True), None, phi.lam)


class _LazyImages(dict):
    """Generator images computed on first access by a monotone path sweep.

    Folding the restricted convolution over elementary factors only moves the
    row index one step at a time towards the target, so ``z[i,j]`` is the sum
    over monotone paths from row ``i`` to row ``j`` of elementary tensors.
    """

    def __init__(self, n: int, letters: tuple, scal: list):
        super().__init__()
        self.n, self.letters, self.scal = n, letters, scal
        self.elem = {r: elementary_rep(n, r).images for r in set(letters)}

    def __missing__(self, key):
        i, j = key
        step = 1 if j > i else -1
        state = {i: TensorOperator.identity(0, self.scal[i - 1])}
        for r in self.letters:
            el = self.elem[r]
            nxt: dict = {}
            for row, op in state.items():
                for to in (row, row + step):
                    if (to - j) * step > 0 or (row, to) not in el:
                        continue
                    term = op.kron(el[(row, to)])
                    nxt[to] = nxt[to] + term if to in nxt else term
            state = nxt
        out = state.get(j, TensorOperator.zero(len(self.letters)))
        self[key] = out
        return out

    def get(self, key, default=None):
        return self[key]

    def items(self):
        return [((i, j), self[(i, j)]) for i in range(1, self.n + 2) for j in range(1, self.n + 2)]


def build(lam: LambdaSpec, nf: NormalForm, lazy: bool = False) -> SymbolicRep:
    """``psi_{lam, w} = chi_lam * psi_{s_i1} * ... * psi_{s_im}`` for the letters of ``nf``.

    With ``lazy=True`` images are produced on demand, which keeps long words
    (where most generator images are large sums) tractable.
    """
    if lazy:
        _check_lambda(lam, nf.n)
        images = _LazyImages(nf.n, nf.letters(), _character_scalars(nf.n, lam))
        return SymbolicRep(nf.n, len(nf), images, nf, lam)
    rep = character_rep(nf.n, lam)
    for r in nf.letters():
        rep = convolve(rep, elementary_rep(nf.n, r))
    rep.word = nf
    rep.lam = lam
    return rep


def evaluate(rep: SymbolicRep, p: StarPolynomial) -> TensorOperator:
    return rep.evaluate(p)
