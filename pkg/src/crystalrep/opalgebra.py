"""Exact *-algebra of shift words on l^2(N) and finite tensor powers of it.

Every operator is stored in the basis ``(S*)^a S^b`` where ``S`` is the left
shift.  Since ``S S* = I`` the product of two basis words is again a basis
word, so the expanded sum of terms is a canonical form and equality of
operators is equality of term maps.  Coefficients are exact rationals times
Laurent monomials in formal unimodular symbols ``lambda_1 .. lambda_n``.
"""
from __future__ import annotations

import json
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LaurentScalar",
    "ToeplitzElement",
    "TensorOperator",
    "FactorMismatch",
    "t_mul",
    "t_adjoint",
    "matrix_entry",
    "tensor_mul",
    "tensor_adjoint",
    "tensor_add",
    "embed",
    "sigma_char",
    "shift_word_matrix",
]

# A monomial is a sorted tuple of (symbol index, nonzero exponent) pairs.
Mono = tuple
ONE: Mono = ()


class FactorMismatch(ValueError):
    pass


@lru_cache(maxsize=65536)
def mono_mul(x: Mono, y: Mono) -> Mono:
    if not x:
        return y
    if not y:
        return x
    acc = dict(x)
    for v, e in y:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in acc.items() if e))


@lru_cache(maxsize=65536)
def mono_conj(x: Mono) -> Mono:
    return tuple((v, -e) for v, e in x)


def mono_value(x: Mono, lam: Sequence[complex]) -> complex:
    out = 1 + 0j
    for v, e in x:
        out *= complex(lam[v - 1]) ** e
    return out


def _exact(c):
    if isinstance(c, bool) or not isinstance(c, Rational):
        raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


class LaurentScalar:
    """Exact Laurent polynomial in the symbols ``lambda_i`` with rational coefficients.

    In the common case it has one monomial (a rational times ``prod lambda_i^e_i``).
    The involution sends ``lambda_i`` to ``lambda_i^{-1}``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Mono, Rational]] = None):
        self.terms: dict = {}
        for mono, c in (terms or {}).items():
            c = _exact(c)
            if c:
                self.terms[tuple(mono)] = c

    @classmethod
    def const(cls, c: Rational = 1) -> "LaurentScalar":
        return cls({ONE: c})

    @classmethod
    def monomial(cls, exponents: Mapping[int, int] | Sequence[int], c: Rational = 1) -> "LaurentScalar":
        if isinstance(exponents, Mapping):
            items = exponents.items()
        else:
            items = enumerate(exponents, start=1)
        mono = tuple(sorted((int(v), int(e)) for v, e in items if e))
        return cls({mono: c})

    @classmethod
    def symbol(cls, i: int) -> "LaurentScalar":
        return cls({((i, 1),): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def exponents(self, n: int) -> tuple[int, ...]:
        if not self.is_monomial():
            raise ValueError("not a single monomial")
        (mono,) = self.terms
        d = dict(mono)
        return tuple(d.get(i, 0) for i in range(1, n + 1))

    def coefficient(self) -> Rational:
        if not self.is_monomial():
            raise ValueError("not a single monomial")
        return next(iter(self.terms.values()))

    def conj(self) -> "LaurentScalar":
        return LaurentScalar({mono_conj(m): c for m, c in self.terms.items()})

    def __add__(self, other):
        other = _as_laurent(other)
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, 0) + c
        return LaurentScalar(acc)

    __radd__ = __add__

    def __neg__(self):
        return LaurentScalar({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_laurent(other))

    def __mul__(self, other):
        other = _as_laurent(other)
        acc: dict = defaultdict(int)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                acc[mono_mul(m1, m2)] += c1 * c2
        return LaurentScalar(acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = _as_laurent(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, lam: Sequence[complex]) -> complex:
        return sum((complex(c) * mono_value(m, lam) for m, c in self.terms.items()), 0j)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            sym = "*".join(f"l{v}^{e}" if e != 1 else f"l{v}" for v, e in m)
            parts.append(f"{c}" + (f"*{sym}" if sym else ""))
        return " + ".join(parts)


def _as_laurent(x) -> LaurentScalar:
    if isinstance(x, LaurentScalar):
        return x
    if isinstance(x, Rational) and not isinstance(x, bool):
        return LaurentScalar.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a Laurent coefficient")


def word_mul(p: tuple[int, int], q: tuple[int, int]) -> tuple[int, int]:
    """``(S*)^a S^b (S*)^c S^d = (S*)^{a+max(c-b,0)} S^{d+max(b-c,0)}``."""
    a, b = p
    c, d = q
    if b >= c:
        return (a, d + b - c)
    return (a + c - b, d)


class TensorOperator:
    """Finite sum of elementary tensors of shift words with exact coefficients.

    ``terms`` maps ``(words, mono)`` to a nonzero rational, where ``words`` is a
    tuple of ``(a, b)`` pairs, one per tensor factor.
    """

    __slots__ = ("factors", "terms", "_hash")

    def __init__(self, factors: int, terms: Optional[Mapping] = None, *, _trusted: bool = False):
        self.factors = int(factors)
        self._hash = None
        if _trusted:
            self.terms = dict(terms or {})
            return
        clean: dict = {}
        for (words, mono), c in (terms or {}).items():
            words = tuple((int(a), int(b)) for a, b in words)
            if len(words) != self.factors:
                raise FactorMismatch(f"word {words} has wrong number of factors")
            if any(a < 0 or b < 0 for a, b in words):
                raise ValueError("shift exponents must be non-negative")
            c = _exact(c)
            if c:
                key = (words, tuple(mono))
                clean[key] = clean.get(key, 0) + c
        self.terms = {k: v for k, v in clean.items() if v}

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, factors: int):
        return cls(factors, {}, _trusted=True)

    @classmethod
    def identity(cls, factors: int, coeff: LaurentScalar | Rational = 1):
        coeff = _as_laurent(coeff)
        word = ((0, 0),) * factors
        return cls(factors, {(word, m): c for m, c in coeff.terms.items()}, _trusted=True)

    @classmethod
    def from_factors(cls, parts: Sequence["TensorOperator"]):
        out = cls.identity(0)
        for p in parts:
            out = out.kron(p)
        return out

    # -- algebra --------------------------------------------------------------
    def _new(self, factors, terms):
        return TensorOperator(factors, terms, _trusted=True)

    def _check(self, other):
        if not isinstance(other, TensorOperator):
            raise TypeError(f"expected an operator, got {type(other).__name__}")
        if other.factors != self.factors:
            raise FactorMismatch(f"factor count {self.factors} != {other.factors}")

    def __add__(self, other):
        if isinstance(other, Rational) or isinstance(other, LaurentScalar):
            other = self.identity(self.factors, other)
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            v = acc.get(k, 0) + c
            if v:
                acc[k] = v
            else:
                acc.pop(k, None)
        return self._new(self.factors, acc)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return self._new(self.factors, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, Rational) or isinstance(other, LaurentScalar):
            other = self.identity(self.factors, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, coeff: LaurentScalar | Rational) -> "TensorOperator":
        coeff = _as_laurent(coeff)
        acc: dict = defaultdict(int)
        for (w, m), c in self.terms.items():
            for m2, c2 in coeff.terms.items():
                acc[(w, mono_mul(m, m2))] += c * c2
        return self._new(self.factors, {k: v for k, v in acc.items() if v})

    def __mul__(self, other):
        if isinstance(other, (Rational, LaurentScalar)) and not isinstance(other, bool):
            return self.scale(other)
        self._check(other)
        acc: dict = defaultdict(int)
        m = self.factors
        for (wx, mx), cx in self.terms.items():
            for (wy, my), cy in other.terms.items():
                if m == 1:
                    w = (word_mul(wx[0], wy[0]),)
                else:
                    w = tuple(word_mul(p, q) for p, q in zip(wx, wy))
                acc[(w, mono_mul(mx, my))] += cx * cy
        return self._new(m, {k: v for k, v in acc.items() if v})

    def __rmul__(self, other):
        if isinstance(other, (Rational, LaurentScalar)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = self.identity(self.factors)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def adjoint(self) -> "TensorOperator":
        return self._new(
            self.factors,
            {(tuple((b, a) for a, b in w), mono_conj(m)): c for (w, m), c in self.terms.items()},
        )

    @property
    def H(self):
        return self.adjoint()

    def kron(self, other: "TensorOperator") -> "TensorOperator":
        """Tensor product ``self (x) other`` (factors concatenate)."""
        acc: dict = defaultdict(int)
        for (wx, mx), cx in self.terms.items():
            for (wy, my), cy in other.terms.items():
                acc[(wx + wy, mono_mul(mx, my))] += cx * cy
        return TensorOperator(self.factors + other.factors, {k: v for k, v in acc.items() if v}, _trusted=True)

    # -- comparisons and queries ------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = self.identity(self.factors, other)
        if not isinstance(other, TensorOperator):
            return NotImplemented
        return self.factors == other.factors and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.factors, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def monomials(self) -> set:
        return {m for (_, m) in self.terms}

    def common_monomial(self) -> Optional[Mono]:
        monos = self.monomials()
        return next(iter(monos)) if len(monos) == 1 else None

    def strip_phase(self) -> tuple[LaurentScalar, "TensorOperator"]:
        """Split off a common Laurent monomial: ``self = phase * rest``."""
        mono = self.common_monomial()
        if mono is None:
            if self.is_zero():
                return LaurentScalar.const(1), self
            raise ValueError("terms carry different lambda monomials")
        rest = self._new(self.factors, {(w, ONE): c for (w, _), c in self.terms.items()})
        return LaurentScalar({mono: 1}), rest

    def shift_degree(self) -> int:
        return max((max(a, b) for (w, _) in self.terms for a, b in w), default=0)

    def substitute(self, lam: Sequence[complex]) -> dict:
        """Numeric coefficients: maps word tuples to complex values."""
        acc: dict = defaultdict(complex)
        for (w, m), c in self.terms.items():
            acc[w] += complex(c) * mono_value(m, lam)
        return {w: v for w, v in acc.items() if v != 0}

    def entry(self, row: Sequence[int], col: Sequence[int]) -> LaurentScalar:
        acc: dict = defaultdict(int)
        for (w, m), c in self.terms.items():
            if all(cc >= b and rr == cc - b + a for (a, b), rr, cc in zip(w, row, col)):
                acc[m] += c
        return LaurentScalar(acc)

    def sigma_last(self) -> "TensorOperator":
        """Apply the character ``S -> 1`` to the last tensor factor."""
        if self.factors == 0:
            raise FactorMismatch("no tensor factor to compress")
        acc: dict = defaultdict(int)
        for (w, m), c in self.terms.items():
            acc[(w[:-1], m)] += c
        return TensorOperator(self.factors - 1, {k: v for k, v in acc.items() if v}, _trusted=True)

    def to_matrix(self, dim: int, lam: Optional[Sequence[complex]] = None) -> sp.csr_matrix:
        """Compression ``P_N X P_N`` to the first ``dim`` basis vectors of every factor."""
        return _materialize(self, dim, lam or ())

    # -- serialization --------------------------------------------------------
    def to_json(self, n: Optional[int] = None) -> dict:
        width = n if n is not None else max((v for (_, m) in self.terms for v, _ in m), default=0)
        terms = []
        for (w, m), c in sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            c = Fraction(c)
            exps = [0] * width
            for v, e in m:
                exps[v - 1] = e
            terms.append(
                {
                    "word": [[a, b] for a, b in w],
                    "coeff": {"num": c.numerator, "den": c.denominator, "lambda_exponents": exps},
                }
            )
        return {"factors": self.factors, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "TensorOperator":
        terms = {}
        for t in data["terms"]:
            coeff = t["coeff"]
            mono = tuple((i + 1, e) for i, e in enumerate(coeff.get("lambda_exponents", [])) if e)
            key = (tuple(tuple(p) for p in t["word"]), mono)
            terms[key] = terms.get(key, 0) + Fraction(coeff["num"], coeff.get("den", 1))
        return cls(int(data["factors"]), terms)

    def dumps(self, n: Optional[int] = None) -> str:
        return json.dumps(self.to_json(n), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "TensorOperator":
        return cls.from_json(json.loads(text))

    def __repr__(self):
        if not self.terms:
            return f"TensorOperator({self.factors}, 0)"
        parts = []
        for (w, m), c in sorted(self.terms.items()):
            lab = " (x) ".join(_word_label(p) for p in w) or "1"
            mono = "".join(f"*l{v}^{e}" for v, e in m)
            parts.append(f"{c}{mono}*[{lab}]")
        return " + ".join(parts)


def _word_label(p):
    a, b = p
    if a == b == 0:
        return "I"
    s = ""
    if a:
        s += "S*" if a == 1 else f"S*^{a}"
    if b:
        s += "S" if b == 1 else f"S^{b}"
    return s


class ToeplitzElement(TensorOperator):
    """Single-factor operator ``sum c_{a,b} (S*)^a S^b``."""

    __slots__ = ()

    def __init__(self, terms: Optional[Mapping] = None, *, _trusted: bool = False):
        if _trusted:
            super().__init__(1, terms, _trusted=True)
            return
        wrapped = {}
        for key, c in (terms or {}).items():
            # accept {(a, b): coeff} with coeff rational or LaurentScalar
            if len(key) == 2 and all(isinstance(x, int) for x in key):
                for m, cc in _as_laurent(c).terms.items():
                    k2 = (((key[0], key[1]),), m)
                    wrapped[k2] = wrapped.get(k2, 0) + cc
            else:
                wrapped[key] = wrapped.get(key, 0) + c
        super().__init__(1, wrapped)

    def _new(self, factors, terms):
        if factors == 1:
            return ToeplitzElement(terms, _trusted=True)
        return TensorOperator(factors, terms, _trusted=True)

    @classmethod
    def I(cls):
        return cls({(0, 0): 1})

    @classmethod
    def S(cls):
        return cls({(0, 1): 1})

    @classmethod
    def Sstar(cls):
        return cls({(1, 0): 1})

    @classmethod
    def P0(cls):
        return cls({(0, 0): 1, (1, 1): -1})

    @classmethod
    def rank_one(cls, i: int, j: int):
        """``|e_i><e_j| = (S*)^i P0 S^j``."""
        return cls({(i, j): 1, (i + 1, j + 1): -1})

    @classmethod
    def word(cls, a: int, b: int, coeff=1):
        return cls({(a, b): coeff})

    def coefficients(self) -> dict:
        """Map ``(a, b) -> LaurentScalar``."""
        acc: dict = defaultdict(dict)
        for (w, m), c in self.terms.items():
            acc[w[0]][m] = c
        return {ab: LaurentScalar(t) for ab, t in acc.items()}


def t_mul(x: ToeplitzElement, y: ToeplitzElement) -> ToeplitzElement:
    if x.factors != 1 or y.factors != 1:
        raise FactorMismatch("Toeplitz elements have exactly one factor")
    return x * y


def t_adjoint(x: ToeplitzElement) -> ToeplitzElement:
    return x.adjoint()


def matrix_entry(x: TensorOperator, row, col) -> LaurentScalar:
    row = (row,) if isinstance(row, int) else tuple(row)
    col = (col,) if isinstance(col, int) else tuple(col)
    if len(row) != x.factors or len(col) != x.factors:
        raise FactorMismatch("index length differs from factor count")
    if any(v < 0 for v in row + col):
        raise ValueError("basis indices are non-negative")
    return x.entry(row, col)


def tensor_mul(x: TensorOperator, y: TensorOperator) -> TensorOperator:
    x._check(y)
    return x * y


def tensor_add(x: TensorOperator, y: TensorOperator) -> TensorOperator:
    x._check(y)
    return x + y


def tensor_adjoint(x: TensorOperator) -> TensorOperator:
    return x.adjoint()


def embed(x: TensorOperator, position: int, m: int) -> TensorOperator:
    """``I^{(x) position} (x) x (x) I^{(x) (m - 1 - position)}``."""
    if x.factors != 1:
        raise FactorMismatch("only single-factor operators can be embedded")
    if not 0 <= position < m:
        raise IndexError(f"position {position} outside 0..{m - 1}")
    return TensorOperator.identity(position).kron(x).kron(TensorOperator.identity(m - 1 - position))


def sigma_char(x: TensorOperator) -> LaurentScalar:
    """The character of the Toeplitz algebra sending ``S`` to 1 (sum of coefficients)."""
    if x.factors != 1:
        raise FactorMismatch("sigma acts on single-factor operators")
    acc: dict = defaultdict(int)
    for (_, m), c in x.terms.items():
        acc[m] += c
    return LaurentScalar(acc)


def shift_word_matrix(a: int, b: int, dim: int) -> sp.csr_matrix:
    """Compression of ``(S*)^a S^b`` to ``span{e_0..e_{dim-1}}``."""
    cols = np.arange(b, dim)
    rows = cols - b + a
    keep = rows < dim
    return sp.csr_matrix((np.ones(keep.sum()), (rows[keep], cols[keep])), shape=(dim, dim))


def _materialize(x: TensorOperator, dim: int, lam) -> sp.csr_matrix:
    m = x.factors
    size = dim ** m
    if m == 0:
        val = sum(x.substitute(lam).values(), 0j) if x.terms else 0j
        return sp.csr_matrix(np.array([[val]], dtype=complex))
    grid = np.indices((dim,) * m).reshape(m, -1)  # column multi-indices
    strides = dim ** np.arange(m - 1, -1, -1)
    rows_all, cols_all, vals_all = [], [], []
    for w, val in x.substitute(lam).items():
        ok = np.ones(size, dtype=bool)
        rows = np.zeros(size, dtype=np.int64)
        for t, (a, b) in enumerate(w):
            r = grid[t] - b + a
            ok &= (grid[t] >= b) & (r < dim)
            rows += np.where(ok, r, 0) * strides[t]
        idx = np.nonzero(ok)[0]
        rows_all.append(rows[idx])
        cols_all.append(idx)
        vals_all.append(np.full(idx.size, val, dtype=complex))
    if not rows_all:
        return sp.csr_matrix((size, size), dtype=complex)
    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(size, size),
    ).tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


def operator_from_labels(labels: Iterable[str]) -> TensorOperator:
    """Elementary tensor from labels among ``I, S, S*, P0``."""
    table = {"I": ToeplitzElement.I, "S": ToeplitzElement.S, "S*": ToeplitzElement.Sstar, "P0": ToeplitzElement.P0}
    return TensorOperator.from_factors([table[s]() for s in labels])
