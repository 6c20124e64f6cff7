"""Exact identity suites: the defining relations and the projection identities.

Every identity is expressed as a *-polynomial that must evaluate to zero, so
a suite is a list of ``(relation id, instance label, polynomial)`` triples.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from ..opalgebra import TensorOperator, ToeplitzElement
from .polynomial import StarPolynomial, product, z, zs
from .symbolic import SymbolicRep

__all__ = [
    "RELATION_IDS",
    "PROJECTION_IDS",
    "Check",
    "RelationResult",
    "SuiteReport",
    "defining_relations",
    "projection_identities",
    "run_checks",
    "verify_defining_relations",
    "verify_projection_suite",
    "mutation_fixture",
]

RELATION_IDS = (
    "row-zero",
    "column-zero",
    "cross-commute",
    "overlap-zero",
    "adjacent-commutator",
    "far-commute",
    "determinant",
    "star-commute",
    "adjoint",
    "diagonal-adjoint",
)

PROJECTION_IDS = (
    "p-projection",
    "q-projection",
    "partial-isometry",
    "column-block-sum",
    "column-sum-unit",
    "row-block-sum",
    "row-sum-unit",
    "column-block-closed-form",
    "row-block-closed-form",
    "orthogonality",
    "bottom-row-commute",
    "intertwine",
)


@dataclass(frozen=True)
class Check:
    rel: str
    label: str
    poly: StarPolynomial


@dataclass
class RelationResult:
    rel: str
    checked: int = 0
    failures: int = 0
    counterexample: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "id": self.rel,
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures,
            "counterexample": self.counterexample,
        }


@dataclass
class SuiteReport:
    name: str
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failed_ids(self) -> list:
        return [r.rel for r in self.results if not r.passed]

    def __getitem__(self, rel: str) -> RelationResult:
        for r in self.results:
            if r.rel == rel:
                return r
        raise KeyError(rel)

    def to_json(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "relations": [r.to_json() for r in self.results]}


def _diag(lo: int, hi: int) -> StarPolynomial:
    """``z[lo,lo] z[lo+1,lo+1] ... z[hi,hi]`` (1 when empty)."""
    return product(z(t, t) for t in range(lo, hi + 1))


def _commutator(x: StarPolynomial, y: StarPolynomial) -> StarPolynomial:
    return x * y - y * x


def adjoint_formula(n: int, r: int, s: int) -> StarPolynomial:
    """The polynomial in the ``z``'s equal to ``z[r,s]^*``."""
    if r > s:
        mid = product(z(t, t + 1) for t in range(s, r))
    elif r < s:
        mid = product(z(t + 1, t) for t in range(r, s))
    else:
        mid = StarPolynomial.one()
    return _diag(1, min(r, s) - 1) * mid * _diag(max(r, s) + 1, n + 1)


def defining_relations(n: int) -> Iterator[Check]:
    N = n + 1
    idx = range(1, N + 1)
    for i, j, l in itertools.product(idx, repeat=3):
        if j < l:
            yield Check("row-zero", f"i={i},j={j},l={l}", z(i, j) * z(i, l))
    for i, k, j in itertools.product(idx, repeat=3):
        if i < k:
            yield Check("column-zero", f"i={i},k={k},j={j}", z(i, j) * z(k, j))
    for i, j, k, l in itertools.product(idx, repeat=4):
        if not (i < k and j < l):
            continue
        lab = f"i={i},j={j},k={k},l={l}"
        yield Check("cross-commute", lab, _commutator(z(i, l), z(k, j)))
        if max(i, j) >= min(k, l):
            yield Check("overlap-zero", lab, z(i, l) * z(k, j))
        elif max(i, j) + 1 == min(k, l):
            yield Check("adjacent-commutator", lab, _commutator(z(i, j), z(k, l)) - z(i, l) * z(k, j))
        else:
            yield Check("far-commute", lab, _commutator(z(i, j), z(k, l)))
    yield Check("determinant", f"n={n}", _diag(1, N) - 1)
    for i, j, r, s in itertools.product(idx, repeat=4):
        if i != r and j != s:
            yield Check("star-commute", f"i={i},j={j},r={r},s={s}", _commutator(z(i, j), zs(r, s)))
    for r, s in itertools.product(idx, repeat=2):
        yield Check("adjoint", f"r={r},s={s}", zs(r, s) - adjoint_formula(n, r, s))
    for i in idx:
        for j in range(i, N + 1):
            yield Check(
                "diagonal-adjoint",
                f"i={i},j={j}",
                _diag(i, j).adjoint() - _diag(1, i - 1) * _diag(j + 1, N),
            )


def _p(i, j):
    return zs(i, j) * z(i, j)


def _q(i, j):
    return z(i, j) * zs(i, j)


def _sum(polys: Iterable[StarPolynomial]) -> StarPolynomial:
    out = StarPolynomial.zero()
    for p in polys:
        out = out + p
    return out


def projection_identities(n: int) -> Iterator[Check]:
    N = n + 1
    idx = range(1, N + 1)
    for i, j in itertools.product(idx, repeat=2):
        lab = f"i={i},j={j}"
        p, q = _p(i, j), _q(i, j)
        yield Check("p-projection", lab + " idempotent", p * p - p)
        yield Check("p-projection", lab + " self-adjoint", p.adjoint() - p)
        yield Check("q-projection", lab + " idempotent", q * q - q)
        yield Check("q-projection", lab + " self-adjoint", q.adjoint() - q)
        yield Check("partial-isometry", lab, z(i, j) * zs(i, j) * z(i, j) - z(i, j))
    for i in idx:
        for j in range(i, N + 1):
            lab = f"i={i},j={j}"
            lhs = _sum(_q(k, j) for k in range(1, i + 1))
            rhs = _sum(_p(i, k) for k in range(j, N + 1))
            yield Check("column-block-sum", lab, lhs - rhs)
            if i < j:
                closed = _diag(1, i - 1) * z(i, j) * product(z(t + 1, t) for t in range(i, j)) * _diag(j + 1, N)
            else:
                closed = StarPolynomial.one()
            yield Check("column-block-closed-form", lab, lhs - closed)
    for j in idx:
        yield Check("column-sum-unit", f"j={j} q", _sum(_q(k, j) for k in range(1, j + 1)) - 1)
        yield Check("column-sum-unit", f"j={j} p", _sum(_p(j, k) for k in range(j, N + 1)) - 1)
    for i in idx:
        for j in range(1, i + 1):
            lab = f"i={i},j={j}"
            lhs = _sum(_q(i, k) for k in range(1, j + 1))
            rhs = _sum(_p(k, j) for k in range(i, N + 1))
            yield Check("row-block-sum", lab, lhs - rhs)
            if j < i:
                closed = _diag(1, j - 1) * z(i, j) * product(z(t, t + 1) for t in range(j, i)) * _diag(i + 1, N)
            else:
                closed = StarPolynomial.one()
            yield Check("row-block-closed-form", lab, lhs - closed)
    for i in idx:
        yield Check("row-sum-unit", f"i={i} q", _sum(_q(i, k) for k in range(1, i + 1)) - 1)
        yield Check("row-sum-unit", f"i={i} p", _sum(_p(k, i) for k in range(i, N + 1)) - 1)
    for i, j, k, l in itertools.product(idx, repeat=4):
        if i < k and j < l and (i >= l or k <= j):
            lab = f"i={i},l={l},k={k},j={j}"
            yield Check("orthogonality", lab + " z z*", z(i, l) * zs(k, j))
            yield Check("orthogonality", lab + " z* z", zs(i, l) * z(k, j))
    for i, j, k in itertools.product(idx, repeat=3):
        if max(i, j) < k:
            lab = f"i={i},j={j},k={k}"
            yield Check("bottom-row-commute", lab + " q", _commutator(_q(i, j), z(N, k)))
            yield Check("bottom-row-commute", lab + " p", _commutator(z(i, j), _p(N, k)))
    for i in range(1, N):
        for j in range(i, N):
            yield Check("intertwine", f"i={i},j={j}", z(i, j + 1) * zs(N, j + 1) - zs(N, j) * z(i, j))


def run_checks(rep: SymbolicRep, checks: Iterable[Check], name: str, ids: Iterable[str]) -> SuiteReport:
    results = {rel: RelationResult(rel) for rel in ids}
    for c in checks:
        res = results.setdefault(c.rel, RelationResult(c.rel))
        res.checked += 1
        val = rep.evaluate(c.poly)
        if not val.is_zero():
            res.failures += 1
            if res.counterexample is None:
                res.counterexample = f"{c.label}: residual has {len(val)} term(s)"
    return SuiteReport(name, list(results.values()))


def verify_defining_relations(rep: SymbolicRep, only: Optional[Iterable[str]] = None) -> SuiteReport:
    checks = defining_relations(rep.n)
    ids = RELATION_IDS
    if only is not None:
        ids = tuple(only)
        checks = (c for c in checks if c.rel in ids)
    return run_checks(rep, checks, "defining-relations", ids)


def verify_projection_suite(rep: SymbolicRep, only: Optional[Iterable[str]] = None) -> SuiteReport:
    checks = projection_identities(rep.n)
    ids = PROJECTION_IDS
    if only is not None:
        ids = tuple(only)
        checks = (c for c in checks if c.rel in ids)
    return run_checks(rep, checks, "projections", ids)


def _candidates(rep: SymbolicRep) -> Iterator[tuple[str, Callable[[TensorOperator], TensorOperator]]]:
    m = rep.factors
    yield "zero", lambda x: TensorOperator.zero(m)
    yield "negate", lambda x: -x
    yield "double", lambda x: x * 2
    yield "adjoint", lambda x: x.adjoint()
    yield "identity", lambda x: TensorOperator.identity(m)
    for t in range(m):
        for name, el in (("S", ToeplitzElement.S()), ("S*", ToeplitzElement.Sstar()), ("P0", ToeplitzElement.P0())):
            emb = TensorOperator.identity(t).kron(el).kron(TensorOperator.identity(m - 1 - t))
            yield f"{name}@{t}", (lambda e: lambda x: e)(emb)
            yield f"times {name}@{t}", (lambda e: lambda x: x * e)(emb)


def mutation_fixture(rep: SymbolicRep, rel: str) -> tuple[tuple[int, int], str, SymbolicRep]:
    """First single-image corruption (deterministic order) that breaks ``rel``.

    Returns ``((i, j), description, corrupted rep)``.
    """
    if rel in RELATION_IDS:
        verify = verify_defining_relations
    elif rel in PROJECTION_IDS:
        verify = verify_projection_suite
    else:
        raise KeyError(f"unknown relation id {rel!r}")
    N = rep.n + 1
    for i, j in itertools.product(range(1, N + 1), repeat=2):
        orig = rep.z(i, j)
        for desc, fn in _candidates(rep):
            new = fn(orig)
            if new == orig:
                continue
            images = dict(rep.images)
            images[(i, j)] = new
            bad = rep.with_images(images)
            if not verify(bad, only=[rel]).passed:
                return (i, j), desc, bad
    raise LookupError(f"no single-image corruption breaks {rel!r}")
