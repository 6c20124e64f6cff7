"""The operators ``v_{j,i}``, ``E_{j,i}`` and the rank-one projectors built from them."""
from __future__ import annotations

from typing import Sequence

from ..opalgebra import TensorOperator, ToeplitzElement
from ..weyl import NormalForm, WordError, n_index, nprime_index
from .polynomial import StarPolynomial, z
from .symbolic import SymbolicRep, build

__all__ = [
    "v_poly",
    "E_poly",
    "V_op",
    "E_op",
    "closed_form_V",
    "closed_form_E",
    "rank_one_projector",
    "rank_one_direct",
    "in_range_pairs",
]

_I, _S, _Sstar, _P0 = ToeplitzElement.I(), ToeplitzElement.S(), ToeplitzElement.Sstar(), ToeplitzElement.P0()


def _check(nf: NormalForm, j: int, i: int) -> None:
    if not 1 <= j <= nf.k:
        raise WordError(f"segment index j={j} outside 1..{nf.k}")
    if not nf.a(j) <= i <= nf.b(j) + 1:
        raise WordError(f"i={i} outside [a_j, b_j + 1] = [{nf.a(j)}, {nf.b(j) + 1}]")


def in_range_pairs(nf: NormalForm):
    return [(j, i) for j in range(1, nf.k + 1) for i in range(nf.a(j), nf.b(j) + 2)]


def _chain(nf: NormalForm, j: int, i: int) -> list:
    """The pairs ``(j, i), (n(j,i), i+1), ...`` visited by the recursion for ``v_{j,i}``."""
    out = [(j, i)]
    while j > 1:
        m = n_index(nf, j, i)
        if m is None:
            break
        j, i = m, i + 1
        out.append((j, i))
    return out


def v_poly(nf: NormalForm, j: int, i: int) -> StarPolynomial:
    _check(nf, j, i)
    out = StarPolynomial.one()
    for jj, ii in _chain(nf, j, i):
        out = out * z(nf.b(jj) + 1, ii)
    return out


def E_poly(nf: NormalForm, j: int, i: int) -> StarPolynomial:
    _check(nf, j, i)
    out = v_poly(nf, j, i)
    m = nprime_index(nf, j, i) if j > 1 else None
    if m is not None:
        out = v_poly(nf, m, i).adjoint() * out
    for r in range(j - 1, 0, -1):
        v = v_poly(nf, r, nf.a(r))
        out = out * (v.adjoint() * v)
    return out


def _rep(ctx) -> SymbolicRep:
    if isinstance(ctx, SymbolicRep):
        return ctx
    lam, nf = ctx
    return build(lam, nf)


def V_op(ctx, j: int, i: int) -> TensorOperator:
    """Image of ``v_{j,i}``; ``ctx`` is a built rep or a ``(lambda, normal form)`` pair."""
    rep = _rep(ctx)
    return rep.evaluate(v_poly(rep.word, j, i))


def E_op(ctx, j: int, i: int) -> TensorOperator:
    rep = _rep(ctx)
    return rep.evaluate(E_poly(rep.word, j, i))


def _tensor(parts: Sequence[TensorOperator]) -> TensorOperator:
    return TensorOperator.from_factors(parts)


def _segment_top(nf: NormalForm, r: int, i: int) -> list:
    """``P0^(b_r+1-i) (x) S* (x) I^(i-a_r-1)``, or ``P0^(l_r)`` when ``i = a_r``."""
    a, b = nf.segments[r - 1]
    if i == a:
        return [_P0] * (b - a + 1)
    return [_P0] * (b + 1 - i) + [_Sstar] + [_I] * (i - a - 1)


def _segment_below(nf: NormalForm, j: int, i: int, r: int) -> list:
    """Factor of segment ``r < j`` in the closed form of ``V_{j,i}``.

    Each chain element ``(j_t, i + t)`` with ``j_t > r`` runs horizontally
    through segment ``r`` (``S`` on letter ``i+t``, ``S*`` on letter ``i+t-1``);
    consecutive elements cancel to ``I``.  If the chain enters segment ``r``
    itself at row ``i_T`` it contributes ``P0`` on letters ``>= i_T``.
    """
    a, b = nf.segments[r - 1]
    chain = _chain(nf, j, i)
    above = [ii for jj, ii in chain if jj > r]
    last = above[-1]
    entry = next((ii for jj, ii in chain if jj == r), None)
    parts = []
    for x in range(b, a - 1, -1):
        if entry is not None and x >= entry:
            parts.append(_P0)
        elif x == i - 1:
            parts.append(_Sstar)
        elif entry is None and x == last:
            parts.append(_S)
        else:
            parts.append(_I)
    return parts


def closed_form_V(nf: NormalForm, j: int, i: int) -> TensorOperator:
    """Phase-free elementary tensor ``T_k (x) ... (x) T_1`` equal to ``V_{j,i}`` up to a lambda monomial."""
    _check(nf, j, i)
    parts: list = []
    for r in range(nf.k, 0, -1):
        if r > j:
            parts += [_I] * nf.seg_len(r)
        elif r == j:
            parts += _segment_top(nf, r, i)
        else:
            parts += _segment_below(nf, j, i, r)
    return _tensor(parts)


def closed_form_E(nf: NormalForm, j: int, i: int) -> TensorOperator:
    _check(nf, j, i)
    parts: list = []
    for r in range(nf.k, 0, -1):
        if r > j:
            parts += [_I] * nf.seg_len(r)
        elif r == j:
            parts += _segment_top(nf, r, i)
        else:
            parts += [_P0] * nf.seg_len(r)
    return _tensor(parts)


def rank_one_direct(nf: NormalForm, rows: Sequence[int], cols: Sequence[int]) -> TensorOperator:
    """``|e_{rows}><e_{cols}|`` as an elementary tensor in factor order."""
    if len(rows) != len(nf) or len(cols) != len(nf):
        raise ValueError(f"need {len(nf)} row and column indices")
    if any(x < 0 for x in list(rows) + list(cols)):
        raise ValueError("indices must be non-negative")
    return _tensor([ToeplitzElement.rank_one(i, j) for i, j in zip(rows, cols)])


def rank_one_projector(ctx, rows: Sequence[int], cols: Sequence[int]) -> TensorOperator:
    """Build ``|e_rows><e_cols|`` from the ``E`` operators, segment by segment.

    The result carries a lambda phase; compare ``strip_phase()[1]`` with
    :func:`rank_one_direct`.
    """
    rep = _rep(ctx)
    nf = rep.word
    if len(rows) != len(nf) or len(cols) != len(nf):
        raise ValueError(f"need {len(nf)} row and column indices")
    if nf.k == 0:
        return TensorOperator.identity(0)
    E = {}

    def e(j, i):
        if (j, i) not in E:
            E[(j, i)] = E_op(rep, j, i)
        return E[(j, i)]

    T = e(nf.k, nf.a(nf.k))
    for s in range(nf.k, 0, -1):
        a, b = nf.segments[s - 1]
        off = nf.factor_offset(s)
        left = TensorOperator.identity(len(nf))
        right = TensorOperator.identity(len(nf))
        # letter t sits at position off + (b - t) and is driven by E_{s,1+t}
        for t in range(b, a - 1, -1):
            pos = off + b - t
            left = left * e(s, 1 + t) ** rows[pos]
        for t in range(a, b + 1):
            pos = off + b - t
            right = right * e(s, 1 + t).adjoint() ** cols[pos]
        T = left * T * right
    return T
