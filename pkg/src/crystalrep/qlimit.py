"""The q-deformed representations at truncation and their q -> 0+ limit.

Every factor is truncated to ``span{e_0..e_{N-1}}``.  Images are Kronecker
products and sums of single-factor matrices, so no truncated products occur
and each matrix entry is exact.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .numeric import op_norm, window_mask
from .rep.symbolic import SymbolicRep, build, lambda_values
from .weyl import NormalForm, WordError

__all__ = [
    "QRep",
    "q_elementary",
    "q_character",
    "q_convolve",
    "q_build",
    "scaled_generator",
    "limit_distance",
    "unitarity_defect",
    "convergence_table",
    "write_csv",
]


@dataclass
class QRep:
    n: int
    q: float
    dim: int
    factors: int
    images: dict  # (i, j) -> csr_matrix
    word: Optional[NormalForm] = None
    lam: tuple = ()

    @property
    def size(self) -> int:
        return self.dim ** self.factors

    def u(self, i: int, j: int) -> sp.csr_matrix:
        m = self.images.get((i, j))
        return sp.csr_matrix((self.size, self.size), dtype=complex) if m is None else m


def _check_q(q: float, dim: int) -> None:
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if dim < 2:
        raise ValueError(f"truncation N must be at least 2, got {dim}")


def q_elementary(n: int, r: int, q: float, dim: int) -> QRep:
    """``psi^(q)_{s_r}`` on ``C^N`` with ``N`` the number operator ``diag(0..N-1)``."""
    _check_q(q, dim)
    if not 1 <= r <= n:
        raise WordError(f"s_{r} out of range for n={n}")
    k = np.arange(dim)
    qN = sp.diags(q ** k.astype(float)).astype(complex)
    root = sp.diags(np.sqrt(1 - q ** (2 * k.astype(float)))).astype(complex)
    S = sp.diags(np.ones(dim - 1), 1).astype(complex)  # S e_k = e_{k-1}
    I = sp.identity(dim, dtype=complex)
    images = {(i, i): I for i in range(1, n + 2)}
    images[(r, r)] = (S @ root).tocsr()
    images[(r + 1, r + 1)] = (root @ S.T).tocsr()
    images[(r, r + 1)] = (-q * qN).tocsr()
    images[(r + 1, r)] = qN.tocsr()
    return QRep(n, q, dim, 1, {k_: sp.csr_matrix(v) for k_, v in images.items()}, NormalForm(n, ((r, r),)))


def q_character(n: int, lam: Sequence[complex], q: float, dim: int) -> QRep:
    lam = tuple(complex(x) for x in lam)
    scal = [lam[0]] + [np.conj(lam[i - 2]) * lam[i - 1] for i in range(2, n + 1)] + [np.conj(lam[n - 1])]
    images = {(i, i): sp.csr_matrix(np.array([[scal[i - 1]]], dtype=complex)) for i in range(1, n + 2)}
    return QRep(n, q, dim, 0, images, NormalForm(n, ()), lam)


def q_convolve(phi: QRep, psi: QRep) -> QRep:
    """``(phi (x) psi) Delta_q`` with the full sum over the middle index."""
    if phi.n != psi.n:
        raise ValueError(f"rank mismatch {phi.n} != {psi.n}")
    N = phi.n + 1
    images = {}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            acc = None
            for k in range(1, N + 1):
                x, y = phi.images.get((i, k)), psi.images.get((k, j))
                if x is None or y is None:
                    continue
                t = sp.kron(x, y, format="csr")
                acc = t if acc is None else acc + t
            if acc is not None and acc.nnz:
                images[(i, j)] = acc.tocsr()
    return QRep(phi.n, phi.q, phi.dim, phi.factors + psi.factors, images, None, phi.lam or psi.lam)


def q_build(lam: Sequence[complex], nf: NormalForm, q: float, dim: int) -> QRep:
    """``chi_lambda * psi^(q)_{s_i1} * ... * psi^(q)_{s_im}``."""
    _check_q(q, dim)
    lam = lambda_values(lam, nf.n) if isinstance(lam, str) else tuple(complex(x) for x in lam)
    rep = q_character(nf.n, lam, q, dim)
    for r in nf.letters():
        rep = q_convolve(rep, q_elementary(nf.n, r, q, dim))
    rep.word, rep.lam = nf, lam
    return rep


def scaled_generator(qrep: QRep, i: int, j: int) -> sp.csr_matrix:
    """``(-q)^{min(i-j, 0)} psi^(q)(u_ij)``."""
    return (qrep.u(i, j) * (-qrep.q) ** min(i - j, 0)).tocsr()


def _compress(mat, mask):
    idx = np.nonzero(mask)[0]
    return mat[idx][:, idx]


def limit_distance(qrep: QRep, srep: SymbolicRep, window: int) -> dict:
    """Window norm of ``scaled - limit`` for every generator."""
    if srep.factors != qrep.factors:
        raise ValueError(f"factor mismatch {qrep.factors} != {srep.factors}")
    if window > qrep.dim // 2 and qrep.factors:
        raise ValueError(f"window {window} must be at most N/2 = {qrep.dim // 2}")
    lam = qrep.lam or lambda_values(srep.lam, srep.n)
    mask = window_mask(qrep.dim, qrep.factors, window)
    N = qrep.n + 1
    out = {}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            limit = srep.z(i, j).to_matrix(qrep.dim, lam)
            diff = _compress(scaled_generator(qrep, i, j) - limit, mask)
            out[(i, j)] = op_norm(diff)
    return out


def unitarity_defect(qrep: QRep, window: int) -> float:
    """Window norm of ``sum_k u_ik u_jk^* - delta_ij`` over all ``i, j``."""
    mask = window_mask(qrep.dim, qrep.factors, window)
    N = qrep.n + 1
    worst = 0.0
    I = sp.identity(qrep.size, dtype=complex, format="csr")
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            acc = -I if i == j else sp.csr_matrix((qrep.size, qrep.size), dtype=complex)
            for k in range(1, N + 1):
                acc = acc + qrep.u(i, k) @ qrep.u(j, k).conj().T
            worst = max(worst, op_norm(_compress(acc, mask)))
    return worst


def convergence_table(
    lam: Sequence[complex], nf: NormalForm, qs: Iterable[float], dim: int, window: int
) -> list:
    """Rows ``(q, i, j, distance)`` for each ``q`` in order."""
    if window > dim // 2:
        raise ValueError(f"window {window} must be at most N/2 = {dim // 2}")
    srep = build(tuple(lam), nf)
    rows = []
    for q in qs:
        d = limit_distance(q_build(lam, nf, q, dim), srep, window)
        rows.extend((q, i, j, v) for (i, j), v in sorted(d.items()))
    return rows


def write_csv(rows: list, fh) -> None:
    w = csv.writer(fh)
    w.writerow(["q", "i", "j", "distance"])
    for q, i, j, d in rows:
        w.writerow([repr(float(q)), i, j, f"{d:.12e}"])
