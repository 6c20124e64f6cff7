"""Equivalence witnesses, factorization of representations, and identification.

Symbolic mode peels the last tensor factor with the character ``S -> 1``.
Numeric mode works from matrices only: it finds the isometry ``W``, takes
its wandering space and compresses ``Y1`` there.  Both loops assemble the
word segment by segment and recover ``lambda`` from the scalar bottom-right
generator at each rank descent.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .numeric import (
    DEFAULT_TOL,
    TruncatedRep,
    W_op,
    distinct_points,
    r_index_numeric,
    spectrum,
    wold,
)
from .opalgebra import TensorOperator
from .rep.polynomial import StarPolynomial, parse_polynomial, z
from .rep.symbolic import LambdaSpec, SymbolicRep, build, elementary_rep, convolve
from .rep.voperators import E_poly
from .weyl import NormalForm, format_word, m_invariant

__all__ = [
    "ClassifyError",
    "r_index",
    "EquivalenceVerdict",
    "equivalent",
    "verify_witness",
    "peel_symbolic",
    "FactorStep",
    "factor_numeric",
    "IdentificationResult",
    "identify",
]

log = logging.getLogger(__name__)


class ClassifyError(RuntimeError):
    """A peel or descent step broke its contract."""


# -- r(pi) --------------------------------------------------------------------


def r_index(rep: Union[SymbolicRep, TruncatedRep], tol: float = DEFAULT_TOL) -> int:
    """``min{i : pi(z[n+1,i]) != 0}``; exact for symbolic reps, window test otherwise."""
    if isinstance(rep, TruncatedRep):
        return r_index_numeric(rep, tol)
    N = rep.n + 1
    for i in range(1, N + 1):
        if rep.z(N, i):
            return i
    raise ValueError("every bottom-row generator vanishes; not a representation")


# -- equivalence ----------------------------------------------------------------


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    case: Optional[str] = None  # lambda, I, II, III, IV
    witness: Optional[StarPolynomial] = None
    kind: Optional[str] = None  # zero-vs-nonzero, projection-vs-not, spectral
    nonzero_side: Optional[int] = None  # 0 or 1 for zero-vs-nonzero
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "case": self.case,
            "witness": None if self.witness is None else str(self.witness),
            "kind": self.kind,
            "nonzero_side": self.nonzero_side,
            "detail": self.detail,
        }

    @classmethod
    def from_json(cls, data: dict) -> "EquivalenceVerdict":
        w = data.get("witness")
        return cls(
            data["equivalent"],
            data.get("case"),
            None if w is None else parse_polynomial(w),
            data.get("kind"),
            data.get("nonzero_side"),
            dict(data.get("detail") or {}),
        )


def _lam_key(lam: LambdaSpec, n: int):
    if lam == "one":
        return tuple([1 + 0j] * n)
    if lam == "formal":
        return "formal"
    return tuple(complex(x) for x in lam)


def _same_lambda(l1, l2, n: int, tol: float = 1e-12) -> bool:
    a, b = _lam_key(l1, n), _lam_key(l2, n)
    if a == "formal" or b == "formal":
        if a != b:
            raise ValueError("cannot compare formal lambda with assigned values")
        return True
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def _projection_type(X: TensorOperator) -> bool:
    """``X`` is a unimodular phase times a nonzero projection."""
    if not X:
        return False
    try:
        _, T = X.strip_phase()
    except ValueError:
        return False
    return T.adjoint() == T and T * T == T


def _phase_spectrum(X: TensorOperator, lam: Sequence[complex]) -> list:
    """Spectrum of a phase times an elementary ``P0``/``I`` tensor.

    Such a tensor is exact under truncation to two levels per factor, so the
    small matrix has the true spectrum.
    """
    return distinct_points(spectrum(X.to_matrix(2, lam)))


def _hausdorff(a: list, b: list) -> float:
    if not a or not b:
        return float("inf")
    d1 = max(min(abs(x - y) for y in b) for x in a)
    d2 = max(min(abs(x - y) for x in a) for y in b)
    return max(d1, d2)


def _window_norm_sym(X: TensorOperator, lam: Sequence[complex], window: int = 2) -> float:
    """Norm of the compression to factor indices ``< window`` (materialized directly)."""
    from .numeric import op_norm

    return op_norm(X.to_matrix(window, lam))


def _first_split(nf: NormalForm, nf2: NormalForm) -> Optional[int]:
    for j in range(1, min(nf.k, nf2.k) + 1):
        if nf.segments[j - 1] != nf2.segments[j - 1]:
            return j
    return None


def _case_witness(nf1: NormalForm, nf2: NormalForm):
    """Case tag, witness polynomial, property and which side (0/1) carries it."""
    j = _first_split(nf1, nf2)
    if j is not None:
        (a1, b1), (a2, b2) = nf1.segments[j - 1], nf2.segments[j - 1]
        if b1 != b2:
            big, side = (nf1, 0) if b1 > b2 else (nf2, 1)
            b = big.b(j)
            return "I", z(b, m_invariant(big, b)[-1]), "zero-vs-nonzero", side
        big, side = (nf1, 0) if a1 > a2 else (nf2, 1)
        return "II", E_poly(big, j, big.a(j)), "projection-vs-not", side
    # one word extends the other
    big, side, case = (nf1, 0, "III") if nf1.k > nf2.k else (nf2, 1, "IV")
    b = big.b(big.k)
    return case, z(b, m_invariant(big, b)[-1]), "zero-vs-nonzero", side


def _lambda_witness(nf: NormalForm, l1, l2):
    n = nf.n
    v1, v2 = _lam_key(l1, n), _lam_key(l2, n)
    j = max(i for i in range(1, n + 1) if abs(v1[i - 1] - v2[i - 1]) > 1e-12)
    for i in range(1, nf.k + 1):
        if j == nf.b(i):
            return E_poly(nf, i, nf.a(i))
    return z(j + 1, m_invariant(nf, j + 1)[-1])


def _reps(l1, nf1, l2, nf2):
    lazy = max(len(nf1), len(nf2)) > 8
    return build(l1, nf1, lazy=lazy), build(l2, nf2, lazy=lazy)


def verify_witness(verdict: EquivalenceVerdict, l1, nf1, l2, nf2, window: int = 2) -> bool:
    """Re-evaluate the witness in both representations and test its property."""
    if verdict.equivalent:
        return verdict.witness is None
    p1, p2 = _reps(l1, nf1, l2, nf2)
    X = (p1.evaluate(verdict.witness), p2.evaluate(verdict.witness))
    if verdict.kind == "zero-vs-nonzero":
        s = verdict.nonzero_side
        lam = _lam_key((l1, l2)[s], nf1.n)
        lam = (1 + 0j,) * nf1.n if lam == "formal" else lam
        return X[1 - s].is_zero() and _window_norm_sym(X[s], lam, window) >= 0.5
    if verdict.kind == "projection-vs-not":
        s = verdict.nonzero_side
        return _projection_type(X[s]) and not _projection_type(X[1 - s])
    if verdict.kind == "spectral":
        if not (_projection_type(X[0]) and _projection_type(X[1])):
            return False
        if _lam_key(l1, nf1.n) == "formal":
            return X[0].strip_phase()[0] != X[1].strip_phase()[0]
        s1 = _phase_spectrum(X[0], _lam_key(l1, nf1.n))
        s2 = _phase_spectrum(X[1], _lam_key(l2, nf2.n))
        return _hausdorff(s1, s2) >= 1e-6
    return False


def _search_witness(l1, nf1, l2, nf2) -> Optional[EquivalenceVerdict]:
    """Fallback: first generator or ``E`` operator that separates the two reps."""
    p1, p2 = _reps(l1, nf1, l2, nf2)
    N = nf1.n + 1
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            a, b = bool(p1.z(i, j)), bool(p2.z(i, j))
            if a != b:
                return EquivalenceVerdict(False, "search", z(i, j), "zero-vs-nonzero", 0 if a else 1)
    return None


def equivalent(l1: LambdaSpec, nf1: NormalForm, l2: LambdaSpec, nf2: NormalForm) -> EquivalenceVerdict:
    """Decide ``psi_{l1,nf1} ~ psi_{l2,nf2}``; inequivalence comes with a checked witness."""
    if nf1.n != nf2.n:
        raise ValueError(f"rank mismatch {nf1.n} != {nf2.n}")
    same_l = _same_lambda(l1, l2, nf1.n)
    if nf1 == nf2 and same_l:
        return EquivalenceVerdict(True)
    if nf1 == nf2:
        poly = _lambda_witness(nf1, l1, l2)
        verdict = EquivalenceVerdict(False, "lambda", poly, "spectral")
    else:
        case, poly, kind, side = _case_witness(nf1, nf2)
        verdict = EquivalenceVerdict(False, case, poly, kind, side)
    if verify_witness(verdict, l1, nf1, l2, nf2):
        return verdict
    log.warning("witness %s for case %s did not verify; searching", verdict.witness, verdict.case)
    found = _search_witness(l1, nf1, l2, nf2)
    if found is None or not verify_witness(found, l1, nf1, l2, nf2):
        raise ClassifyError(f"no verified witness for {format_word(nf1)} vs {format_word(nf2)}")
    found.detail["case_tried"] = verdict.case
    return found


# -- symbolic peel ------------------------------------------------------------


def peel_symbolic(rep: SymbolicRep) -> tuple:
    """``(r, pi_1)`` with ``pi_1 = (id (x) sigma) pi`` and ``pi = pi_1 * psi_{s_r}``."""
    r = r_index(rep)
    if r > rep.n:
        raise ClassifyError("r(pi) = n+1: nothing to peel at this rank")
    if rep.factors == 0:
        raise ClassifyError("no tensor factor left to peel")
    images = {}
    for key, op in rep.images.items():
        if op:
            c = op.sigma_last()
            if c:
                images[key] = c
    pi1 = SymbolicRep(rep.n, rep.factors - 1, images, None, rep.lam)
    back = convolve(pi1, elementary_rep(rep.n, r))
    N = rep.n + 1
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if back.z(i, j) != rep.z(i, j):
                raise ClassifyError(f"peel at r={r} does not reproduce z[{i},{j}]; input not in standard form")
    return r, pi1


# -- numeric factorization ----------------------------------------------------


@dataclass
class FactorStep:
    r: int
    phase: complex  # eigenvalue of W_{n+1,r}
    rep: TruncatedRep  # pi_1 on the wandering fiber
    diagnostics: dict


def _Y_matrices(trep: TruncatedRep, r: int, W) -> tuple:
    N = trep.n + 1
    Wh = W.conj().T.tocsr()
    I = trep.identity()
    Y1, Y2 = {}, {}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if j == r:
                Y1[(i, j)] = (trep.z(i, r) @ W).tocsr()
            elif j == r + 1:
                Y1[(i, j)] = (Wh @ trep.z(i, r + 1)).tocsr()
            else:
                Y1[(i, j)] = trep.z(i, j)
            if i == j == r + 1:
                Y2[(i, j)] = W
            elif i == j == r:
                Y2[(i, j)] = Wh
            elif {i, j} == {r, r + 1}:
                Y2[(i, j)] = (I - W @ Wh).tocsr()
            elif i == j:
                Y2[(i, j)] = I
    return Y1, Y2


def factor_numeric(trep: TruncatedRep, tol: float = DEFAULT_TOL) -> FactorStep:
    """One factorization step ``pi ~ pi_1 * psi_{s_r}`` computed from matrices.

    The tensor structure of the truncation is used only to pick reference
    vectors ``e_mu (x) e_0`` that fix the basis of the wandering space.
    """
    n, N = trep.n, trep.n + 1
    r = r_index_numeric(trep, tol)
    if r > n:
        raise ClassifyError("r(pi) = n+1: nothing to factor at this rank")
    if trep.factors == 0:
        raise ClassifyError("one-dimensional input cannot have r <= n")
    mask = trep.mask
    Wr = W_op(trep, N, r, r)
    phase = complex(Wr.diagonal()[mask].mean())
    scalar_defect = trep.wnorm(Wr - phase * trep.identity())
    if scalar_defect > tol:
        raise ClassifyError(f"W[{N},{r}] is not scalar on the window (defect {scalar_defect:.3e})")
    W = (np.conj(phase) * W_op(trep, N, r + 1, r)).tocsr()
    Y1, Y2 = _Y_matrices(trep, r, W)
    decomp = 0.0
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            acc = trep.zero()
            for k in range(min(i, j), max(i, j) + 1):
                if (k, j) in Y2:
                    acc = acc + Y1[(i, k)] @ Y2[(k, j)]
            decomp = max(decomp, trep.wnorm(trep.z(i, j) - acc))
    # wandering space over the whole truncation, aligned to e_mu (x) e_0
    dim, m = trep.dim, trep.factors
    full = np.ones(trep.size, dtype=bool)
    ref_idx = np.arange(0, trep.size, dim)  # last factor index 0
    reference = np.zeros((trep.size, ref_idx.size), dtype=complex)
    reference[ref_idx, np.arange(ref_idx.size)] = 1
    wres = wold(W, full, tol, reference=reference, depth=dim)
    if wres.dim != dim ** (m - 1):
        raise ClassifyError(f"wandering space has dimension {wres.dim}, expected {dim ** (m - 1)}")
    V = wres.basis
    Vh = V.conj().T
    images = {}
    for key, Y in Y1.items():
        blk = Vh @ (Y @ V)
        blk[np.abs(blk) < 1e-13] = 0
        mat = sp.csr_matrix(blk)
        if mat.nnz:
            images[key] = mat
    pi1 = TruncatedRep(n, dim, m - 1, trep.window, images, trep.lam, "factored")
    r1 = r_index_numeric(pi1, tol)
    diagnostics = {
        "r": r,
        "phase": [phase.real, phase.imag],
        "scalar_defect": scalar_defect,
        "decomposition_residual": decomp,
        "r_next": r1,
        **wres.to_json(),
    }
    if r1 != r + 1:
        raise ClassifyError(f"after factoring at r={r} expected r(pi_1) = {r + 1}, got {r1}")
    if wres.unitary_defect > 1e-6:
        raise ClassifyError(f"Wold decomposition has a unitary part (defect {wres.unitary_defect:.3e})")
    return FactorStep(r, phase, pi1, diagnostics)


# -- identification -------------------------------------------------------------


@dataclass
class IdentificationResult:
    lam: tuple  # LaurentScalar entries (symbolic) or complex (numeric)
    word: NormalForm
    steps: list = field(default_factory=list)
    mode: str = "symbolic"

    def lam_numeric(self, values: Optional[Sequence[complex]] = None) -> tuple:
        if self.mode == "numeric":
            return tuple(self.lam)
        vals = values if values is not None else (1 + 0j,) * self.word.n
        return tuple(x.evaluate(vals) for x in self.lam)

    def to_json(self) -> dict:
        if self.mode == "numeric":
            lam = [[complex(x).real, complex(x).imag] for x in self.lam]
        else:
            lam = [repr(x) for x in self.lam]
        return {"mode": self.mode, "n": self.word.n, "word": format_word(self.word), "lambda": lam, "steps": self.steps}


def _descend_symbolic(rep: SymbolicRep, rank: int) -> tuple:
    N = rank + 1
    Z = rep.z(N, N)
    if len(Z) == 0 or len(Z.monomials()) != 1 or any(any(ab != (0, 0) for ab in w) for (w, _) in Z.terms):
        raise ClassifyError(f"z[{N},{N}] is not a scalar when r = n+1 at rank {rank}")
    phase, rest = Z.strip_phase()
    (coeff,) = rest.terms.values()
    mu0 = phase * coeff
    scale = TensorOperator.identity(rep.factors, mu0)
    images = {}
    for (i, j), op in rep.images.items():
        if i <= rank and j <= rank and op:
            images[(i, j)] = scale * op if i == rank else op
    return mu0, SymbolicRep(rank - 1, rep.factors, images, None, rep.lam)


def _descend_numeric(trep: TruncatedRep, rank: int, tol: float) -> tuple:
    N = rank + 1
    Z = trep.z(N, N)
    mu0 = complex(Z.diagonal()[trep.mask].mean()) if trep.mask.any() else complex(Z.diagonal().mean())
    defect = trep.wnorm(Z - mu0 * trep.identity())
    if defect > max(tol, 1e-8):
        raise ClassifyError(f"z[{N},{N}] is not scalar on the window (defect {defect:.3e})")
    images = {}
    for (i, j), m in trep.images.items():
        if i <= rank and j <= rank:
            images[(i, j)] = (mu0 * m).tocsr() if i == rank else m
    out = TruncatedRep(rank - 1, trep.dim, trep.factors, trep.window, images, trep.lam, trep.source)
    return mu0, defect, out


def identify(rep: Union[SymbolicRep, TruncatedRep], mode: Optional[str] = None, tol: float = DEFAULT_TOL) -> IdentificationResult:
    """Recover ``(lambda, w)`` with ``rep ~ psi_{lambda, w}``."""
    mode = mode or ("numeric" if isinstance(rep, TruncatedRep) else "symbolic")
    if mode == "symbolic" and not isinstance(rep, SymbolicRep):
        raise TypeError("symbolic identification needs a SymbolicRep")
    if mode == "numeric" and not isinstance(rep, TruncatedRep):
        raise TypeError("numeric identification needs a TruncatedRep")
    n = rep.n
    cur = rep
    segs: list = []
    lam: list = [None] * n
    steps: list = []
    for rank in range(n, 0, -1):
        r = r_index(cur, tol)
        start = r
        while r <= rank:
            if mode == "symbolic":
                r0, cur = peel_symbolic(cur)
                steps.append({"rank": rank, "r": r0})
            else:
                step = factor_numeric(cur, tol)
                cur = step.rep
                steps.append({"rank": rank, **step.diagnostics})
            r_next = r_index(cur, tol)
            if r_next != r + 1:
                raise ClassifyError(f"r did not advance: {r} -> {r_next}")
            r = r_next
        if start <= rank:
            if segs and not rank < segs[-1][1]:
                raise ClassifyError("segment upper bounds failed to decrease")
            segs.append((start, rank))
        if mode == "symbolic":
            mu0, cur = _descend_symbolic(cur, rank)
            lam[rank - 1] = mu0.conj()
            steps.append({"rank": rank, "descend": repr(mu0)})
        else:
            mu0, defect, cur = _descend_numeric(cur, rank, tol)
            lam[rank - 1] = np.conj(mu0)
            steps.append({"rank": rank, "descend": [mu0.real, mu0.imag], "scalar_defect": defect})
    # the rank-zero remainder must be the trivial representation
    if mode == "symbolic":
        if cur.factors != 0 or cur.z(1, 1) != TensorOperator.identity(0):
            raise ClassifyError("leftover tensor factors after the last descent")
    else:
        last = cur.z(1, 1)
        if abs(last.diagonal().mean() - 1) > 1e-6 or cur.factors != 0:
            raise ClassifyError("leftover structure after the last descent")
    return IdentificationResult(tuple(lam), NormalForm(n, tuple(segs)), steps, mode)
