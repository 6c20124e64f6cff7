"""Truncated sparse-matrix realizations and the conjugation-sum operators.

A ``TruncatedRep`` stores every generator image compressed to
``span{e_0..e_{N-1}}`` in each tensor factor.  Statements about the infinite
operators are tested on the *window*: basis vectors whose factor indices are
all ``< W``.  Truncation damage only enters near the top index, so window
residuals measure the genuine operator identities.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .rep.polynomial import StarPolynomial
from .rep.symbolic import SymbolicRep, lambda_values
from .rep.voperators import E_poly, v_poly
from .weyl import NormalForm, WordError

__all__ = [
    "TruncatedRep",
    "truncate_rep",
    "window_mask",
    "window_norm",
    "conj_sum",
    "W_op",
    "U_op",
    "wu_residuals",
    "r_index_numeric",
    "RS_ops",
    "RS_direct",
    "spectrum",
    "op_norm",
    "WoldResult",
    "wold",
    "write_triplets",
    "read_triplets",
    "DEFAULT_TOL",
    "DEFAULT_DIM_CAP",
    "DENSE_LIMIT",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_DIM_CAP = 1 << 20
DENSE_LIMIT = 4096


class DimensionCapError(MemoryError):
    pass


def window_mask(dim: int, factors: int, window: int) -> np.ndarray:
    """Boolean mask of basis indices with every factor index below ``window``."""
    if factors == 0:
        return np.ones(1, dtype=bool)
    digits = np.indices((dim,) * factors).reshape(factors, -1)
    return np.all(digits < window, axis=0)


@dataclass
class TruncatedRep:
    n: int
    dim: int
    factors: int
    window: int
    images: dict  # (i, j) -> csr_matrix, missing keys are zero
    lam: tuple = ()
    source: str = "symbolic"
    symbolic: Optional[SymbolicRep] = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.factors and self.window > self.dim:
            raise ValueError(f"window {self.window} exceeds dimension {self.dim}")

    @property
    def size(self) -> int:
        return self.dim ** self.factors

    @property
    def mask(self) -> np.ndarray:
        if "mask" not in self._cache:
            self._cache["mask"] = window_mask(self.dim, self.factors, self.window)
        return self._cache["mask"]

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.size, dtype=complex, format="csr")

    def zero(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.size, self.size), dtype=complex)

    def z(self, i: int, j: int) -> sp.csr_matrix:
        if not (1 <= i <= self.n + 1 and 1 <= j <= self.n + 1):
            raise IndexError(f"generator z[{i},{j}] out of range for n={self.n}")
        m = self.images.get((i, j))
        return self.zero() if m is None else m

    def zstar(self, i: int, j: int) -> sp.csr_matrix:
        return self.z(i, j).conj().T.tocsr()

    def evaluate(self, p: StarPolynomial) -> sp.csr_matrix:
        """Product of truncated matrices; exact only where truncation does not bite."""
        out = self.zero()
        for letters, c in p.terms.items():
            acc = self.identity()
            for i, j, star in letters:
                acc = acc @ (self.zstar(i, j) if star else self.z(i, j))
            out = out + c.evaluate(self.lam) * acc
        return out.tocsr()

    def wnorm(self, mat) -> float:
        return window_norm(mat, self.mask)

    def with_images(self, images: dict, **kw) -> "TruncatedRep":
        args = dict(n=self.n, dim=self.dim, factors=self.factors, window=self.window, lam=self.lam, source=self.source)
        args.update(kw)
        return TruncatedRep(images=images, **args)


def truncate_rep(
    srep: SymbolicRep,
    dim: int,
    lam: Optional[Sequence[complex]] = None,
    window: Optional[int] = None,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> TruncatedRep:
    """Materialize every image of ``srep`` on ``(C^dim)^{(x) factors}``."""
    window = dim // 2 if window is None else window
    if window > dim // 2 and srep.factors:
        raise ValueError(f"window {window} must be at most dim/2 = {dim // 2}")
    if dim < 2:
        raise ValueError("dim must be at least 2")
    size = dim ** srep.factors
    if size > dim_cap:
        raise DimensionCapError(f"{dim}^{srep.factors} = {size} exceeds dim_cap {dim_cap}")
    if lam is None:
        lam = lambda_values(srep.lam, srep.n)
    lam = tuple(complex(x) for x in lam)
    images = {}
    for key, op in srep.images.items():
        if op:
            images[key] = op.to_matrix(dim, lam)
    return TruncatedRep(srep.n, dim, srep.factors, window, images, lam, "symbolic", srep)


# -- norms and spectra --------------------------------------------------------


def window_norm(mat, mask: np.ndarray) -> float:
    """Operator norm of the compression of ``mat`` to the window."""
    idx = np.nonzero(mask)[0]
    block = mat[idx][:, idx] if sp.issparse(mat) else np.asarray(mat)[np.ix_(idx, idx)]
    return op_norm(block)


def op_norm(mat, iters: int = 200, seed: int = 0) -> float:
    """Spectral norm: dense SVD below ``DENSE_LIMIT``, power iteration above."""
    if sp.issparse(mat):
        if mat.nnz == 0:
            return 0.0
        if mat.shape[0] <= DENSE_LIMIT and mat.shape[1] <= DENSE_LIMIT:
            mat = mat.toarray()
    if not sp.issparse(mat):
        a = np.asarray(mat)
        return float(la.norm(a, 2)) if a.size else 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(mat.shape[1]) + 1j * rng.standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = mat.conj().T @ (mat @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if abs(nw - est) <= 1e-13 * nw:
            break
        est = nw
    return float(np.sqrt(nw))


def spectrum(mat, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if mat.shape[0] > dense_limit:
        raise DimensionCapError(f"eigensolve of size {mat.shape[0]} above limit {dense_limit}")
    a = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return la.eigvals(a)


def distinct_points(values: Iterable[complex], tol: float = 1e-6) -> list:
    """Cluster nearby eigenvalues into representative points."""
    pts: list = []
    for v in values:
        if all(abs(v - p) > tol for p in pts):
            pts.append(complex(v))
    return sorted(pts, key=lambda c: (round(abs(c), 9), round(np.angle(c), 9)))


# -- conjugation sums ---------------------------------------------------------


def conj_sum(A, X, max_terms: Optional[int] = None, zero_tol: float = 0.0):
    """``sum_k A^k X (A^k)^*`` until the terms vanish (or ``max_terms`` is hit)."""
    limit = max_terms if max_terms is not None else 4 * A.shape[0]
    out = X.copy()
    P = A.copy()
    for _ in range(limit):
        term = P @ X @ P.conj().T
        term.eliminate_zeros()
        if term.nnz == 0 or (zero_tol and abs(term).max() <= zero_tol):
            break
        out = out + term
        P = P @ A
        P.eliminate_zeros()
        if P.nnz == 0:
            break
    else:
        log.warning("conjugation sum did not terminate after %d terms", limit)
    return out.tocsr()


def r_index_numeric(trep: TruncatedRep, tol: float = DEFAULT_TOL) -> int:
    """``min{i : Z_{n+1,i} != 0}`` with the zero test done on the window."""
    N = trep.n + 1
    for i in range(1, N + 1):
        if trep.wnorm(trep.z(N, i)) > tol:
            return i
    raise ValueError("every bottom-row generator vanishes on the window; not a representation")


def W_op(trep: TruncatedRep, i: int, j: int, r: Optional[int] = None):
    """``W_{j,j} = Z_{n+1,j}``, ``W_{i,j} = sum_k Z_{n+1,i}^k W_{i-1,j} (Z_{n+1,i}^k)^*``."""
    N = trep.n + 1
    r = r_index_numeric(trep) if r is None else r
    if not (r <= j <= i <= N):
        raise IndexError(f"W[{i},{j}] needs r={r} <= j <= i <= {N}")
    key = ("W", i, j)
    if key not in trep._cache:
        if i == j:
            trep._cache[key] = trep.z(N, j)
        else:
            trep._cache[key] = conj_sum(trep.z(N, i), W_op(trep, i - 1, j, r))
    return trep._cache[key]


def U_op(trep: TruncatedRep, i: int, r: Optional[int] = None):
    """``U_{r+1} = Z_{n+1,r}``, ``U_i = sum_k Z_{n+1,i}^k U_{i-1} (Z_{n+1,i}^k)^*``."""
    N = trep.n + 1
    r = r_index_numeric(trep) if r is None else r
    if not (r + 1 <= i <= N):
        raise IndexError(f"U[{i}] needs r+1={r + 1} <= i <= {N}")
    key = ("U", i)
    if key not in trep._cache:
        if i == r + 1:
            trep._cache[key] = trep.z(N, r)
        else:
            trep._cache[key] = conj_sum(trep.z(N, i), U_op(trep, i - 1, r))
    return trep._cache[key]


def wu_residuals(trep: TruncatedRep, tol: float = DEFAULT_TOL) -> dict:
    """Window residuals of the W/U identities for an irreducible truncated rep.

    Keys: ``scalar`` (W[n+1,r] minus its mean diagonal), ``commute`` (its
    commutators with every generator), ``wu`` (W[n+1,r]^* U - U^* U with
    U = U[n+1]), ``isometry`` (W^*W - I for W = W[n+1,r+1]) and ``defect``
    (W^*W - W W^* - U^*U for every W[i,r+1], U[i]).  Keys that need ``r <= n``
    are omitted when ``r = n+1``.
    """
    N = trep.n + 1
    r = r_index_numeric(trep, tol)
    Wr = W_op(trep, N, r, r)
    lam = complex(Wr.diagonal()[trep.mask].mean())
    out = {"r": r, "phase": lam, "scalar": trep.wnorm(Wr - lam * trep.identity())}
    out["commute"] = max(
        trep.wnorm(Wr @ trep.z(i, j) - trep.z(i, j) @ Wr) for i in range(1, N + 1) for j in range(1, N + 1)
    )
    if r > trep.n:
        return out
    U = U_op(trep, N, r)
    out["wu"] = trep.wnorm(Wr.conj().T @ U - U.conj().T @ U)
    W = W_op(trep, N, r + 1, r)
    out["isometry"] = trep.wnorm(W.conj().T @ W - trep.identity())
    worst = 0.0
    for i in range(r + 1, N + 1):
        Wi, Ui = W_op(trep, i, r + 1, r), U_op(trep, i, r)
        worst = max(worst, trep.wnorm(Wi.conj().T @ Wi - Wi @ Wi.conj().T - Ui.conj().T @ Ui))
    out["defect"] = worst
    return out


# -- R and S operators --------------------------------------------------------


def _rs_check(nf: NormalForm, j: int, i: int) -> None:
    if not 1 <= j <= nf.k:
        raise WordError(f"segment index j={j} outside 1..{nf.k}")
    if not nf.a(j) + 1 <= i <= nf.b(j) + 1:
        raise WordError(f"i={i} outside [a_j + 1, b_j + 1] = [{nf.a(j) + 1}, {nf.b(j) + 1}]")


def RS_direct(nf: NormalForm, j: int, i: int, dim: int) -> tuple:
    """Truncations of the elementary tensors ``R_{j,i}`` and ``S_{j,i}``."""
    from .opalgebra import operator_from_labels

    _rs_check(nf, j, i)
    a, b = nf.segments[j - 1]
    before = sum(nf.seg_len(r) for r in range(j + 1, nf.k + 1))
    after = sum(nf.seg_len(r) for r in range(1, j))
    tail = ["S*"] + ["I"] * (i - a - 1)
    R = ["I"] * before + ["P0"] * (b + 1 - i) + tail + ["I"] * after
    S = ["I"] * before + ["I"] * (b + 1 - i) + tail + ["I"] * after
    return operator_from_labels(R).to_matrix(dim), operator_from_labels(S).to_matrix(dim)


def _unphase(mat):
    """Divide out the unimodular phase of an operator that is a phase times a 0/1 matrix."""
    mat = mat.tocsr()
    if mat.nnz == 0:
        return mat
    c = mat.data[np.argmax(np.abs(mat.data))]
    return (mat * (abs(c) / c)).tocsr()


def RS_ops(trep: TruncatedRep, j: int, i: int) -> tuple:
    """``(R_{j,i}, S_{j,i})`` built from the images by conjugation sums.

    Segment 1: ``R_{1,i} = V_{1,i}``; ``S_{1,i}`` conjugates ``V_{1,i}`` by
    ``S_{1,t}`` for ``t = i+1 .. b_1+1``.  Higher segments start from
    ``E_{j,i}`` conjugated by every ``S_{r,t}`` of the lower segments, then
    ``S_{j,i}`` conjugates ``R_{j,i}`` by ``R_{j,t}``, ``t > i``.  The
    lambda phase of ``V``/``E`` is divided out first.
    """
    if trep.symbolic is None or trep.symbolic.word is None:
        raise ValueError("R/S construction needs a rep built from a normal form")
    nf = trep.symbolic.word
    _rs_check(nf, j, i)
    key = ("RS", j, i)
    if key in trep._cache:
        return trep._cache[key]
    b = nf.b(j)
    if j == 1:
        R = _unphase(trep.evaluate(v_poly(nf, 1, i)))
    else:
        R = _unphase(trep.evaluate(E_poly(nf, j, i)))
        for r in range(1, j):
            for t in range(nf.a(r) + 1, nf.b(r) + 2):
                R = conj_sum(RS_ops(trep, r, t)[1], R)
    S = R
    for t in range(i + 1, b + 2):
        A = RS_ops(trep, j, t)[1] if j == 1 else RS_ops(trep, j, t)[0]
        S = conj_sum(A, S)
    trep._cache[key] = (R, S)
    return R, S


# -- Wold decomposition -------------------------------------------------------


@dataclass
class WoldResult:
    basis: np.ndarray  # columns span the wandering space (restricted to the window)
    isometry_defect: float
    embedding_defect: float
    unitary_defect: float
    depth: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def to_json(self) -> dict:
        return {
            "wandering_dim": self.dim,
            "isometry_defect": self.isometry_defect,
            "embedding_defect": self.embedding_defect,
            "unitary_defect": self.unitary_defect,
            "depth": self.depth,
        }


def _herm_norm(H: np.ndarray) -> float:
    """Spectral norm of a Hermitian matrix."""
    if not H.size:
        return 0.0
    w = la.eigvalsh((H + H.conj().T) / 2)
    return float(np.abs(w).max())


def _lowdin(Q: np.ndarray) -> np.ndarray:
    """Symmetric orthonormalization ``Q (Q^* Q)^{-1/2}``."""
    G = Q.conj().T @ Q
    w, U = la.eigh(G)
    if w.min() <= 0:
        raise np.linalg.LinAlgError("reference vectors are linearly dependent on the wandering space")
    return Q @ (U * w ** -0.5) @ U.conj().T


def wold(
    Wmat,
    mask: np.ndarray,
    tol: float = DEFAULT_TOL,
    reference: Optional[np.ndarray] = None,
    depth: Optional[int] = None,
) -> WoldResult:
    """Wandering space ``ker W^*`` of an isometry, restricted to the window.

    The kernel is the eigenspace of ``W W^*`` (compressed to the window) with
    eigenvalues below ``tol**2`` times the largest one.  When
    ``reference`` columns are given the basis is aligned to them by projecting
    and Loewdin-orthonormalizing, which fixes the fiber unitary.

    ``embedding_defect`` is ``||Phi^* Phi - I||`` for ``Phi(xi (x) e_k) = W^k xi``
    over ``k < depth``; ``unitary_defect`` is the norm of the window part not
    reached by ``Phi``, which vanishes exactly when there is no unitary summand.
    """
    W = Wmat.tocsr() if sp.issparse(Wmat) else sp.csr_matrix(Wmat)
    idx = np.nonzero(mask)[0]
    Wd = W.toarray()
    Wwin = Wd[:, idx]
    isometry_defect = _herm_norm(Wwin.conj().T @ Wwin - np.eye(idx.size)) if idx.size else 0.0
    # ker W^* among window vectors: W^* v = 0  <=>  v^* (W W^*) v = 0
    G = (Wd.conj().T[:, idx]).conj().T @ Wd.conj().T[:, idx]
    w, U = la.eigh(G)
    top = max(w.max(), 1.0) if w.size else 1.0
    null = U[:, w <= (tol ** 2) * top]
    if null.shape[1] == 0:
        raise ValueError("empty wandering space: W is unitary on the window")
    basis = np.zeros((W.shape[0], null.shape[1]), dtype=complex)
    basis[idx] = null
    if reference is not None:
        basis = _lowdin(basis @ (basis.conj().T @ reference))
    # Phi on the window: columns W^k xi for k < depth
    depth = depth if depth is not None else max(1, int(round(idx.size / basis.shape[1])))
    cols = []
    cur = basis
    for _ in range(depth):
        cols.append(cur)
        cur = W @ cur
    Phi = np.hstack(cols)
    embedding_defect = _herm_norm(Phi.conj().T @ Phi - np.eye(Phi.shape[1]))
    # the part of the window not reached by Phi
    Q = Phi if embedding_defect < 1e-8 else la.qr(Phi, mode="economic")[0]
    win = np.zeros((W.shape[0], idx.size), dtype=complex)
    win[idx, np.arange(idx.size)] = 1
    rest = win - Q @ (Q.conj().T @ win)
    unitary_defect = _herm_norm(rest.conj().T @ rest) ** 0.5
    return WoldResult(basis, isometry_defect, embedding_defect, unitary_defect, depth)


# -- triplet I/O --------------------------------------------------------------


def write_triplets(mat, path) -> None:
    """Write ``row col re im`` lines (first line: ``# rows cols``)."""
    coo = sp.coo_matrix(mat)
    with open(path, "w") as fh:
        fh.write(f"# {coo.shape[0]} {coo.shape[1]}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            if v != 0:
                fh.write(f"{r} {c} {float(v.real)!r} {float(v.imag)!r}\n")


def read_triplets(path, shape: Optional[tuple] = None) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if shape is None and len(parts) == 2:
                    shape = (int(parts[0]), int(parts[1]))
                continue
            r, c, re_, im_ = line.split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(complex(float(re_), float(im_)))
    if shape is None:
        side = max(max(rows, default=-1), max(cols, default=-1)) + 1
        shape = (side, side)
    mat = sp.coo_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=shape).tocsr()
    mat.eliminate_zeros()
    return mat
